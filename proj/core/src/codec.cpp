/*
 * frc. Copyright 2026 The frc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "frc/codec.hpp"

#include "frc/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace frc {

namespace {

// Source-pixel row/col for out(r,c) under each isometry code.
inline std::pair<int, int> iso_source(std::uint8_t code, int r, int c, int m) {
    switch (code) {
    case 0: return {r, c};
    case 1: return {m - r, c};
    case 2: return {r, m - c};
    case 3: return {c, r};
    case 4: return {m - c, m - r};
    case 5: return {m - c, r};
    case 6: return {m - r, m - c};
    case 7: return {c, m - r};
    default: throw std::invalid_argument("isometry code out of range");
    }
}

// out[i] = in[table[i]] for a side x side block.
std::vector<int> iso_table(std::uint8_t code, int side) {
    std::vector<int> table(static_cast<std::size_t>(side) * side);
    const int m = side - 1;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const auto [sr, sc] = iso_source(code, r, c, m);
            table[static_cast<std::size_t>(r) * side + c] = sr * side + sc;
        }
    return table;
}

constexpr int kIsoCount = 8;

struct SideTables {
    std::array<std::vector<int>, kIsoCount> perm;
    explicit SideTables(int side) {
        for (int k = 0; k < kIsoCount; ++k)
            perm[static_cast<std::size_t>(k)] = iso_table(static_cast<std::uint8_t>(k), side);
    }
};

// Downsampled domain blocks in quarter-pixel units (sum of each 2x2
// group, range 0..1020) plus their first and second moments. One pool
// per range-block side.
struct DomainPool {
    int side = 0; // range side it serves
    PoolDims dims;
    int n = 0; // side * side
    std::vector<std::int32_t> d4;
    std::vector<std::int64_t> sum;
    std::vector<std::int64_t> sum_sq;

    const std::int32_t* block(int index) const { return d4.data() + static_cast<std::size_t>(index) * n; }
};

DomainPool build_pool(const GrayImage& img, int side, int step) {
    DomainPool pool;
    pool.side = side;
    pool.dims = pool_dims(img.width, img.height, side, step);
    pool.n = side * side;
    const int count = pool.dims.count_x * pool.dims.count_y;
    pool.d4.resize(static_cast<std::size_t>(count) * pool.n);
    pool.sum.resize(count);
    pool.sum_sq.resize(count);
    for (int dy = 0; dy < pool.dims.count_y; ++dy) {
        for (int dx = 0; dx < pool.dims.count_x; ++dx) {
            const int index = dy * pool.dims.count_x + dx;
            const int ox = dx * step;
            const int oy = dy * step;
            std::int32_t* out = pool.d4.data() + static_cast<std::size_t>(index) * pool.n;
            std::int64_t s = 0, ss = 0;
            for (int r = 0; r < side; ++r) {
                const std::uint8_t* row0 = img.row(oy + 2 * r);
                const std::uint8_t* row1 = img.row(oy + 2 * r + 1);
                for (int c = 0; c < side; ++c) {
                    const int x = ox + 2 * c;
                    const std::int32_t v = row0[x] + row0[x + 1] + row1[x] + row1[x + 1];
                    out[r * side + c] = v;
                    s += v;
                    ss += static_cast<std::int64_t>(v) * v;
                }
            }
            pool.sum[index] = s;
            pool.sum_sq[index] = ss;
        }
    }
    return pool;
}

// Exact quantization of the least-squares fit. All quantities are scaled
// integers: d4 values carry a factor 4, alpha a factor 2^bits_alpha, and
// the per-pixel residual a factor 2^(bits_alpha + 2).
struct QuantFit {
    std::int32_t alpha_q = 0;
    std::int32_t dg = 0; // signed integer offset
    std::int64_t sse = 0;
};

QuantFit quantized_fit(std::int64_t n, std::int64_t sum_r, std::int64_t sum_rr,
                       std::int64_t sum_d, std::int64_t sum_dd, std::int64_t cross,
                       int bits_alpha, int bits_dg) {
    const std::int64_t a_num = n * cross - sum_d * sum_r;   // 4n^2 cov(D,R)
    const std::int64_t var = n * sum_dd - sum_d * sum_d;    // 16n^2 var(D)
    const std::int64_t alpha_levels = std::int64_t{1} << bits_alpha;

    std::int64_t q = 0;
    if (var > 0 && a_num > 0) {
        if (4 * a_num >= var)
            q = alpha_levels - 1; // alpha clamps to 1, quantizer clamps below 1
        else
            q = std::min((8 * a_num * alpha_levels + var) / (2 * var), alpha_levels - 1);
    }

    const int shift = bits_alpha + 2;
    const std::int64_t scale = std::int64_t{1} << shift;
    const std::int64_t dg_num = (sum_r << shift) - q * sum_d;
    const std::int64_t dg_den = n << shift;
    const std::int64_t mag_raw = (2 * std::llabs(dg_num) + dg_den) / (2 * dg_den);
    const std::int64_t mag = std::min(mag_raw, (std::int64_t{1} << bits_dg) - 1);
    const std::int64_t dg = dg_num < 0 ? -mag : mag;

    // sum over pixels of (scale*R - scale*dg - q*D4)^2, expanded so only
    // the cross term needs the pixel loop the caller already did.
    const std::int64_t sse = scale * scale * (sum_rr - 2 * dg * sum_r + n * dg * dg) -
                             2 * q * scale * (cross - dg * sum_d) + q * q * sum_dd;

    QuantFit fit;
    fit.alpha_q = static_cast<std::int32_t>(q);
    fit.dg = static_cast<std::int32_t>(dg);
    fit.sse = sse;
    return fit;
}

struct RangeData {
    int n = 0;
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    std::array<std::vector<std::int32_t>, kIsoCount> variants; // R permuted by each inverse isometry
};

RangeData load_range(const GrayImage& img, Region rg, const SideTables& tables) {
    RangeData rd;
    rd.n = rg.side * rg.side;
    std::vector<std::int32_t> raw(rd.n);
    for (int r = 0; r < rg.side; ++r) {
        const std::uint8_t* row = img.row(rg.y + r);
        for (int c = 0; c < rg.side; ++c) {
            const std::int32_t v = row[rg.x + c];
            raw[r * rg.side + c] = v;
            rd.sum += v;
            rd.sum_sq += static_cast<std::int64_t>(v) * v;
        }
    }
    for (int iso = 0; iso < kIsoCount; ++iso) {
        const auto& perm = tables.perm[static_cast<std::size_t>(inverse_isometry(static_cast<std::uint8_t>(iso)))];
        auto& v = rd.variants[static_cast<std::size_t>(iso)];
        v.resize(rd.n);
        for (int i = 0; i < rd.n; ++i)
            v[i] = raw[perm[i]];
    }
    return rd;
}

struct ScoredMatch {
    BlockTransform transform;
    std::int64_t sse = 0;
    double err = 0.0;
};

// Exhaustive scan of the pool: candidates in (dy, dx, iso) order, strict
// improvement only, which realizes the lexicographic tie-break.
ScoredMatch best_match(const GrayImage& img, Region rg, const CodecConfig& cfg,
                       const DomainPool& pool, const SideTables& tables) {
    const RangeData rd = load_range(img, rg, tables);
    const int n = rd.n;
    const int domain_count = pool.dims.count_x * pool.dims.count_y;

    std::int64_t best_sse = std::numeric_limits<std::int64_t>::max();
    int best_dom = 0, best_iso = 0;
    QuantFit best_fit;

    for (int dom = 0; dom < domain_count; ++dom) {
        const std::int32_t* d = pool.block(dom);
        const std::int64_t sum_d = pool.sum[dom];
        const std::int64_t sum_dd = pool.sum_sq[dom];
        for (int iso = 0; iso < kIsoCount; ++iso) {
            const std::int32_t* rv = rd.variants[static_cast<std::size_t>(iso)].data();
            std::int64_t cross = 0;
            for (int i = 0; i < n; ++i)
                cross += static_cast<std::int64_t>(d[i]) * rv[i];
            const QuantFit fit = quantized_fit(n, rd.sum, rd.sum_sq, sum_d, sum_dd, cross,
                                               cfg.bits_alpha, cfg.bits_dg);
            if (fit.sse < best_sse) {
                best_sse = fit.sse;
                best_dom = dom;
                best_iso = iso;
                best_fit = fit;
            }
        }
    }

    const int shift = cfg.bits_alpha + 2;
    ScoredMatch out;
    out.transform.dx = static_cast<std::uint16_t>(best_dom % pool.dims.count_x);
    out.transform.dy = static_cast<std::uint16_t>(best_dom / pool.dims.count_x);
    out.transform.alpha_q = static_cast<std::uint16_t>(best_fit.alpha_q);
    out.transform.dg_sign = best_fit.dg < 0 ? 1 : 0;
    out.transform.dg_mag = static_cast<std::uint16_t>(std::abs(best_fit.dg));
    out.transform.iso.code = static_cast<std::uint8_t>(best_iso);
    out.sse = best_sse;
    out.err = static_cast<double>(best_sse) /
              (static_cast<double>(n) * std::exp2(2.0 * shift));
    return out;
}

// Shared read-only state for one encode: per-side pools and permutations.
struct EncodeEngine {
    const GrayImage& img;
    const CodecConfig& cfg;
    std::map<int, DomainPool> pools;
    std::map<int, SideTables> tables;

    EncodeEngine(const GrayImage& image, const CodecConfig& config) : img(image), cfg(config) {
        std::vector<int> sides{cfg.range_size};
        if (cfg.partition_mode == PartitionMode::Quadtree)
            for (int d = 1; d <= cfg.max_depth; ++d)
                sides.push_back(cfg.range_size << d);
        for (int side : sides) {
            pools.emplace(side, build_pool(img, side, cfg.domain_step));
            tables.emplace(side, SideTables(side));
        }
    }

    ScoredMatch match(Region rg) const {
        return best_match(img, rg, cfg, pools.at(rg.side), tables.at(rg.side));
    }
};

struct SubtreeResult {
    std::vector<std::uint8_t> bits;
    std::vector<Region> leaves;
    std::vector<BlockTransform> transforms;
};

void build_quadtree(const EncodeEngine& eng, Region node, int depth, SubtreeResult& out) {
    if (depth < eng.cfg.max_depth) {
        const ScoredMatch m = eng.match(node);
        if (m.err > eng.cfg.split_threshold) {
            out.bits.push_back(1);
            const int h = node.side / 2;
            build_quadtree(eng, {node.x, node.y, h}, depth + 1, out);
            build_quadtree(eng, {node.x + h, node.y, h}, depth + 1, out);
            build_quadtree(eng, {node.x, node.y + h, h}, depth + 1, out);
            build_quadtree(eng, {node.x + h, node.y + h, h}, depth + 1, out);
            return;
        }
        out.bits.push_back(0);
        out.leaves.push_back(node);
        out.transforms.push_back(m.transform);
        return;
    }
    const ScoredMatch m = eng.match(node);
    out.leaves.push_back(node);
    out.transforms.push_back(m.transform);
}

std::vector<Region> grid_regions(int width, int height, int side) {
    std::vector<Region> out;
    out.reserve(static_cast<std::size_t>(width / side) * (height / side));
    for (int y = 0; y + side <= height; y += side)
        for (int x = 0; x + side <= width; x += side)
            out.push_back({x, y, side});
    return out;
}

std::vector<Region> top_regions(int width, int height, const CodecConfig& cfg) {
    return grid_regions(width, height, cfg.range_size << cfg.max_depth);
}

void run_parallel(std::size_t jobs, int threads, const std::function<void(std::size_t)>& work) {
    unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    if (n == 0)
        n = 1;
    n = std::min<unsigned>(n, jobs == 0 ? 1 : static_cast<unsigned>(std::min<std::size_t>(jobs, 256)));
    if (n <= 1) {
        for (std::size_t i = 0; i < jobs; ++i)
            work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (unsigned t = 0; t < n; ++t)
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs)
                    return;
                work(i);
            }
        });
    for (auto& w : workers)
        w.join();
}

} // namespace

CodecConfig CodecConfig::paper_2x2() {
    CodecConfig cfg;
    cfg.range_size = 2;
    cfg.domain_step = 2;
    return cfg;
}

CodecConfig CodecConfig::paper_fig2() {
    CodecConfig cfg;
    cfg.range_size = 4;
    cfg.domain_step = 8;
    cfg.bits_dx = 5;
    cfg.bits_dy = 5;
    cfg.bits_alpha = 5;
    cfg.bits_dg = 6;
    return cfg;
}

void CodecConfig::validate(int width, int height) const {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("config: image dimensions must be positive");
    if (width > 0xFFFF || height > 0xFFFF)
        throw std::invalid_argument("config: image dimensions exceed 16 bits");
    if (range_size < 2)
        throw std::invalid_argument("config: range_size must be at least 2");
    if (domain_step < 1)
        throw std::invalid_argument("config: domain_step must be positive");
    if (bits_dx < 1 || bits_dx > 8 || bits_dy < 1 || bits_dy > 8)
        throw std::invalid_argument("config: position bit widths must be in [1,8]");
    if (bits_alpha < 1 || bits_alpha > 8)
        throw std::invalid_argument("config: bits_alpha must be in [1,8]");
    if (bits_dg < 1 || bits_dg > 8)
        throw std::invalid_argument("config: bits_dg must be in [1,8]");
    if (word_width() > 16)
        throw std::invalid_argument("config: alpha+sign+offset exceeds 16 bits");
    if (iterations < 1)
        throw std::invalid_argument("config: iterations must be at least 1");

    int largest_side = range_size;
    if (partition_mode == PartitionMode::Quadtree) {
        if (max_depth < 1 || max_depth > 8)
            throw std::invalid_argument("config: quadtree max_depth must be in [1,8]");
        if (!(split_threshold >= 0.0))
            throw std::invalid_argument("config: split_threshold must be non-negative");
        largest_side = range_size << max_depth;
    }
    if (width % largest_side != 0 || height % largest_side != 0)
        throw std::invalid_argument("config: block size does not divide image dimensions");
    if (2 * largest_side > width || 2 * largest_side > height)
        throw std::invalid_argument("config: domain blocks do not fit inside the image");

    const PoolDims pd = pool_dims(width, height, range_size, domain_step);
    if (pd.count_x < 1 || pd.count_y < 1)
        throw std::invalid_argument("config: empty domain pool");
    if (pd.count_x > (1 << bits_dx) || pd.count_y > (1 << bits_dy))
        throw std::invalid_argument("config: domain pool exceeds position bit widths");
}

std::uint8_t inverse_isometry(std::uint8_t code) {
    static constexpr std::array<std::uint8_t, 8> inv{0, 1, 2, 3, 4, 7, 6, 5};
    if (code >= 8)
        throw std::invalid_argument("isometry code out of range");
    return inv[code];
}

PoolDims pool_dims(int width, int height, int range_side, int domain_step) {
    const int d = 2 * range_side;
    PoolDims pd;
    pd.count_x = width >= d ? (width - d) / domain_step + 1 : 0;
    pd.count_y = height >= d ? (height - d) / domain_step + 1 : 0;
    return pd;
}

std::vector<Region> domain_pool(const GrayImage& img, const CodecConfig& cfg) {
    cfg.validate(img.width, img.height);
    const PoolDims pd = pool_dims(img.width, img.height, cfg.range_size, cfg.domain_step);
    std::vector<Region> out;
    out.reserve(static_cast<std::size_t>(pd.count_x) * pd.count_y);
    for (int dy = 0; dy < pd.count_y; ++dy)
        for (int dx = 0; dx < pd.count_x; ++dx)
            out.push_back({dx * cfg.domain_step, dy * cfg.domain_step, 2 * cfg.range_size});
    return out;
}

std::vector<double> downsample(const std::vector<double>& block, int side) {
    if (side % 2 != 0 || block.size() != static_cast<std::size_t>(side) * side)
        throw std::invalid_argument("downsample: block side must be even");
    const int half = side / 2;
    std::vector<double> out(static_cast<std::size_t>(half) * half);
    for (int r = 0; r < half; ++r)
        for (int c = 0; c < half; ++c) {
            const double* row0 = block.data() + static_cast<std::size_t>(2 * r) * side + 2 * c;
            const double* row1 = row0 + side;
            out[static_cast<std::size_t>(r) * half + c] = (row0[0] + row0[1] + row1[0] + row1[1]) / 4.0;
        }
    return out;
}

template <typename T>
std::vector<T> apply_isometry(const std::vector<T>& block, int side, Isometry iso) {
    if (block.size() != static_cast<std::size_t>(side) * side)
        throw std::invalid_argument("apply_isometry: block size mismatch");
    const auto table = iso_table(iso.code, side);
    std::vector<T> out(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
        out[i] = block[table[i]];
    return out;
}

template std::vector<double> apply_isometry<double>(const std::vector<double>&, int, Isometry);
template std::vector<std::uint8_t> apply_isometry<std::uint8_t>(const std::vector<std::uint8_t>&, int, Isometry);
template std::vector<int> apply_isometry<int>(const std::vector<int>&, int, Isometry);

AffineFit fit_affine(const std::vector<double>& range, const std::vector<double>& domain_ds) {
    if (range.size() != domain_ds.size() || range.empty())
        throw std::invalid_argument("fit_affine: block size mismatch");
    const double n = static_cast<double>(range.size());
    double sr = 0, sd = 0, sdd = 0, sdr = 0;
    for (std::size_t i = 0; i < range.size(); ++i) {
        sr += range[i];
        sd += domain_ds[i];
        sdd += domain_ds[i] * domain_ds[i];
        sdr += domain_ds[i] * range[i];
    }
    const double var = n * sdd - sd * sd;
    double alpha = 0.0;
    if (var > 0.0)
        alpha = std::clamp((n * sdr - sd * sr) / var, 0.0, 1.0);
    const double dg = (sr - alpha * sd) / n;
    double sse = 0.0;
    for (std::size_t i = 0; i < range.size(); ++i) {
        const double e = range[i] - (alpha * domain_ds[i] + dg);
        sse += e * e;
    }
    return {alpha, dg, sse / n};
}

PartitionResult partition(const GrayImage& img, const CodecConfig& cfg) {
    cfg.validate(img.width, img.height);
    PartitionResult out;
    if (cfg.partition_mode == PartitionMode::FixedGrid) {
        out.leaves = grid_regions(img.width, img.height, cfg.range_size);
        return out;
    }
    const EncodeEngine eng(img, cfg);
    for (Region top : top_regions(img.width, img.height, cfg)) {
        SubtreeResult sub;
        build_quadtree(eng, top, 0, sub);
        out.tree_bits.insert(out.tree_bits.end(), sub.bits.begin(), sub.bits.end());
        out.leaves.insert(out.leaves.end(), sub.leaves.begin(), sub.leaves.end());
    }
    return out;
}

MatchResult match_block(const GrayImage& img, Region range, const CodecConfig& cfg) {
    cfg.validate(img.width, img.height);
    const DomainPool pool = build_pool(img, range.side, cfg.domain_step);
    if (pool.dims.count_x < 1 || pool.dims.count_y < 1)
        throw std::invalid_argument("match_block: empty domain pool for this block size");
    const SideTables tables(range.side);
    const ScoredMatch m = best_match(img, range, cfg, pool, tables);
    return {m.transform, m.err};
}

FractalCode encode(const GrayImage& img, const CodecConfig& cfg, int threads) {
    cfg.validate(img.width, img.height);
    const EncodeEngine eng(img, cfg);

    FractalCode code;
    code.width = img.width;
    code.height = img.height;
    code.config = cfg;

    if (cfg.partition_mode == PartitionMode::FixedGrid) {
        const auto leaves = grid_regions(img.width, img.height, cfg.range_size);
        code.transforms.resize(leaves.size());
        run_parallel(leaves.size(), threads, [&](std::size_t i) {
            code.transforms[i] = eng.match(leaves[i]).transform;
        });
        return code;
    }

    const auto tops = top_regions(img.width, img.height, cfg);
    std::vector<SubtreeResult> subs(tops.size());
    run_parallel(tops.size(), threads, [&](std::size_t i) {
        build_quadtree(eng, tops[i], 0, subs[i]);
    });
    for (const auto& sub : subs) {
        code.tree_bits.insert(code.tree_bits.end(), sub.bits.begin(), sub.bits.end());
        code.transforms.insert(code.transforms.end(), sub.transforms.begin(), sub.transforms.end());
    }
    return code;
}

std::size_t max_tree_bits(int width, int height, const CodecConfig& cfg) {
    if (cfg.partition_mode != PartitionMode::Quadtree)
        return 0;
    const int top = cfg.range_size << cfg.max_depth;
    const std::size_t tops = static_cast<std::size_t>(width / top) * (height / top);
    std::size_t per_top = 0;
    std::size_t level = 1;
    for (int d = 0; d < cfg.max_depth; ++d) {
        per_top += level;
        level *= 4;
    }
    return tops * per_top;
}

std::vector<Region> leaf_regions(const FractalCode& code) {
    const CodecConfig& cfg = code.config;
    if (cfg.partition_mode == PartitionMode::FixedGrid)
        return grid_regions(code.width, code.height, cfg.range_size);

    std::vector<Region> leaves;
    std::size_t cursor = 0;
    auto next_bit = [&]() -> int {
        if (cursor < code.tree_bits.size())
            return code.tree_bits[cursor++] ? 1 : 0;
        ++cursor;
        return 0; // exhausted bits read as "no split"
    };
    // preorder walk mirroring the encoder's emit order
    std::function<void(Region, int)> walk = [&](Region node, int depth) {
        if (depth < cfg.max_depth && next_bit()) {
            const int h = node.side / 2;
            walk({node.x, node.y, h}, depth + 1);
            walk({node.x + h, node.y, h}, depth + 1);
            walk({node.x, node.y + h, h}, depth + 1);
            walk({node.x + h, node.y + h, h}, depth + 1);
            return;
        }
        leaves.push_back(node);
    };
    for (Region top : top_regions(code.width, code.height, cfg))
        walk(top, 0);
    return leaves;
}

namespace {

GrayImage decode_pass(const GrayImage& prev, const FractalCode& code,
                      const std::vector<Region>& leaves,
                      std::map<int, SideTables>& tables) {
    const CodecConfig& cfg = code.config;
    GrayImage out(prev.width, prev.height);
    const int shift = cfg.bits_alpha + 2;
    const std::int64_t scale = std::int64_t{1} << shift;
    const std::int64_t half = scale >> 1;
    const std::int64_t top = std::int64_t{255} << shift;

    std::vector<std::int32_t> d4;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const Region rg = leaves[i];
        const BlockTransform& t = code.transforms[i % code.transforms.size()];
        const PoolDims pd = pool_dims(prev.width, prev.height, rg.side, cfg.domain_step);
        if (static_cast<int>(t.dx) >= pd.count_x || static_cast<int>(t.dy) >= pd.count_y)
            throw DecodeError("decode: transform references a domain position outside the pool");

        const int ox = t.dx * cfg.domain_step;
        const int oy = t.dy * cfg.domain_step;
        const int side = rg.side;
        d4.assign(static_cast<std::size_t>(side) * side, 0);
        for (int r = 0; r < side; ++r) {
            const std::uint8_t* row0 = prev.row(oy + 2 * r);
            const std::uint8_t* row1 = prev.row(oy + 2 * r + 1);
            for (int c = 0; c < side; ++c) {
                const int x = ox + 2 * c;
                d4[static_cast<std::size_t>(r) * side + c] = row0[x] + row0[x + 1] + row1[x] + row1[x + 1];
            }
        }

        auto it = tables.find(side);
        if (it == tables.end())
            it = tables.emplace(side, SideTables(side)).first;
        const auto& perm = it->second.perm[t.iso.code];

        const std::int64_t q = t.alpha_q;
        const std::int64_t dg = t.dg_sign ? -static_cast<std::int64_t>(t.dg_mag) : t.dg_mag;
        const std::int64_t offset = dg << shift;
        for (int r = 0; r < side; ++r) {
            std::uint8_t* row = out.row(rg.y + r);
            for (int c = 0; c < side; ++c) {
                const std::int64_t num = q * d4[perm[static_cast<std::size_t>(r) * side + c]] + offset;
                std::uint8_t px;
                if (num <= 0)
                    px = 0;
                else if (num >= top)
                    px = 255;
                else
                    px = static_cast<std::uint8_t>((num + half) >> shift);
                row[rg.x + c] = px;
            }
        }
    }
    return out;
}

} // namespace

std::vector<GrayImage> decode_trace(const FractalCode& code, const std::optional<GrayImage>& initial) {
    code.config.validate(code.width, code.height);
    if (code.transforms.empty())
        throw DecodeError("decode: code has no transforms");
    GrayImage cur = initial.value_or(GrayImage(code.width, code.height, 128));
    if (cur.width != code.width || cur.height != code.height)
        throw std::invalid_argument("decode: initial image dimensions mismatch");

    const auto leaves = leaf_regions(code);
    std::map<int, SideTables> tables;
    std::vector<GrayImage> trace;
    trace.reserve(static_cast<std::size_t>(code.config.iterations));
    for (int it = 0; it < code.config.iterations; ++it) {
        cur = decode_pass(cur, code, leaves, tables);
        trace.push_back(cur);
    }
    return trace;
}

GrayImage decode(const FractalCode& code, const std::optional<GrayImage>& initial) {
    auto trace = decode_trace(code, initial);
    return std::move(trace.back());
}

} // namespace frc
