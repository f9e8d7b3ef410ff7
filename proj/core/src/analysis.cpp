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

#include "frc/analysis.hpp"

#include "frc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace frc {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t combined_offset(const BlockTransform& t, const CodecConfig& cfg) {
    return (static_cast<std::uint64_t>(t.dg_sign) << cfg.bits_dg) | t.dg_mag;
}

// Replaces one block's parameter with a uniformly drawn different value.
void corrupt_block(FractalCode& code, std::size_t index, ParamKind kind, Region leaf,
                   SplitMix64& rng) {
    const CodecConfig& cfg = code.config;
    BlockTransform& t = code.transforms[index];
    switch (kind) {
    case ParamKind::Alpha: {
        const std::uint64_t space = std::uint64_t{1} << cfg.bits_alpha;
        std::uint64_t nv = rng.below(space - 1);
        if (nv >= t.alpha_q)
            ++nv;
        t.alpha_q = static_cast<std::uint16_t>(nv);
        break;
    }
    case ParamKind::LuminanceOffset: {
        const std::uint64_t space = std::uint64_t{1} << (1 + cfg.bits_dg);
        const std::uint64_t old = combined_offset(t, cfg);
        std::uint64_t nv = rng.below(space - 1);
        if (nv >= old)
            ++nv;
        t.dg_sign = static_cast<std::uint8_t>(nv >> cfg.bits_dg);
        t.dg_mag = static_cast<std::uint16_t>(nv & ((1u << cfg.bits_dg) - 1));
        break;
    }
    case ParamKind::Isometry: {
        std::uint64_t nv = rng.below(7);
        if (nv >= t.iso.code)
            ++nv;
        t.iso.code = static_cast<std::uint8_t>(nv);
        break;
    }
    case ParamKind::DomainPosition: {
        const PoolDims pd = pool_dims(code.width, code.height, leaf.side, cfg.domain_step);
        const std::uint64_t space = static_cast<std::uint64_t>(pd.count_x) * pd.count_y;
        if (space < 2)
            return; // single-position pool, nothing different to draw
        const std::uint64_t old = static_cast<std::uint64_t>(t.dy) * pd.count_x + t.dx;
        std::uint64_t nv = rng.below(space - 1);
        if (nv >= old)
            ++nv;
        t.dx = static_cast<std::uint16_t>(nv % pd.count_x);
        t.dy = static_cast<std::uint16_t>(nv / pd.count_x);
        break;
    }
    case ParamKind::TreeBits:
        throw std::logic_error("corrupt_block: tree bits are not per-block");
    }
}

// Sample k distinct indices from [0, n) by partial Fisher-Yates.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

std::string to_string(ParamKind kind) {
    switch (kind) {
    case ParamKind::DomainPosition: return "dxy";
    case ParamKind::Alpha: return "alpha";
    case ParamKind::LuminanceOffset: return "dg";
    case ParamKind::Isometry: return "iso";
    case ParamKind::TreeBits: return "tree";
    }
    return "?";
}

ParamDistribution param_distribution(const FractalCode& code, ParamKind kind) {
    if (code.encrypted)
        throw std::invalid_argument("param_distribution: code is encrypted");
    const CodecConfig& cfg = code.config;

    ParamDistribution dist;
    dist.kind = kind;
    switch (kind) {
    case ParamKind::DomainPosition:
        dist.space_size = std::uint64_t{1} << (cfg.bits_dx + cfg.bits_dy);
        break;
    case ParamKind::Alpha:
        dist.space_size = std::uint64_t{1} << cfg.bits_alpha;
        break;
    case ParamKind::LuminanceOffset:
        dist.space_size = std::uint64_t{1} << (1 + cfg.bits_dg);
        break;
    case ParamKind::Isometry:
        dist.space_size = 8;
        break;
    case ParamKind::TreeBits:
        if (cfg.partition_mode != PartitionMode::Quadtree)
            throw std::invalid_argument("param_distribution: tree bits require quadtree mode");
        dist.space_size = 2;
        break;
    }
    dist.counts.assign(dist.space_size, 0);

    if (kind == ParamKind::TreeBits) {
        for (std::uint8_t b : code.tree_bits)
            ++dist.counts[b ? 1 : 0];
        dist.total = code.tree_bits.size();
    } else {
        for (const BlockTransform& t : code.transforms) {
            std::uint64_t v = 0;
            switch (kind) {
            case ParamKind::DomainPosition:
                v = (static_cast<std::uint64_t>(t.dy) << cfg.bits_dx) | t.dx;
                break;
            case ParamKind::Alpha:
                v = t.alpha_q;
                break;
            case ParamKind::LuminanceOffset:
                v = combined_offset(t, cfg);
                break;
            case ParamKind::Isometry:
                v = t.iso.code;
                break;
            case ParamKind::TreeBits:
                break;
            }
            ++dist.counts[v];
        }
        dist.total = code.transforms.size();
    }

    dist.paper_probability.resize(dist.space_size);
    dist.relative_frequency.resize(dist.space_size);
    for (std::uint64_t j = 0; j < dist.space_size; ++j) {
        dist.paper_probability[j] = static_cast<double>(dist.counts[j]) / static_cast<double>(dist.space_size);
        dist.relative_frequency[j] =
            dist.total ? static_cast<double>(dist.counts[j]) / static_cast<double>(dist.total) : 0.0;
    }
    return dist;
}

SensitivityCurve sensitivity_curve(const GrayImage& img, const FractalCode& code, ParamKind kind,
                                   const std::vector<std::uint32_t>& ks, std::uint32_t trials,
                                   std::uint64_t seed) {
    if (code.encrypted)
        throw std::invalid_argument("sensitivity_curve: code is encrypted");
    if (trials < 1)
        throw std::invalid_argument("sensitivity_curve: trials must be positive");
    if (img.width != code.width || img.height != code.height)
        throw std::invalid_argument("sensitivity_curve: image does not match the code");
    if (kind == ParamKind::TreeBits && code.config.partition_mode != PartitionMode::Quadtree)
        throw std::invalid_argument("sensitivity_curve: tree bits require quadtree mode");

    const std::size_t population =
        kind == ParamKind::TreeBits ? code.tree_bits.size() : code.transforms.size();
    std::vector<std::uint32_t> levels = ks;
    levels.push_back(0);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::uint32_t k : levels)
        if (k > population)
            throw std::invalid_argument("sensitivity_curve: k exceeds the parameter count");

    const auto leaves = leaf_regions(code);
    const double clean_psnr = psnr(img, decode(code));

    SensitivityCurve curve;
    curve.kind = kind;
    curve.trials = trials;
    curve.seed = seed;
    curve.block_count = population;

    for (std::uint32_t k : levels) {
        if (k == 0) {
            curve.points.push_back({0, clean_psnr});
            continue;
        }
        double sum = 0.0;
        for (std::uint32_t trial = 0; trial < trials; ++trial) {
            const std::uint64_t sub =
                mix_seed(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(kind) + 1), k), trial);
            SplitMix64 rng(sub);
            FractalCode corrupted = code;
            const auto picks = sample_distinct(population, k, rng);
            if (kind == ParamKind::TreeBits) {
                for (std::size_t pos : picks)
                    corrupted.tree_bits[pos] = static_cast<std::uint8_t>(corrupted.tree_bits[pos] ? 0 : 1);
            } else {
                for (std::size_t pos : picks)
                    corrupt_block(corrupted, pos, kind, leaves[pos], rng);
            }
            sum += psnr(img, decode(corrupted));
        }
        curve.points.push_back({k, sum / trials});
    }
    return curve;
}

std::vector<PerceptualRow> perceptual_experiment(const GrayImage& img, const CodecConfig& cfg,
                                                 const CipherKey& key, InitVector iv,
                                                 int threads) {
    const FractalCode code = encode(img, cfg, threads);

    struct Case {
        const char* label;
        ParamSelection sel;
        bool tree;
    };
    const Case cases[] = {
        {"none", ParamSelection::None, false},
        {"alpha", ParamSelection::Alpha, false},
        {"dg", ParamSelection::Offset, false},
        {"dxy", ParamSelection::Position, false},
        {"alpha+dg", ParamSelection::AlphaOffset, false},
        {"alpha+dg+tree", ParamSelection::AlphaOffset, true},
    };

    std::vector<PerceptualRow> rows;
    for (const Case& c : cases) {
        PerceptualRow row;
        row.label = c.label;
        if (c.tree && cfg.partition_mode != PartitionMode::Quadtree) {
            row.skipped = true;
            rows.push_back(std::move(row));
            continue;
        }
        const int width = c.sel == ParamSelection::None ? 0 : detail::selection_width(cfg, c.sel);
        const std::uint16_t masked_iv =
            width == 0 ? 0
            : static_cast<std::uint16_t>(iv.value &
                                         (width >= 16 ? 0xFFFFu : ((1u << width) - 1)));
        const FractalCode garbled = c.sel == ParamSelection::None
                                        ? code
                                        : garble_selected(code, key, InitVector{masked_iv}, c.sel, c.tree);
        row.decoded = decode(garbled);
        row.psnr = psnr(img, row.decoded);
        rows.push_back(std::move(row));
    }
    return rows;
}

TimingReport timing_report(const GrayImage& img, const CodecConfig& cfg, const CipherKey& key,
                           int repetitions) {
    if (repetitions < 1)
        throw std::invalid_argument("timing_report: repetitions must be positive");
    const std::uint16_t iv_mask = static_cast<std::uint16_t>((1u << cfg.word_width()) - 1);
    const InitVector iv{static_cast<std::uint16_t>(0x1234 & iv_mask)};

    std::vector<double> te, td, tc, tp;
    for (int rep = 0; rep < repetitions; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        const FractalCode code = encode(img, cfg, /*threads=*/1);
        te.push_back(seconds_since(t0));

        t0 = std::chrono::steady_clock::now();
        const FractalCode enc = encrypt_params(code, key, iv);
        tc.push_back(seconds_since(t0));

        t0 = std::chrono::steady_clock::now();
        const FractalCode dec = decrypt_params(enc, key);
        tp.push_back(seconds_since(t0));

        t0 = std::chrono::steady_clock::now();
        const GrayImage out = decode(dec);
        td.push_back(seconds_since(t0));
        (void)out;
    }

    TimingReport r;
    r.t_encode = median(te);
    r.t_decode = median(td);
    r.t_encrypt = median(tc);
    r.t_decrypt = median(tp);
    r.etr = r.t_encode > 0 ? 100.0 * r.t_encrypt / r.t_encode : 0.0;
    r.dtr = r.t_decode > 0 ? 100.0 * r.t_decrypt / r.t_decode : 0.0;
    return r;
}

std::string format_psnr(double value) {
    if (std::isinf(value))
        return "inf";
    return fmt("%.4f", value);
}

std::string distribution_csv(const ParamDistribution& dist) {
    std::string out = "kind,value,count,paper_probability,relative_frequency\n";
    for (std::uint64_t j = 0; j < dist.space_size; ++j) {
        out += to_string(dist.kind);
        out += ',';
        out += std::to_string(j);
        out += ',';
        out += std::to_string(dist.counts[j]);
        out += ',';
        out += fmt("%.9g", dist.paper_probability[j]);
        out += ',';
        out += fmt("%.9g", dist.relative_frequency[j]);
        out += '\n';
    }
    return out;
}

std::string sensitivity_csv(const SensitivityCurve& curve) {
    std::string out = "kind,k,psnr_mean,trials,seed\n";
    for (const SensitivityPoint& p : curve.points) {
        out += to_string(curve.kind);
        out += ',';
        out += std::to_string(p.k);
        out += ',';
        out += format_psnr(p.psnr_mean);
        out += ',';
        out += std::to_string(curve.trials);
        out += ',';
        out += std::to_string(curve.seed);
        out += '\n';
    }
    return out;
}

std::string timing_csv_header() {
    return "image,size,t_encode_s,t_decode_s,t_encrypt_s,t_decrypt_s,etr_pct,dtr_pct\n";
}

std::string timing_csv_row(const std::string& image_name, int width, int height,
                           const TimingReport& r) {
    std::string out = image_name;
    out += ',';
    out += std::to_string(width) + "x" + std::to_string(height);
    out += ',';
    out += fmt("%.6f", r.t_encode);
    out += ',';
    out += fmt("%.6f", r.t_decode);
    out += ',';
    out += fmt("%.6f", r.t_encrypt);
    out += ',';
    out += fmt("%.6f", r.t_decrypt);
    out += ',';
    out += fmt("%.4f", r.etr);
    out += ',';
    out += fmt("%.4f", r.dtr);
    out += '\n';
    return out;
}

} // namespace frc
