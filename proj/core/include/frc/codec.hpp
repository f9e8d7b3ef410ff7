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

#pragma once

#include "frc/image.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace frc {

enum class PartitionMode : std::uint8_t { FixedGrid, Quadtree };

/// Block geometry, bit budget and decode settings. Defaults follow the
/// conventional 32-bit-per-block assignment: D_xy 7+7, alpha 6, offset 8+1,
/// isometry 3.
struct CodecConfig {
    int range_size = 4;  // B, pixels per side of a range block
    int domain_step = 4; // pixels between domain block origins
    int bits_dx = 7;
    int bits_dy = 7;
    int bits_alpha = 6;
    int bits_dg = 8; // offset magnitude; the sign bit is extra
    PartitionMode partition_mode = PartitionMode::FixedGrid;
    int max_depth = 2;             // quadtree only
    double split_threshold = 64.0; // quadtree only, best-match MSE
    int iterations = 10;

    static CodecConfig defaults() { return {}; }

    /// 2x2 range blocks on 256x256 images: 128x128 ranges against a
    /// 127x127 domain pool.
    static CodecConfig paper_2x2();

    /// 64x64 range blocks on 256x256 images with the small bit budget
    /// used by the sensitivity study: alpha 5, offset 1+6, D_xy 5+5.
    static CodecConfig paper_fig2();

    int bits_per_block() const { return bits_dx + bits_dy + bits_alpha + 1 + bits_dg + 3; }
    int word_width() const { return bits_alpha + 1 + bits_dg; }

    /// Throws std::invalid_argument unless the config is usable for the
    /// given image dimensions (divisibility, pool fit, bit widths).
    void validate(int width, int height) const;

    bool operator==(const CodecConfig&) const = default;
};

/// One of the eight square-block symmetries, 3-bit code:
///   0 identity                 4 second-diagonal flip
///   1 horizontal-axis flip     5 rotate 90 cw
///   2 vertical-axis flip       6 rotate 180
///   3 first-diagonal flip      7 rotate 90 ccw
struct Isometry {
    std::uint8_t code = 0;
    bool operator==(const Isometry&) const = default;
};

/// Code of the isometry that undoes `code`.
std::uint8_t inverse_isometry(std::uint8_t code);

/// Quantized parameters of one range block's contractive map.
struct BlockTransform {
    std::uint16_t dx = 0; // domain-block index, horizontal
    std::uint16_t dy = 0; // domain-block index, vertical
    std::uint16_t alpha_q = 0;
    std::uint8_t dg_sign = 0;
    std::uint16_t dg_mag = 0;
    Isometry iso;

    bool operator==(const BlockTransform&) const = default;
};

/// The complete compressed representation of one image.
struct FractalCode {
    int width = 0;
    int height = 0;
    CodecConfig config;
    std::vector<std::uint8_t> tree_bits;      // quadtree split flags, 0/1 per entry
    std::vector<BlockTransform> transforms;   // one per leaf, partition order
    bool encrypted = false;                   // alpha/offset words enciphered
    bool tree_encrypted = false;              // split flags enciphered too
    std::uint16_t iv = 0;                     // chain start, meaningful when encrypted

    bool operator==(const FractalCode&) const = default;
};

struct Region {
    int x = 0;
    int y = 0;
    int side = 0;
    bool operator==(const Region&) const = default;
};

struct PartitionResult {
    std::vector<Region> leaves;
    std::vector<std::uint8_t> tree_bits;
};

/// Raw least-squares fit of range against a downsampled domain block,
/// before quantization. alpha is already clamped into [0,1].
struct AffineFit {
    double alpha = 0.0;
    double dg = 0.0;
    double err = 0.0; // MSE of the clamped fit
};

struct MatchResult {
    BlockTransform transform;
    double err = 0.0; // MSE after quantizing alpha and the offset
};

/// Range-block layout for an image. FixedGrid: raster B x B blocks.
/// Quadtree: depth-first subdivision, a node splits when its best-match
/// MSE exceeds cfg.split_threshold (one flag bit per decision node).
PartitionResult partition(const GrayImage& img, const CodecConfig& cfg);

/// Domain-block origins for range side cfg.range_size, raster order.
std::vector<Region> domain_pool(const GrayImage& img, const CodecConfig& cfg);

/// Domain positions per axis for a given range-block side: one origin
/// every `domain_step` pixels wherever a 2*side block fits.
struct PoolDims {
    int count_x = 0;
    int count_y = 0;
};
PoolDims pool_dims(int width, int height, int range_side, int domain_step);

/// 2:1 reduction, each output sample the mean of a 2x2 input group.
std::vector<double> downsample(const std::vector<double>& block, int side);

/// Applies the Table-style symmetry to a side x side block.
template <typename T>
std::vector<T> apply_isometry(const std::vector<T>& block, int side, Isometry iso);

extern template std::vector<double> apply_isometry<double>(const std::vector<double>&, int, Isometry);
extern template std::vector<std::uint8_t> apply_isometry<std::uint8_t>(const std::vector<std::uint8_t>&, int, Isometry);
extern template std::vector<int> apply_isometry<int>(const std::vector<int>&, int, Isometry);

/// Least-squares R ~ alpha * D + dg with alpha clamped into [0,1];
/// zero-variance domains fit alpha = 0, dg = mean(R).
AffineFit fit_affine(const std::vector<double>& range, const std::vector<double>& domain_ds);

/// Exhaustive search over all domain positions and isometries, scoring
/// each candidate by its MSE after quantization. Ties break toward the
/// smallest (dy, dx, iso). All scoring runs in exact integer arithmetic.
MatchResult match_block(const GrayImage& img, Region range, const CodecConfig& cfg);

/// Full encode: partition, match every leaf, store quantized transforms.
/// Deterministic, and bit-identical for any thread count.
FractalCode encode(const GrayImage& img, const CodecConfig& cfg, int threads = 0);

/// Iterated decode starting from `initial` (mid-gray when absent).
/// Each pass rebuilds every leaf from the previous pass's snapshot.
GrayImage decode(const FractalCode& code, const std::optional<GrayImage>& initial = std::nullopt);

/// Like decode, but returns the image after every iteration (1-based).
std::vector<GrayImage> decode_trace(const FractalCode& code,
                                    const std::optional<GrayImage>& initial = std::nullopt);

/// Leaf regions implied by the code's partition mode and tree bits.
/// Exhausted tree bits read as "no split", so garbled trees still yield
/// a valid layout.
std::vector<Region> leaf_regions(const FractalCode& code);

/// Number of split-flag bits a fully split quadtree would carry; packed
/// codes with enciphered trees are padded to this length.
std::size_t max_tree_bits(int width, int height, const CodecConfig& cfg);

} // namespace frc
