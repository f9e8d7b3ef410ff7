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

#include "frc/codec.hpp"
#include "frc/crypt.hpp"
#include "frc/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace frc {

enum class ParamKind : std::uint8_t {
    DomainPosition,
    Alpha,
    LuminanceOffset,
    Isometry,
    TreeBits,
};

std::string to_string(ParamKind kind);

/// Value histogram of one parameter across all blocks. paper_probability
/// divides by the parameter space size S(a) and therefore does not sum
/// to 1; relative_frequency divides by the block count and does.
struct ParamDistribution {
    ParamKind kind = ParamKind::Alpha;
    std::uint64_t space_size = 0;
    std::uint64_t total = 0; // number of counted values (blocks, or tree bits)
    std::vector<std::uint64_t> counts;
    std::vector<double> paper_probability;
    std::vector<double> relative_frequency;
};

/// Counts each parameter value across the code's blocks. Domain positions
/// count as the combined index dy * 2^bits_dx + dx. TreeBits requires a
/// quadtree code.
ParamDistribution param_distribution(const FractalCode& code, ParamKind kind);

struct SensitivityPoint {
    std::uint32_t k = 0; // corrupted-parameter count
    double psnr_mean = 0.0;
};

struct SensitivityCurve {
    ParamKind kind = ParamKind::Alpha;
    std::vector<SensitivityPoint> points; // sorted by k, k=0 always present
    std::uint32_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t block_count = 0;
};

/// Quality degradation per corrupted-parameter count: for each k and
/// trial, corrupt k distinct blocks (uniform replacement from the
/// parameter's value space, excluding the original), decode, and average
/// the PSNR against the original image. Fully reproducible from the seed.
SensitivityCurve sensitivity_curve(const GrayImage& img, const FractalCode& code, ParamKind kind,
                                   const std::vector<std::uint32_t>& ks, std::uint32_t trials,
                                   std::uint64_t seed);

struct PerceptualRow {
    std::string label;
    bool skipped = false;
    double psnr = 0.0;
    GrayImage decoded;
};

/// Encodes the image, then for each parameter set (none, alpha, offset,
/// position, alpha+offset, alpha+offset+tree) enciphers that set and
/// decodes without decrypting, reporting PSNR against the original.
std::vector<PerceptualRow> perceptual_experiment(const GrayImage& img, const CodecConfig& cfg,
                                                 const CipherKey& key,
                                                 InitVector iv = InitVector{0x1A2B},
                                                 int threads = 0);

struct TimingReport {
    double t_encode = 0.0;
    double t_decode = 0.0;
    double t_encrypt = 0.0;
    double t_decrypt = 0.0;
    double etr = 0.0; // 100 * t_encrypt / t_encode
    double dtr = 0.0; // 100 * t_decrypt / t_decode
};

/// Wall-clock medians over `repetitions` single-threaded runs of the
/// four pipeline stages, and the two time ratios.
TimingReport timing_report(const GrayImage& img, const CodecConfig& cfg, const CipherKey& key,
                           int repetitions);

std::string distribution_csv(const ParamDistribution& dist);
std::string sensitivity_csv(const SensitivityCurve& curve);
std::string timing_csv_header();
std::string timing_csv_row(const std::string& image_name, int width, int height,
                           const TimingReport& report);
std::string format_psnr(double value); // "inf" for the infinity sentinel

} // namespace frc
