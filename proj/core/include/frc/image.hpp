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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace frc {

/// 8-bit single-channel raster, row-major. The only pixel type the
/// codec works on.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // size == width * height

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const std::uint8_t* row(int y) const { return pixels.data() + static_cast<std::size_t>(y) * width; }
    std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width; }

    bool operator==(const GrayImage&) const = default;
};

/// Parses a binary PGM (P5, maxval 255). '#' comments are allowed in the
/// header whitespace after the magic. Throws ParseError with the byte
/// offset of the offending data.
GrayImage load_pgm(std::span<const std::uint8_t> bytes);

/// Canonical serialization: "P5\n<w> <h>\n255\n" followed by the raw
/// pixel payload. load_pgm(save_pgm(img)) == img.
std::vector<std::uint8_t> save_pgm(const GrayImage& img);

GrayImage load_pgm_file(const std::string& path);
void save_pgm_file(const GrayImage& img, const std::string& path);

/// Mean squared error over all pixels. Throws std::invalid_argument on a
/// dimension mismatch. Accumulated in 64-bit integers, so it is exact.
double mse(const GrayImage& a, const GrayImage& b);

/// 10*log10(255^2 / MSE), in dB. Identical images yield +infinity; CSV
/// writers serialize that as "inf".
double psnr(const GrayImage& a, const GrayImage& b);

} // namespace frc
