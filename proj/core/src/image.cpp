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

#include "frc/image.hpp"

#include "frc/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace frc {

namespace {

constexpr std::int64_t kMaxPixels = std::int64_t{1} << 28;

bool is_pgm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

[[noreturn]] void fail(const char* what, std::size_t offset) {
    throw ParseError(std::string("pgm: ") + what + " at byte " + std::to_string(offset));
}

// Skips whitespace and '#' comment lines, then reads one decimal token.
int read_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
    for (;;) {
        while (pos < bytes.size() && is_pgm_space(bytes[pos]))
            ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n')
                ++pos;
            continue;
        }
        break;
    }
    if (pos >= bytes.size())
        fail((std::string("missing ") + field + " field").c_str(), pos);
    if (bytes[pos] < '0' || bytes[pos] > '9')
        fail((std::string("malformed ") + field + " field").c_str(), pos);
    std::int64_t value = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
        value = value * 10 + (bytes[pos] - '0');
        if (value > std::numeric_limits<int>::max())
            fail((std::string(field) + " field out of range").c_str(), pos);
        ++pos;
    }
    return static_cast<int>(value);
}

} // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0)
        throw std::invalid_argument("image dimensions must be positive");
}

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        fail("bad magic, expected \"P5\"", 0);
    std::size_t pos = 2;

    const int width = read_header_int(bytes, pos, "width");
    const int height = read_header_int(bytes, pos, "height");
    const std::size_t maxval_pos = pos;
    const int maxval = read_header_int(bytes, pos, "maxval");
    if (width <= 0 || height <= 0)
        fail("non-positive dimensions", maxval_pos);
    if (static_cast<std::int64_t>(width) * height > kMaxPixels)
        fail("image too large", maxval_pos);
    if (maxval != 255)
        fail("unsupported maxval, expected 255", maxval_pos);
    if (pos >= bytes.size() || !is_pgm_space(bytes[pos]))
        fail("missing whitespace before payload", pos);
    ++pos; // exactly one whitespace byte separates header and payload

    const std::size_t need = static_cast<std::size_t>(width) * height;
    if (bytes.size() - pos < need)
        fail("truncated pixel payload", bytes.size());

    GrayImage img(width, height);
    std::copy_n(bytes.data() + pos, need, img.pixels.data());
    return img;
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img) {
    char header[48];
    const int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(n) + img.pixels.size());
    out.insert(out.end(), header, header + n);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage load_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_pgm(bytes);
}

void save_pgm_file(const GrayImage& img, const std::string& path) {
    const auto bytes = save_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ParseError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ParseError("write failed: " + path);
}

double mse(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("mse: dimension mismatch");
    std::int64_t sum = 0;
    const std::size_t n = a.pixels.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]);
        sum += static_cast<std::int64_t>(d) * d;
    }
    return static_cast<double>(sum) / static_cast<double>(n);
}

double psnr(const GrayImage& a, const GrayImage& b) {
    const double e = mse(a, b);
    if (e == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

} // namespace frc
