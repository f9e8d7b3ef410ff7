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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace frc {

/// Fixed 25-byte header of the .frc container. Multi-byte integers are
/// big-endian; payload bits are packed MSB-first.
struct FrcHeader {
    static constexpr std::array<std::uint8_t, 4> kMagic{'F', 'R', 'C', '1'};
    static constexpr std::uint8_t kVersion = 1;
    static constexpr std::size_t kSize = 25;

    static constexpr std::uint8_t kFlagEncrypted = 0x01;
    static constexpr std::uint8_t kFlagQuadtree = 0x02;
    static constexpr std::uint8_t kFlagTreeEncrypted = 0x04;

    std::uint8_t version = kVersion;
    std::uint8_t flags = 0;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint8_t range_size = 0;
    std::uint8_t domain_step = 0;
    std::uint8_t bits_dx = 0;
    std::uint8_t bits_dy = 0;
    std::uint8_t bits_alpha = 0;
    std::uint8_t bits_dg = 0;
    std::uint8_t bits_iso = 3;
    std::uint8_t max_depth = 0;
    std::uint8_t iterations_hint = 0;
    std::uint16_t iv = 0;
    std::uint32_t payload_bit_count = 0;

    std::array<std::uint8_t, kSize> to_bytes() const;
    static FrcHeader from_bytes(std::span<const std::uint8_t> bytes);
};

/// round-half-away-from-zero(alpha * 2^bits), clamped to [0, 2^bits - 1].
/// The clamp keeps the dequantized value strictly below 1.
std::uint32_t quantize_alpha(double alpha, int bits);
double dequantize_alpha(std::uint32_t index, int bits);

struct QuantizedDg {
    std::uint8_t sign = 0;
    std::uint32_t mag = 0;
};

/// Sign-magnitude offset quantizer: round-half-away-from-zero magnitude,
/// clamped to [0, 2^bits_mag - 1].
QuantizedDg quantize_dg(double dg, int bits_mag);
double dequantize_dg(QuantizedDg q);

/// MSB-first bit packing.
class BitWriter {
public:
    void put(std::uint32_t value, int bits);
    std::size_t bit_count() const { return bits_; }
    std::vector<std::uint8_t> take(); // zero-pads the final byte

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
    std::uint32_t get(int bits); // throws ParseError past the end
    std::size_t bit_pos() const { return pos_; }
    std::size_t bit_size() const { return bytes_.size() * 8; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/// Serializes a code to the .frc byte image: header, tree bits, then per
/// leaf the fields dx, dy, alpha_q, dg_sign, dg_mag, iso. Encrypting the
/// parameters never changes the byte length.
std::vector<std::uint8_t> pack(const FractalCode& code);

/// Exact inverse of pack. Distinct ParseErrors for bad magic, unsupported
/// version, truncation and bit-count mismatches.
FractalCode unpack(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(std::span<const std::uint8_t> bytes, const std::string& path);

} // namespace frc
