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

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace frc {

/// 128-bit key, written as 32 hex characters. Spaces between hex groups
/// are accepted and stripped.
struct CipherKey {
    std::array<std::uint8_t, 16> bytes{};

    static CipherKey from_hex(std::string_view hex);
    std::string to_hex() const;
    bool operator==(const CipherKey&) const = default;
};

/// Chain start value. Must be below 2^w for the selected word width w
/// (15 bits with the default 6+1+8 parameter layout). Stored in the
/// header in the clear.
struct InitVector {
    std::uint16_t value = 0;
};

/// Raw RC4: key scheduling plus the first n output bytes. Accepts any
/// key length from 1 to 256 bytes; CipherKey fixes 16 for the API.
/// Plain RC4, no drop-N — its early-byte biases are a known caveat.
std::vector<std::uint8_t> rc4_keystream(std::span<const std::uint8_t> key, std::size_t n);

std::vector<std::uint8_t> keystream(const CipherKey& key, std::size_t n);

/// Which per-block fields feed the cipher chain. AlphaOffset is the real
/// scheme; the other selections exist for the perceptual comparison and
/// produce garbled codes that are not meant to be decrypted.
enum class ParamSelection : std::uint8_t {
    None = 0,
    Alpha = 1,
    Offset = 2,
    AlphaOffset = 3,
    Position = 4,
};

/// Enciphers the multiplexed alpha/offset words with the chained mode:
/// X'_0 = (X_0 xor IV) xor ks_0, X'_{i+1} = (X_{i+1} xor X'_i) xor ks_{i+1}.
/// Domain positions and isometries stay in the clear. With encrypt_tree,
/// quadtree split flags are padded to full length and XORed with the
/// keystream bits that follow the parameter words.
FractalCode encrypt_params(const FractalCode& code, const CipherKey& key, InitVector iv,
                           bool encrypt_tree = false);

/// Inverse of encrypt_params with the same key. A wrong key yields a
/// structurally valid but garbled code; there is no integrity check.
FractalCode decrypt_params(const FractalCode& code, const CipherKey& key);

/// One-way garbling of an arbitrary field selection, for the perceptual
/// security experiment. Position words are reduced into the valid domain
/// pool after enciphering, so the result always decodes.
FractalCode garble_selected(const FractalCode& code, const CipherKey& key, InitVector iv,
                            ParamSelection selection, bool include_tree = false);

/// Exponent e with brute-force space 2^e for guessing all encrypted
/// parameters: n_blocks * (bits_alpha + bits_dg_total), the offset width
/// counted including its sign bit.
std::uint64_t brute_force_exponent(std::uint64_t n_blocks, std::uint64_t bits_alpha,
                                   std::uint64_t bits_dg_total);

namespace detail {

/// The chained mode over raw words with a caller-supplied keystream.
/// Test hook: unit tests drive it with a null keystream to check the
/// chain algebra in isolation. Not reachable from the CLI.
void chain_encrypt(std::span<std::uint16_t> words, std::uint16_t iv,
                   std::span<const std::uint16_t> ks_words, std::uint16_t mask);
void chain_decrypt(std::span<std::uint16_t> words, std::uint16_t iv,
                   std::span<const std::uint16_t> ks_words, std::uint16_t mask);

int selection_width(const CodecConfig& cfg, ParamSelection sel);
std::vector<std::uint16_t> extract_words(const FractalCode& code, ParamSelection sel);
void write_words(FractalCode& code, std::span<const std::uint16_t> words, ParamSelection sel);

} // namespace detail

} // namespace frc
