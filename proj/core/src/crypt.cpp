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

#include "frc/crypt.hpp"

#include "frc/error.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace frc {

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

// 2 keystream bytes per word, big-endian, masked to the word width.
std::vector<std::uint16_t> keystream_words(const CipherKey& key, std::size_t count,
                                           std::uint16_t mask,
                                           std::vector<std::uint8_t>* tail_bytes,
                                           std::size_t tail_byte_count) {
    const auto bytes = keystream(key, 2 * count + tail_byte_count);
    std::vector<std::uint16_t> words(count);
    for (std::size_t i = 0; i < count; ++i)
        words[i] = static_cast<std::uint16_t>(((bytes[2 * i] << 8) | bytes[2 * i + 1]) & mask);
    if (tail_bytes)
        tail_bytes->assign(bytes.begin() + static_cast<std::ptrdiff_t>(2 * count), bytes.end());
    return words;
}

void xor_tree_bits(std::vector<std::uint8_t>& bits, std::span<const std::uint8_t> ks_bytes) {
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const std::uint8_t ks_bit = (ks_bytes[i >> 3] >> (7 - (i & 7))) & 1u;
        bits[i] = static_cast<std::uint8_t>((bits[i] ^ ks_bit) & 1u);
    }
}

// Length of the split-flag prefix an encoder would actually emit for
// this tree; everything past it is padding.
std::size_t consumed_tree_bits(const FractalCode& code) {
    const CodecConfig& cfg = code.config;
    std::size_t cursor = 0;
    std::function<void(int)> walk = [&](int depth) {
        if (depth >= cfg.max_depth)
            return;
        const std::uint8_t bit = cursor < code.tree_bits.size() ? code.tree_bits[cursor] : 0;
        ++cursor;
        if (bit)
            for (int child = 0; child < 4; ++child)
                walk(depth + 1);
    };
    const int top = cfg.range_size << cfg.max_depth;
    const std::size_t tops = static_cast<std::size_t>(code.width / top) * (code.height / top);
    for (std::size_t i = 0; i < tops; ++i)
        walk(0);
    return std::min(cursor, code.tree_bits.size());
}

} // namespace

CipherKey CipherKey::from_hex(std::string_view hex) {
    std::string compact;
    compact.reserve(32);
    for (char c : hex) {
        if (c == ' ' || c == '\t')
            continue;
        compact.push_back(c);
    }
    if (compact.size() != 32)
        throw CryptoError("key must be 32 hex characters (128 bits), got " +
                          std::to_string(compact.size()));
    CipherKey key;
    for (std::size_t i = 0; i < 16; ++i) {
        const int hi = hex_nibble(compact[2 * i]);
        const int lo = hex_nibble(compact[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw CryptoError("key contains a non-hex character");
        key.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return key;
}

std::string CipherKey::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::vector<std::uint8_t> rc4_keystream(std::span<const std::uint8_t> key, std::size_t n) {
    if (key.empty() || key.size() > 256)
        throw CryptoError("rc4: key length must be in [1,256] bytes");
    std::array<std::uint8_t, 256> s;
    for (int i = 0; i < 256; ++i)
        s[i] = static_cast<std::uint8_t>(i);
    std::uint8_t j = 0;
    for (int i = 0; i < 256; ++i) {
        j = static_cast<std::uint8_t>(j + s[i] + key[static_cast<std::size_t>(i) % key.size()]);
        std::swap(s[i], s[j]);
    }
    std::vector<std::uint8_t> out(n);
    std::uint8_t i = 0;
    j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        i = static_cast<std::uint8_t>(i + 1);
        j = static_cast<std::uint8_t>(j + s[i]);
        std::swap(s[i], s[j]);
        out[k] = s[static_cast<std::uint8_t>(s[i] + s[j])];
    }
    return out;
}

std::vector<std::uint8_t> keystream(const CipherKey& key, std::size_t n) {
    return rc4_keystream(key.bytes, n);
}

namespace detail {

void chain_encrypt(std::span<std::uint16_t> words, std::uint16_t iv,
                   std::span<const std::uint16_t> ks_words, std::uint16_t mask) {
    std::uint16_t prev = iv;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint16_t x = static_cast<std::uint16_t>((words[i] ^ prev) ^ ks_words[i]) & mask;
        words[i] = x;
        prev = x;
    }
}

void chain_decrypt(std::span<std::uint16_t> words, std::uint16_t iv,
                   std::span<const std::uint16_t> ks_words, std::uint16_t mask) {
    std::uint16_t prev = iv;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint16_t cipher = words[i];
        words[i] = static_cast<std::uint16_t>((cipher ^ ks_words[i]) ^ prev) & mask;
        prev = cipher;
    }
}

int selection_width(const CodecConfig& cfg, ParamSelection sel) {
    switch (sel) {
    case ParamSelection::Alpha: return cfg.bits_alpha;
    case ParamSelection::Offset: return 1 + cfg.bits_dg;
    case ParamSelection::AlphaOffset: return cfg.word_width();
    case ParamSelection::Position: return cfg.bits_dx + cfg.bits_dy;
    case ParamSelection::None: break;
    }
    throw std::invalid_argument("selection_width: empty selection");
}

std::vector<std::uint16_t> extract_words(const FractalCode& code, ParamSelection sel) {
    const CodecConfig& cfg = code.config;
    std::vector<std::uint16_t> words;
    words.reserve(code.transforms.size());
    for (const BlockTransform& t : code.transforms) {
        std::uint16_t w = 0;
        switch (sel) {
        case ParamSelection::Alpha:
            w = t.alpha_q;
            break;
        case ParamSelection::Offset:
            w = static_cast<std::uint16_t>((t.dg_sign << cfg.bits_dg) | t.dg_mag);
            break;
        case ParamSelection::AlphaOffset:
            w = static_cast<std::uint16_t>((t.alpha_q << (1 + cfg.bits_dg)) |
                                           (t.dg_sign << cfg.bits_dg) | t.dg_mag);
            break;
        case ParamSelection::Position:
            w = static_cast<std::uint16_t>((t.dy << cfg.bits_dx) | t.dx);
            break;
        case ParamSelection::None:
            throw std::invalid_argument("extract_words: empty selection");
        }
        words.push_back(w);
    }
    return words;
}

void write_words(FractalCode& code, std::span<const std::uint16_t> words, ParamSelection sel) {
    const CodecConfig& cfg = code.config;
    const std::uint16_t mag_mask = static_cast<std::uint16_t>((1u << cfg.bits_dg) - 1);
    for (std::size_t i = 0; i < code.transforms.size(); ++i) {
        BlockTransform& t = code.transforms[i];
        const std::uint16_t w = words[i];
        switch (sel) {
        case ParamSelection::Alpha:
            t.alpha_q = w;
            break;
        case ParamSelection::Offset:
            t.dg_sign = static_cast<std::uint8_t>((w >> cfg.bits_dg) & 1u);
            t.dg_mag = static_cast<std::uint16_t>(w & mag_mask);
            break;
        case ParamSelection::AlphaOffset:
            t.alpha_q = static_cast<std::uint16_t>(w >> (1 + cfg.bits_dg));
            t.dg_sign = static_cast<std::uint8_t>((w >> cfg.bits_dg) & 1u);
            t.dg_mag = static_cast<std::uint16_t>(w & mag_mask);
            break;
        case ParamSelection::Position:
            t.dx = static_cast<std::uint16_t>(w & ((1u << cfg.bits_dx) - 1));
            t.dy = static_cast<std::uint16_t>(w >> cfg.bits_dx);
            break;
        case ParamSelection::None:
            throw std::invalid_argument("write_words: empty selection");
        }
    }
}

} // namespace detail

namespace {

void check_iv(InitVector iv, int width) {
    if (width < 16 && (iv.value >> width) != 0)
        throw CryptoError("initial vector exceeds the " + std::to_string(width) +
                          "-bit parameter word width");
}

FractalCode apply_chain(const FractalCode& code, const CipherKey& key, InitVector iv,
                        ParamSelection sel, bool include_tree, bool garble_only) {
    const CodecConfig& cfg = code.config;
    const int width = detail::selection_width(cfg, sel);
    check_iv(iv, width);
    const std::uint16_t mask = width >= 16 ? 0xFFFF : static_cast<std::uint16_t>((1u << width) - 1);

    if (include_tree && cfg.partition_mode != PartitionMode::Quadtree)
        throw CryptoError("tree encryption requires quadtree mode");

    FractalCode out = code;
    auto words = detail::extract_words(out, sel);

    const std::size_t tree_len = include_tree ? max_tree_bits(out.width, out.height, cfg) : 0;
    std::vector<std::uint8_t> tail;
    const auto ks = keystream_words(key, words.size(), mask, include_tree ? &tail : nullptr,
                                    (tree_len + 7) / 8);
    detail::chain_encrypt(words, iv.value, ks, mask);
    detail::write_words(out, words, sel);

    if (sel == ParamSelection::Position) {
        // keep garbled positions inside the pool so the code still decodes
        const auto leaves = leaf_regions(out);
        for (std::size_t i = 0; i < out.transforms.size() && i < leaves.size(); ++i) {
            const PoolDims pd = pool_dims(out.width, out.height, leaves[i].side, cfg.domain_step);
            out.transforms[i].dx = static_cast<std::uint16_t>(out.transforms[i].dx % pd.count_x);
            out.transforms[i].dy = static_cast<std::uint16_t>(out.transforms[i].dy % pd.count_y);
        }
    }

    if (include_tree) {
        out.tree_bits.resize(tree_len, 0);
        xor_tree_bits(out.tree_bits, tail);
    }

    if (!garble_only && sel == ParamSelection::AlphaOffset) {
        out.encrypted = true;
        out.tree_encrypted = include_tree;
        out.iv = iv.value;
    }
    return out;
}

} // namespace

FractalCode encrypt_params(const FractalCode& code, const CipherKey& key, InitVector iv,
                           bool encrypt_tree) {
    if (code.encrypted)
        throw CryptoError("encrypt: code is already encrypted");
    return apply_chain(code, key, iv, ParamSelection::AlphaOffset, encrypt_tree,
                       /*garble_only=*/false);
}

FractalCode decrypt_params(const FractalCode& code, const CipherKey& key) {
    if (!code.encrypted)
        throw CryptoError("decrypt: code is not encrypted");
    const CodecConfig& cfg = code.config;
    const int width = cfg.word_width();
    const std::uint16_t mask = static_cast<std::uint16_t>((1u << width) - 1);

    FractalCode out = code;
    auto words = detail::extract_words(out, ParamSelection::AlphaOffset);
    std::vector<std::uint8_t> tail;
    const std::size_t tree_len = out.tree_encrypted ? out.tree_bits.size() : 0;
    const auto ks = keystream_words(key, words.size(), mask, out.tree_encrypted ? &tail : nullptr,
                                    (tree_len + 7) / 8);
    detail::chain_decrypt(words, out.iv, ks, mask);
    detail::write_words(out, words, ParamSelection::AlphaOffset);

    if (out.tree_encrypted) {
        xor_tree_bits(out.tree_bits, tail);
        out.tree_bits.resize(consumed_tree_bits(out));
        out.tree_encrypted = false;
    }
    out.encrypted = false;
    out.iv = 0;
    return out;
}

FractalCode garble_selected(const FractalCode& code, const CipherKey& key, InitVector iv,
                            ParamSelection selection, bool include_tree) {
    if (selection == ParamSelection::None && !include_tree)
        return code;
    if (selection == ParamSelection::None)
        throw std::invalid_argument("garble_selected: tree-only garbling is not supported");
    return apply_chain(code, key, iv, selection, include_tree, /*garble_only=*/true);
}

std::uint64_t brute_force_exponent(std::uint64_t n_blocks, std::uint64_t bits_alpha,
                                   std::uint64_t bits_dg_total) {
    return n_blocks * (bits_alpha + bits_dg_total);
}

} // namespace frc
