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

#include "frc/bitstream.hpp"

#include "frc/error.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace frc {

namespace {

void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

} // namespace

std::array<std::uint8_t, FrcHeader::kSize> FrcHeader::to_bytes() const {
    std::array<std::uint8_t, kSize> out{};
    std::copy(kMagic.begin(), kMagic.end(), out.begin());
    out[4] = version;
    out[5] = flags;
    put_u16(&out[6], width);
    put_u16(&out[8], height);
    out[10] = range_size;
    out[11] = domain_step;
    out[12] = bits_dx;
    out[13] = bits_dy;
    out[14] = bits_alpha;
    out[15] = bits_dg;
    out[16] = bits_iso;
    out[17] = max_depth;
    out[18] = iterations_hint;
    put_u16(&out[19], iv);
    put_u32(&out[21], payload_bit_count);
    return out;
}

FrcHeader FrcHeader::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kSize)
        throw ParseError("frc: truncated header, need 25 bytes");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw ParseError("frc: bad magic, expected \"FRC1\"");
    FrcHeader h;
    h.version = bytes[4];
    if (h.version != kVersion)
        throw ParseError("frc: unsupported version " + std::to_string(h.version));
    h.flags = bytes[5];
    h.width = get_u16(&bytes[6]);
    h.height = get_u16(&bytes[8]);
    h.range_size = bytes[10];
    h.domain_step = bytes[11];
    h.bits_dx = bytes[12];
    h.bits_dy = bytes[13];
    h.bits_alpha = bytes[14];
    h.bits_dg = bytes[15];
    h.bits_iso = bytes[16];
    h.max_depth = bytes[17];
    h.iterations_hint = bytes[18];
    h.iv = get_u16(&bytes[19]);
    h.payload_bit_count = get_u32(&bytes[21]);
    return h;
}

std::uint32_t quantize_alpha(double alpha, int bits) {
    const double levels = std::exp2(bits);
    const double scaled = std::floor(alpha * levels + 0.5);
    if (scaled <= 0.0)
        return 0;
    const std::uint32_t max = (std::uint32_t{1} << bits) - 1;
    return scaled >= static_cast<double>(max) ? max : static_cast<std::uint32_t>(scaled);
}

double dequantize_alpha(std::uint32_t index, int bits) {
    return static_cast<double>(index) / std::exp2(bits);
}

QuantizedDg quantize_dg(double dg, int bits_mag) {
    QuantizedDg q;
    q.sign = dg < 0.0 ? 1 : 0;
    const double scaled = std::floor(std::abs(dg) + 0.5);
    const std::uint32_t max = (std::uint32_t{1} << bits_mag) - 1;
    q.mag = scaled >= static_cast<double>(max) ? max : static_cast<std::uint32_t>(scaled);
    return q;
}

double dequantize_dg(QuantizedDg q) {
    return q.sign ? -static_cast<double>(q.mag) : static_cast<double>(q.mag);
}

void BitWriter::put(std::uint32_t value, int bits) {
    if (bits < 0 || bits > 32)
        throw std::invalid_argument("BitWriter: bits out of range");
    if (bits < 32 && (value >> bits) != 0)
        throw std::invalid_argument("BitWriter: value exceeds declared bit width");
    for (int i = bits - 1; i >= 0; --i) {
        if (bits_ % 8 == 0)
            bytes_.push_back(0);
        if ((value >> i) & 1u)
            bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
        ++bits_;
    }
}

std::vector<std::uint8_t> BitWriter::take() {
    return std::move(bytes_);
}

std::uint32_t BitReader::get(int bits) {
    if (bits < 0 || bits > 32)
        throw std::invalid_argument("BitReader: bits out of range");
    if (pos_ + static_cast<std::size_t>(bits) > bit_size())
        throw ParseError("frc: truncated payload while reading bits");
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i) {
        const std::uint8_t byte = bytes_[pos_ >> 3];
        v = (v << 1) | ((byte >> (7 - (pos_ & 7))) & 1u);
        ++pos_;
    }
    return v;
}

namespace {

FrcHeader header_for(const FractalCode& code) {
    FrcHeader h;
    h.flags = 0;
    if (code.encrypted)
        h.flags |= FrcHeader::kFlagEncrypted;
    if (code.config.partition_mode == PartitionMode::Quadtree)
        h.flags |= FrcHeader::kFlagQuadtree;
    if (code.tree_encrypted)
        h.flags |= FrcHeader::kFlagTreeEncrypted;
    h.width = static_cast<std::uint16_t>(code.width);
    h.height = static_cast<std::uint16_t>(code.height);
    h.range_size = static_cast<std::uint8_t>(code.config.range_size);
    h.domain_step = static_cast<std::uint8_t>(code.config.domain_step);
    h.bits_dx = static_cast<std::uint8_t>(code.config.bits_dx);
    h.bits_dy = static_cast<std::uint8_t>(code.config.bits_dy);
    h.bits_alpha = static_cast<std::uint8_t>(code.config.bits_alpha);
    h.bits_dg = static_cast<std::uint8_t>(code.config.bits_dg);
    h.bits_iso = 3;
    h.max_depth = code.config.partition_mode == PartitionMode::Quadtree
                      ? static_cast<std::uint8_t>(code.config.max_depth)
                      : 0;
    h.iterations_hint = static_cast<std::uint8_t>(code.config.iterations);
    h.iv = code.iv;
    return h;
}

} // namespace

std::vector<std::uint8_t> pack(const FractalCode& code) {
    const CodecConfig& cfg = code.config;
    cfg.validate(code.width, code.height);
    if (code.tree_encrypted && code.tree_bits.size() != max_tree_bits(code.width, code.height, cfg))
        throw std::invalid_argument("pack: enciphered tree bits must be padded to full length");
    if (cfg.partition_mode == PartitionMode::FixedGrid && !code.tree_bits.empty())
        throw std::invalid_argument("pack: fixed-grid codes carry no tree bits");

    BitWriter w;
    for (std::uint8_t bit : code.tree_bits)
        w.put(bit ? 1u : 0u, 1);
    for (const BlockTransform& t : code.transforms) {
        if (t.dx >= (1u << cfg.bits_dx) || t.dy >= (1u << cfg.bits_dy) ||
            t.alpha_q >= (1u << cfg.bits_alpha) || t.dg_mag >= (1u << cfg.bits_dg) ||
            t.dg_sign > 1 || t.iso.code >= 8)
            throw std::invalid_argument("pack: transform field exceeds its declared bit width");
        w.put(t.dx, cfg.bits_dx);
        w.put(t.dy, cfg.bits_dy);
        w.put(t.alpha_q, cfg.bits_alpha);
        w.put(t.dg_sign, 1);
        w.put(t.dg_mag, cfg.bits_dg);
        w.put(t.iso.code, 3);
    }

    FrcHeader h = header_for(code);
    h.payload_bit_count = static_cast<std::uint32_t>(w.bit_count());

    const auto head = h.to_bytes();
    auto payload = w.take();
    std::vector<std::uint8_t> out;
    out.reserve(head.size() + payload.size());
    out.insert(out.end(), head.begin(), head.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

FractalCode unpack(std::span<const std::uint8_t> bytes) {
    const FrcHeader h = FrcHeader::from_bytes(bytes);
    if (h.bits_iso != 3)
        throw ParseError("frc: unsupported isometry bit width " + std::to_string(h.bits_iso));

    FractalCode code;
    code.width = h.width;
    code.height = h.height;
    CodecConfig cfg; // non-serialized knobs (split_threshold) take defaults
    cfg.range_size = h.range_size;
    cfg.domain_step = h.domain_step;
    cfg.bits_dx = h.bits_dx;
    cfg.bits_dy = h.bits_dy;
    cfg.bits_alpha = h.bits_alpha;
    cfg.bits_dg = h.bits_dg;
    cfg.iterations = h.iterations_hint;
    if (h.flags & FrcHeader::kFlagQuadtree) {
        cfg.partition_mode = PartitionMode::Quadtree;
        cfg.max_depth = h.max_depth;
    }
    try {
        cfg.validate(code.width, code.height);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("frc: invalid header: ") + e.what());
    }
    code.config = cfg;
    code.encrypted = (h.flags & FrcHeader::kFlagEncrypted) != 0;
    code.tree_encrypted = (h.flags & FrcHeader::kFlagTreeEncrypted) != 0;
    code.iv = h.iv;
    if (code.tree_encrypted && cfg.partition_mode != PartitionMode::Quadtree)
        throw ParseError("frc: tree-encrypted flag without quadtree mode");

    const std::size_t payload_bytes = bytes.size() - FrcHeader::kSize;
    const std::size_t needed_bytes = (h.payload_bit_count + 7) / 8;
    if (payload_bytes < needed_bytes)
        throw ParseError("frc: truncated payload, header declares " +
                         std::to_string(h.payload_bit_count) + " bits");
    if (payload_bytes > needed_bytes)
        throw ParseError("frc: trailing data after declared payload");

    BitReader r(bytes.subspan(FrcHeader::kSize));
    const std::size_t total_bits = h.payload_bit_count;
    auto bits_left = [&] { return total_bits - r.bit_pos(); };

    std::size_t tree_bit_count = 0;
    std::size_t implied_leaves = 0;
    if (cfg.partition_mode == PartitionMode::Quadtree) {
        if (code.tree_encrypted) {
            tree_bit_count = max_tree_bits(code.width, code.height, cfg);
            if (bits_left() < tree_bit_count)
                throw ParseError("frc: payload bit count mismatch in tree section");
            code.tree_bits.resize(tree_bit_count);
            for (std::size_t i = 0; i < tree_bit_count; ++i)
                code.tree_bits[i] = static_cast<std::uint8_t>(r.get(1));
        } else {
            // structural walk, mirroring the encoder's preorder emit
            std::function<void(int)> walk = [&](int depth) {
                if (depth >= cfg.max_depth) {
                    ++implied_leaves;
                    return;
                }
                if (bits_left() < 1)
                    throw ParseError("frc: payload bit count mismatch in tree section");
                const std::uint8_t bit = static_cast<std::uint8_t>(r.get(1));
                code.tree_bits.push_back(bit);
                if (bit) {
                    for (int child = 0; child < 4; ++child)
                        walk(depth + 1);
                } else {
                    ++implied_leaves;
                }
            };
            const int top = cfg.range_size << cfg.max_depth;
            const std::size_t tops =
                static_cast<std::size_t>(code.width / top) * (code.height / top);
            for (std::size_t i = 0; i < tops; ++i)
                walk(0);
            tree_bit_count = code.tree_bits.size();
        }
    } else {
        implied_leaves = static_cast<std::size_t>(code.width / cfg.range_size) *
                         (code.height / cfg.range_size);
    }

    const std::size_t per_block = static_cast<std::size_t>(cfg.bits_per_block());
    const std::size_t remaining = total_bits - tree_bit_count;
    if (remaining % per_block != 0)
        throw ParseError("frc: payload bit count mismatch, transform section not a "
                         "multiple of " + std::to_string(per_block) + " bits");
    const std::size_t count = remaining / per_block;
    if (!code.tree_encrypted && count != implied_leaves)
        throw ParseError("frc: payload bit count mismatch, expected " +
                         std::to_string(implied_leaves) + " transforms, found " +
                         std::to_string(count));

    code.transforms.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        BlockTransform t;
        t.dx = static_cast<std::uint16_t>(r.get(cfg.bits_dx));
        t.dy = static_cast<std::uint16_t>(r.get(cfg.bits_dy));
        t.alpha_q = static_cast<std::uint16_t>(r.get(cfg.bits_alpha));
        t.dg_sign = static_cast<std::uint8_t>(r.get(1));
        t.dg_mag = static_cast<std::uint16_t>(r.get(cfg.bits_dg));
        t.iso.code = static_cast<std::uint8_t>(r.get(3));
        code.transforms.push_back(t);
    }
    return code;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open file: " + path);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

void write_file(std::span<const std::uint8_t> bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ParseError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw ParseError("write failed: " + path);
}

} // namespace frc
