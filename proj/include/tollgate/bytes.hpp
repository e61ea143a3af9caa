#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tollgate {

using ByteVec = std::vector<uint8_t>;

// Bit sequences are kept unpacked (one 0/1 value per element); watermark and
// covert-channel code works bit-at-a-time and packs only at serialization
// boundaries.
using Bits = std::vector<uint8_t>;

inline void put_u16_be(ByteVec& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline void put_u32_be(ByteVec& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline uint16_t get_u16_be(std::span<const uint8_t> in, size_t at) {
    if (at + 2 > in.size()) throw std::out_of_range("get_u16_be: truncated input");
    return static_cast<uint16_t>((in[at] << 8) | in[at + 1]);
}

inline uint32_t get_u32_be(std::span<const uint8_t> in, size_t at) {
    if (at + 4 > in.size()) throw std::out_of_range("get_u32_be: truncated input");
    return (static_cast<uint32_t>(in[at]) << 24) | (static_cast<uint32_t>(in[at + 1]) << 16) |
           (static_cast<uint32_t>(in[at + 2]) << 8) | static_cast<uint32_t>(in[at + 3]);
}

// MSB-first within each byte.
inline Bits bytes_to_bits(std::span<const uint8_t> bytes) {
    Bits bits;
    bits.reserve(bytes.size() * 8);
    for (uint8_t b : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    return bits;
}

// Inverse of bytes_to_bits; a partial trailing byte is zero-padded at the LSB end.
inline ByteVec bits_to_bytes(std::span<const uint8_t> bits) {
    ByteVec bytes((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) bytes[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
    return bytes;
}

inline std::string to_hex(std::span<const uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

inline ByteVec from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd-length input");
    ByteVec out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("from_hex: non-hex character");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

inline ByteVec to_bytes(std::string_view s) {
    return ByteVec(s.begin(), s.end());
}

}  // namespace tollgate
