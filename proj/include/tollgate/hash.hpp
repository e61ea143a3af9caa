#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "tollgate/bytes.hpp"

namespace tollgate {

// All authentication material is digested with SHA-256; 32 bytes everywhere a
// full digest travels, truncated to 64 bits only inside wire-sized tokens.
inline constexpr size_t kDigestBytes = 32;
inline constexpr size_t kMacBytes = 8;

using Digest = std::array<uint8_t, kDigestBytes>;
using Mac64 = std::array<uint8_t, kMacBytes>;

inline Digest hash_bytes(std::span<const uint8_t> data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != kDigestBytes)
        throw std::runtime_error("hash_bytes: SHA-256 computation failed");
    return out;
}

inline Digest hash_bytes(const ByteVec& data) {
    return hash_bytes(std::span<const uint8_t>(data));
}

inline Digest xor_digests(const Digest& a, const Digest& b) {
    Digest out;
    for (size_t i = 0; i < kDigestBytes; ++i) out[i] = a[i] ^ b[i];
    return out;
}

// Leading 64 bits of a digest, used where a full digest does not fit the
// covert-channel budget.
inline Mac64 truncate64(const Digest& d) {
    Mac64 out;
    for (size_t i = 0; i < kMacBytes; ++i) out[i] = d[i];
    return out;
}

inline std::string hex(const Digest& d) {
    return to_hex(std::span<const uint8_t>(d.data(), d.size()));
}

inline std::string hex(const Mac64& m) {
    return to_hex(std::span<const uint8_t>(m.data(), m.size()));
}

}  // namespace tollgate
