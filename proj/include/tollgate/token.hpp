#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tollgate/bytes.hpp"
#include "tollgate/hash.hpp"

namespace tollgate {

enum class VerifyResult { Match, Mismatch };

inline const char* to_string(VerifyResult r) {
    return r == VerifyResult::Match ? "match" : "mismatch";
}

// Inputs that bind a token to one endpoint pair and one verification window.
//   r    - fresh random value, drawn per token
//   ts   - logical timestamp (window index within the call)
//   id   - numeric identity of the *peer* gateway the token is addressed to
//   pass - shared secret provisioned on both gateways
struct TokenParams {
    uint32_t r = 0;
    uint32_t ts = 0;
    uint32_t id = 0;
    ByteVec pass;
};

// Wire token: 128 bits, sized to fit one covert security payload and one
// watermark layer allocation. r and ts travel in clear so the verifier can
// rebuild the MAC input; the MAC itself is a truncated digest.
struct Token {
    uint32_t r = 0;
    uint32_t ts = 0;
    Mac64 mac{};

    static constexpr size_t kWireBytes = 16;
    static constexpr size_t kWireBits = kWireBytes * 8;

    ByteVec serialize() const {
        ByteVec out;
        out.reserve(kWireBytes);
        put_u32_be(out, r);
        put_u32_be(out, ts);
        out.insert(out.end(), mac.begin(), mac.end());
        return out;
    }

    static Token parse(std::span<const uint8_t> wire) {
        if (wire.size() != kWireBytes)
            throw std::invalid_argument("Token::parse: expected 16 bytes");
        Token t;
        t.r = get_u32_be(wire, 0);
        t.ts = get_u32_be(wire, 4);
        for (size_t i = 0; i < kMacBytes; ++i) t.mac[i] = wire[8 + i];
        return t;
    }

    bool operator==(const Token&) const = default;
};

// MAC = H( (H(SM) xor H(VF)) || TS || PASS || ID || R ), truncated to 64 bits.
// `sm` is the running digest of signalling seen so far, `vf` the digest of
// the current window's voice features; both already being digests, they enter
// the construction directly.
inline Mac64 token_mac(const Digest& sm, const Digest& vf, const TokenParams& p) {
    Digest mixed = xor_digests(sm, vf);
    ByteVec material(mixed.begin(), mixed.end());
    put_u32_be(material, p.ts);
    material.insert(material.end(), p.pass.begin(), p.pass.end());
    put_u32_be(material, p.id);
    put_u32_be(material, p.r);
    return truncate64(hash_bytes(material));
}

inline Token build_token(const Digest& sm, const Digest& vf, const TokenParams& p) {
    if (p.pass.empty())
        throw std::invalid_argument("build_token: empty pass");
    Token t;
    t.r = p.r;
    t.ts = p.ts;
    t.mac = token_mac(sm, vf, p);
    return t;
}

// Recomputes the MAC from local state plus the received clear fields. The
// timestamp is checked by the caller (it needs the local window clock); this
// routine answers only "was this token built from the same SM/VF/PASS/ID".
inline VerifyResult verify_token(const Token& received, const Digest& sm, const Digest& vf,
                                 const ByteVec& pass, uint32_t id) {
    TokenParams p{received.r, received.ts, id, pass};
    return token_mac(sm, vf, p) == received.mac ? VerifyResult::Match : VerifyResult::Mismatch;
}

// Logical-clock acceptance: |received - local| <= tolerance, computed without
// wrapping surprises.
inline bool timestamp_within(uint32_t received_ts, uint32_t local_ts, uint32_t tolerance) {
    uint32_t diff = received_ts >= local_ts ? received_ts - local_ts : local_ts - received_ts;
    return diff <= tolerance;
}

// Append-only store of per-message signalling digests, keyed by a strictly
// increasing sequence number. Both gateways must feed it identically; the
// newest entry is the SM half of every token built until the next message
// arrives. Rollback (truncate) exists solely so a gateway can unwind state
// recorded for a teardown that then fails post-verification.
class SignallingHashBuffer {
  public:
    void store(uint32_t n, const Digest& d) {
        if (!entries_.empty() && n <= entries_.back().first)
            throw std::logic_error("SignallingHashBuffer: sequence number must increase");
        entries_.emplace_back(n, d);
    }

    // Stores under the next free sequence number (1-based) and returns it.
    uint32_t append(const Digest& d) {
        uint32_t n = next_seq();
        entries_.emplace_back(n, d);
        return n;
    }

    const Digest& current() const {
        if (entries_.empty())
            throw std::logic_error("SignallingHashBuffer: no signalling hashed yet");
        return entries_.back().second;
    }

    std::optional<Digest> lookup(uint32_t n) const {
        for (const auto& [seq, digest] : entries_)
            if (seq == n) return digest;
        return std::nullopt;
    }

    void truncate(size_t size) {
        if (size > entries_.size())
            throw std::logic_error("SignallingHashBuffer: cannot truncate upward");
        entries_.resize(size);
    }

    uint32_t next_seq() const { return entries_.empty() ? 1 : entries_.back().first + 1; }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

  private:
    std::vector<std::pair<uint32_t, Digest>> entries_;
};

}  // namespace tollgate
