#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tollgate/audio.hpp"
#include "tollgate/bytes.hpp"
#include "tollgate/hash.hpp"
#include "tollgate/token.hpp"
#include "tollgate/watermark.hpp"

namespace tollgate {

struct CovertError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── simulated packet ─────────────────────────────────────────────────────────
// One RTP-in-UDP-in-IP voice packet, reduced to the fields the system reads
// or writes. The payload is the mu-law encoding of one 20 ms frame.

struct SimPacket {
    uint16_t ip_id = 0;
    uint16_t udp_checksum = 0;
    bool rtp_padding = false;
    bool rtp_extension = false;
    uint16_t rtp_seq = 0;
    uint32_t rtp_timestamp = 0;
    ByteVec payload;

    bool operator==(const SimPacket&) const = default;

    ByteVec serialize() const {
        ByteVec out;
        put_u16_be(out, ip_id);
        put_u16_be(out, udp_checksum);
        out.push_back(static_cast<uint8_t>((rtp_padding ? 1 : 0) | (rtp_extension ? 2 : 0)));
        put_u16_be(out, rtp_seq);
        put_u32_be(out, rtp_timestamp);
        put_u16_be(out, static_cast<uint16_t>(payload.size()));
        out.insert(out.end(), payload.begin(), payload.end());
        return out;
    }

    static SimPacket parse(std::span<const uint8_t> wire) {
        if (wire.size() < 13) throw CovertError("SimPacket::parse: truncated header");
        SimPacket p;
        p.ip_id = get_u16_be(wire, 0);
        p.udp_checksum = get_u16_be(wire, 2);
        uint8_t flags = wire[4];
        if (flags & ~0x03u) throw CovertError("SimPacket::parse: reserved flag bits set");
        p.rtp_padding = flags & 1;
        p.rtp_extension = flags & 2;
        p.rtp_seq = get_u16_be(wire, 5);
        p.rtp_timestamp = get_u32_be(wire, 7);
        uint16_t len = get_u16_be(wire, 11);
        if (13 + static_cast<size_t>(len) != wire.size())
            throw CovertError("SimPacket::parse: payload length mismatch");
        p.payload.assign(wire.begin() + 13, wire.end());
        return p;
    }
};

// ── covert header ────────────────────────────────────────────────────────────
// Six bits ride fields a standards-conformant receiver ignores or tolerates:
//
//   bit 0  payload kind (1 = security)   -> RTP padding flag
//   bit 1  fragment index, low bit       -> RTP extension flag
//   bits 2-4  fragment high bits + start -> IP identification, low 3 bits
//   bit 5  post-auth flag                -> UDP checksum, low bit
//
// A packet that carries no covert traffic keeps all six positions zero, which
// is also what stock network stacks emit, so marked and unmarked packets are
// indistinguishable by syntax.

enum class PayloadKind : uint8_t { Informational = 0, Security = 1 };

struct CovertHeader {
    PayloadKind kind = PayloadKind::Informational;
    uint8_t fragment = 0;  // 3 bits
    bool start_of_pdu = false;
    bool post_auth = false;

    uint8_t to_bits() const {
        if (fragment > 7) throw CovertError("CovertHeader: fragment index exceeds 3 bits");
        return static_cast<uint8_t>((kind == PayloadKind::Security ? 1 : 0) | (fragment << 1) |
                                    (start_of_pdu ? 0x10 : 0) | (post_auth ? 0x20 : 0));
    }

    static CovertHeader from_bits(uint8_t v) {
        if (v & ~0x3Fu) throw CovertError("CovertHeader: more than 6 bits");
        CovertHeader h;
        h.kind = (v & 1) ? PayloadKind::Security : PayloadKind::Informational;
        h.fragment = static_cast<uint8_t>((v >> 1) & 0x7);
        h.start_of_pdu = (v >> 4) & 1;
        h.post_auth = (v >> 5) & 1;
        return h;
    }

    bool operator==(const CovertHeader&) const = default;
};

inline SimPacket pack_header(const CovertHeader& h, SimPacket p) {
    uint8_t v = h.to_bits();
    p.rtp_padding = v & 1;
    p.rtp_extension = (v >> 1) & 1;
    p.ip_id = static_cast<uint16_t>((p.ip_id & ~0x0007u) | ((v >> 2) & 0x7));
    p.udp_checksum = static_cast<uint16_t>((p.udp_checksum & ~0x0001u) | ((v >> 5) & 1));
    return p;
}

inline CovertHeader unpack_header(const SimPacket& p) {
    uint8_t v = static_cast<uint8_t>((p.rtp_padding ? 1 : 0) | (p.rtp_extension ? 2 : 0) |
                                     ((p.ip_id & 0x7) << 2) | ((p.udp_checksum & 1) << 5));
    return CovertHeader::from_bits(v);
}

inline std::string trace_line(const SimPacket& p) {
    char buf[96];
    uint8_t v = unpack_header(p).to_bits();
    char bits[7];
    for (int i = 0; i < 6; ++i) bits[i] = ((v >> (5 - i)) & 1) ? '1' : '0';
    bits[6] = '\0';
    std::snprintf(buf, sizeof(buf),
                  "ip_id=%04x udp_ck=%04x pad=%d ext=%d seq=%04x ts=%08x len=%zu covert=%s",
                  p.ip_id, p.udp_checksum, p.rtp_padding ? 1 : 0, p.rtp_extension ? 1 : 0,
                  p.rtp_seq, p.rtp_timestamp, p.payload.size(), bits);
    return std::string(buf);
}

// ── PDU transport ────────────────────────────────────────────────────────────
// A covert PDU's header rides the packet whose ordinal within the window
// equals the PDU's ordinal; its payload bits ride the window's watermark
// layer, laid down back to back. Encoding is stateless: the next free PDU
// slot and bit offset are recovered by walking the headers already present.
//
// Wire sizes: a security payload is a 128-bit token, or a 64-bit chain digest
// when the post-auth flag is set; an informational payload carries an 8-bit
// bit-length prefix followed by up to 128 payload bits.

struct CovertPdu {
    CovertHeader header;
    Bits payload;

    bool operator==(const CovertPdu&) const = default;
};

inline constexpr size_t kTokenPduBits = Token::kWireBits;
inline constexpr size_t kPostAuthPduBits = kMacBytes * 8;
inline constexpr size_t kMaxInformationalBits = 128;
inline constexpr size_t kInformationalPrefixBits = 8;

namespace detail {

// Bits a PDU occupies on the layer, determined from its header (and, for
// informational payloads, the length prefix already embedded at `offset`).
inline size_t pdu_wire_bits_at(const CovertHeader& h, const VoiceWindow& w,
                               const WatermarkLayer& layer, size_t offset) {
    if (h.kind == PayloadKind::Security) {
        if (h.post_auth) return kPostAuthPduBits;
        return kTokenPduBits;
    }
    if (h.post_auth) throw CovertError("covert: post-auth flag on informational payload");
    if (offset + kInformationalPrefixBits > kLayerCapacityBits)
        throw CovertError("covert: length prefix exceeds layer capacity");
    Bits prefix = extract_bits_at(w, layer, offset, kInformationalPrefixBits);
    size_t len = 0;
    for (uint8_t b : prefix) len = (len << 1) | b;
    if (len > kMaxInformationalBits)
        throw CovertError("covert: informational payload length out of range");
    return kInformationalPrefixBits + len;
}

struct LayerCursor {
    size_t next_pdu = 0;
    size_t bit_offset = 0;
};

inline LayerCursor scan_layer(const VoiceWindow& w, const WatermarkLayer& layer,
                              const std::vector<SimPacket>& packets) {
    LayerCursor cur;
    while (cur.next_pdu < packets.size()) {
        CovertHeader h = unpack_header(packets[cur.next_pdu]);
        if (!h.start_of_pdu) break;
        cur.bit_offset += pdu_wire_bits_at(h, w, layer, cur.bit_offset);
        ++cur.next_pdu;
    }
    return cur;
}

}  // namespace detail

// Appends one PDU to the window/packet pair. Throws if the payload size does
// not match the header's class, or if layer or packet capacity runs out.
inline void pdu_encode(const CovertPdu& pdu, VoiceWindow& w, const WatermarkLayer& layer,
                       std::vector<SimPacket>& packets) {
    if (!pdu.header.start_of_pdu)
        throw CovertError("pdu_encode: header must carry the start-of-PDU flag");

    Bits wire;
    if (pdu.header.kind == PayloadKind::Security) {
        size_t want = pdu.header.post_auth ? kPostAuthPduBits : kTokenPduBits;
        if (pdu.payload.size() != want)
            throw CovertError("pdu_encode: security payload must be " + std::to_string(want) +
                              " bits");
        wire = pdu.payload;
    } else {
        if (pdu.header.post_auth)
            throw CovertError("pdu_encode: post-auth flag on informational payload");
        if (pdu.payload.size() > kMaxInformationalBits)
            throw CovertError("pdu_encode: informational payload exceeds 128 bits");
        for (int i = kInformationalPrefixBits - 1; i >= 0; --i)
            wire.push_back(static_cast<uint8_t>((pdu.payload.size() >> i) & 1));
        wire.insert(wire.end(), pdu.payload.begin(), pdu.payload.end());
    }

    detail::LayerCursor cur = detail::scan_layer(w, layer, packets);
    if (cur.next_pdu >= packets.size())
        throw CovertError("pdu_encode: no free packet for the PDU header");
    if (cur.bit_offset + wire.size() > kLayerCapacityBits)
        throw CovertError("pdu_encode: combined payloads exceed layer capacity");

    embed_bits_at(w, layer, cur.bit_offset, wire);
    packets[cur.next_pdu] = pack_header(pdu.header, packets[cur.next_pdu]);
}

// Recovers every PDU announced by the packet headers, in order. Throws on
// structurally impossible layouts (lengths past capacity, contradictory
// flags); bit content itself is the verifier's business.
inline std::vector<CovertPdu> pdu_decode_all(const VoiceWindow& w, const WatermarkLayer& layer,
                                             const std::vector<SimPacket>& packets) {
    std::vector<CovertPdu> out;
    size_t offset = 0;
    for (const SimPacket& packet : packets) {
        CovertHeader h = unpack_header(packet);
        if (!h.start_of_pdu) break;
        size_t wire_bits = detail::pdu_wire_bits_at(h, w, layer, offset);
        if (offset + wire_bits > kLayerCapacityBits)
            throw CovertError("pdu_decode_all: payload runs past layer capacity");
        CovertPdu pdu;
        pdu.header = h;
        if (h.kind == PayloadKind::Security) {
            pdu.payload = extract_bits_at(w, layer, offset, wire_bits);
        } else {
            pdu.payload = extract_bits_at(w, layer, offset + kInformationalPrefixBits,
                                          wire_bits - kInformationalPrefixBits);
        }
        out.push_back(std::move(pdu));
        offset += wire_bits;
    }
    return out;
}

// ── post-auth chain ──────────────────────────────────────────────────────────
// Ring of the last window-1 transmitted payloads. Every window-th PDU is a
// post-auth digest over the ring, so a payload modified in transit is flagged
// no later than window-1 PDUs after it, even when its own check was somehow
// evaded. The digest input is length-framed so distinct payload splits cannot
// collide.

class ParamChain {
  public:
    explicit ParamChain(size_t window) : window_(window) {
        if (window < 2) throw CovertError("ParamChain: window must be at least 2");
    }

    void push(Bits payload) {
        if (payload.size() > 255)
            throw CovertError("ParamChain: payload too long to length-frame");
        ring_.push_back(std::move(payload));
        if (ring_.size() > window_ - 1) ring_.pop_front();
        ++pushed_;
    }

    // True when the next transmitted PDU is due to be a post-auth digest:
    // every window-th PDU, counting from 1.
    bool post_auth_due() const { return pushed_ % window_ == window_ - 1; }

    bool full() const { return ring_.size() == window_ - 1; }

    Mac64 digest() const {
        if (!full()) throw CovertError("ParamChain: ring not yet full");
        ByteVec material;
        for (const Bits& p : ring_) {
            material.push_back(static_cast<uint8_t>(p.size()));
            ByteVec packed = bits_to_bytes(p);
            material.insert(material.end(), packed.begin(), packed.end());
        }
        return truncate64(hash_bytes(material));
    }

    VerifyResult verify(const Mac64& received) const {
        return digest() == received ? VerifyResult::Match : VerifyResult::Mismatch;
    }

    uint64_t pushed() const { return pushed_; }
    size_t window() const { return window_; }

  private:
    size_t window_;
    std::deque<Bits> ring_;
    uint64_t pushed_ = 0;
};

inline constexpr size_t kDefaultChainWindow = 4;

}  // namespace tollgate
