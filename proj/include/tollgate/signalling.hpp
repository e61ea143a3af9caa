#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tollgate/bytes.hpp"
#include "tollgate/hash.hpp"

namespace tollgate {

struct SignallingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── SIP ──────────────────────────────────────────────────────────────────────
// Text model of the SIP leg between the two media gateways. Headers keep
// their order and spelling so messages round-trip; lookups are
// case-insensitive per RFC 3261.

struct SipRequest {
    std::string method;
    std::string uri;
    bool operator==(const SipRequest&) const = default;
};

struct SipResponse {
    int status = 0;
    std::string reason;
    bool operator==(const SipResponse&) const = default;
};

struct SipMessage {
    std::variant<SipRequest, SipResponse> start;
    std::vector<std::pair<std::string, std::string>> headers;
    ByteVec body;

    bool is_request() const { return std::holds_alternative<SipRequest>(start); }
    const SipRequest& request() const { return std::get<SipRequest>(start); }
    const SipResponse& response() const { return std::get<SipResponse>(start); }

    std::optional<std::string> header(std::string_view name) const {
        for (const auto& [n, v] : headers) {
            if (n.size() != name.size()) continue;
            bool eq = std::equal(n.begin(), n.end(), name.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) ==
                       std::tolower(static_cast<unsigned char>(b));
            });
            if (eq) return v;
        }
        return std::nullopt;
    }

    bool operator==(const SipMessage&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline SipMessage parse_sip(const ByteVec& wire) {
    std::string text(wire.begin(), wire.end());
    size_t split = text.find("\r\n\r\n");
    if (split == std::string::npos) throw SignallingError("parse_sip: missing blank line");
    std::string head = text.substr(0, split);
    SipMessage msg;
    msg.body.assign(wire.begin() + split + 4, wire.end());

    std::vector<std::string> lines;
    size_t at = 0;
    while (at <= head.size()) {
        size_t nl = head.find("\r\n", at);
        if (nl == std::string::npos) {
            lines.push_back(head.substr(at));
            break;
        }
        lines.push_back(head.substr(at, nl - at));
        at = nl + 2;
    }
    if (lines.empty() || lines[0].empty()) throw SignallingError("parse_sip: empty start line");

    const std::string& start = lines[0];
    if (start.rfind("SIP/2.0 ", 0) == 0) {
        SipResponse r;
        if (start.size() < 12 || start[11] != ' ')
            throw SignallingError("parse_sip: malformed status line");
        std::string code = start.substr(8, 3);
        if (!std::isdigit(static_cast<unsigned char>(code[0])) ||
            !std::isdigit(static_cast<unsigned char>(code[1])) ||
            !std::isdigit(static_cast<unsigned char>(code[2])))
            throw SignallingError("parse_sip: non-numeric status code");
        r.status = std::stoi(code);
        r.reason = start.substr(12);
        msg.start = r;
    } else {
        size_t sp1 = start.find(' ');
        size_t sp2 = start.find(' ', sp1 == std::string::npos ? sp1 : sp1 + 1);
        if (sp1 == std::string::npos || sp2 == std::string::npos ||
            start.substr(sp2 + 1) != "SIP/2.0")
            throw SignallingError("parse_sip: malformed request line");
        SipRequest r;
        r.method = start.substr(0, sp1);
        r.uri = start.substr(sp1 + 1, sp2 - sp1 - 1);
        if (r.method.empty() || r.uri.empty())
            throw SignallingError("parse_sip: empty method or URI");
        msg.start = r;
    }

    for (size_t i = 1; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        size_t colon = line.find(':');
        if (colon == std::string::npos || colon == 0)
            throw SignallingError("parse_sip: header without colon: " + line);
        msg.headers.emplace_back(line.substr(0, colon), detail::trim(line.substr(colon + 1)));
    }

    for (const char* required : {"From", "To", "Call-ID", "CSeq"})
        if (!msg.header(required))
            throw SignallingError(std::string("parse_sip: missing header: ") + required);
    return msg;
}

inline ByteVec serialize_sip(const SipMessage& msg) {
    std::string out;
    if (msg.is_request()) {
        out = msg.request().method + " " + msg.request().uri + " SIP/2.0\r\n";
    } else {
        char code[4];
        std::snprintf(code, sizeof(code), "%03d", msg.response().status);
        out = std::string("SIP/2.0 ") + code + " " + msg.response().reason + "\r\n";
    }
    for (const auto& [n, v] : msg.headers) out += n + ": " + v + "\r\n";
    out += "\r\n";
    ByteVec wire(out.begin(), out.end());
    wire.insert(wire.end(), msg.body.begin(), msg.body.end());
    return wire;
}

// Canonical form for hashing: the start line, the identity headers both ends
// are guaranteed to see unchanged (From, To, Call-ID, CSeq), and the body,
// joined by single newlines. Transit-mutable routing headers (Via,
// Record-Route, Contact, Max-Forwards) are deliberately excluded so a
// conformant proxy hop does not change the digest.
inline ByteVec canonical_bytes(const SipMessage& msg) {
    std::string out;
    if (msg.is_request()) {
        out = msg.request().method + " " + msg.request().uri + " SIP/2.0";
    } else {
        char code[4];
        std::snprintf(code, sizeof(code), "%03d", msg.response().status);
        out = std::string("SIP/2.0 ") + code + " " + msg.response().reason;
    }
    for (const char* name : {"From", "To", "Call-ID", "CSeq"}) {
        auto v = msg.header(name);
        if (!v) throw SignallingError(std::string("canonical_bytes: missing header: ") + name);
        out += "\n";
        out += *v;
    }
    out += "\n";
    ByteVec bytes(out.begin(), out.end());
    bytes.insert(bytes.end(), msg.body.begin(), msg.body.end());
    return bytes;
}

// ── ISUP ─────────────────────────────────────────────────────────────────────
// The PSTN-side counterpart, carried opaquely inside SIP-T bodies. Only the
// message types the call flow needs are modelled.

enum class IsupType : uint8_t {
    Iam = 0x01,  // Initial Address
    Acm = 0x06,  // Address Complete
    Anm = 0x09,  // Answer
    Rel = 0x0C,  // Release
    Rlc = 0x10,  // Release Complete
};

inline bool isup_type_known(uint8_t v) {
    switch (static_cast<IsupType>(v)) {
        case IsupType::Iam:
        case IsupType::Acm:
        case IsupType::Anm:
        case IsupType::Rel:
        case IsupType::Rlc:
            return true;
    }
    return false;
}

struct IsupMessage {
    uint16_t cic = 0;  // circuit identification code, 12 bits
    IsupType type = IsupType::Iam;
    ByteVec params;

    bool operator==(const IsupMessage&) const = default;
};

// [cic low 8][cic high 4][type][param length, u16 BE][params]
inline ByteVec serialize_isup(const IsupMessage& msg) {
    if (msg.cic > 0x0FFF) throw SignallingError("serialize_isup: CIC exceeds 12 bits");
    ByteVec out;
    out.push_back(static_cast<uint8_t>(msg.cic & 0xFF));
    out.push_back(static_cast<uint8_t>((msg.cic >> 8) & 0x0F));
    out.push_back(static_cast<uint8_t>(msg.type));
    put_u16_be(out, static_cast<uint16_t>(msg.params.size()));
    out.insert(out.end(), msg.params.begin(), msg.params.end());
    return out;
}

inline IsupMessage parse_isup(const ByteVec& wire) {
    if (wire.size() < 5) throw SignallingError("parse_isup: truncated header");
    IsupMessage msg;
    msg.cic = static_cast<uint16_t>(wire[0] | ((wire[1] & 0x0F) << 8));
    if (wire[1] & 0xF0) throw SignallingError("parse_isup: reserved CIC bits set");
    if (!isup_type_known(wire[2])) throw SignallingError("parse_isup: unknown message type");
    msg.type = static_cast<IsupType>(wire[2]);
    uint16_t plen = get_u16_be(wire, 3);
    if (wire.size() != 5 + static_cast<size_t>(plen))
        throw SignallingError("parse_isup: parameter length mismatch");
    msg.params.assign(wire.begin() + 5, wire.end());
    return msg;
}

inline ByteVec canonical_bytes(const IsupMessage& msg) {
    return serialize_isup(msg);
}

// ── SIP-T bridging ───────────────────────────────────────────────────────────
// ISUP travels hex-encoded in the SIP body with Content-Type application/isup.

inline constexpr const char* kIsupContentType = "application/isup";

inline void attach_isup(SipMessage& msg, const IsupMessage& isup) {
    ByteVec wire = serialize_isup(isup);
    std::string hex = to_hex(wire);
    msg.body.assign(hex.begin(), hex.end());
    msg.headers.emplace_back("Content-Type", kIsupContentType);
    msg.headers.emplace_back("Content-Length", std::to_string(msg.body.size()));
}

// Returns the embedded ISUP message, or nullopt when the message carries no
// ISUP body. A declared ISUP body that fails to parse is an error.
inline std::optional<IsupMessage> extract_isup(const SipMessage& msg) {
    auto ct = msg.header("Content-Type");
    if (!ct || *ct != kIsupContentType) return std::nullopt;
    std::string hex(msg.body.begin(), msg.body.end());
    return parse_isup(from_hex(hex));
}

// ── gateway control surface ──────────────────────────────────────────────────
// What the media gateway reports to its controller, modelled on a Megaco
// Notify carrying an observed-event descriptor.

enum class ObservedEvent : uint8_t { TokenOk = 0, TokenFail = 1 };

struct MegacoNotify {
    std::string termination_id;
    ObservedEvent event = ObservedEvent::TokenOk;
    uint32_t window_index = 0;

    bool operator==(const MegacoNotify&) const = default;
};

enum class MgcDecision : uint8_t { Continue, Teardown };

// Controller's reply to a Notify. On the wire a teardown decision is a
// Subtract command (remove the termination from its context); continuing
// needs no command at all, so the reply is just the acknowledged action.
enum class MegacoAction : uint8_t { Continue, Subtract };

struct MegacoReply {
    std::string termination_id;
    MegacoAction action = MegacoAction::Continue;

    bool operator==(const MegacoReply&) const = default;
};

inline MegacoReply megaco_reply(const MegacoNotify& notify, MgcDecision d) {
    return MegacoReply{notify.termination_id, d == MgcDecision::Teardown
                                                  ? MegacoAction::Subtract
                                                  : MegacoAction::Continue};
}

inline const char* to_string(ObservedEvent e) {
    return e == ObservedEvent::TokenOk ? "token_ok" : "token_fail";
}

inline const char* to_string(MgcDecision d) {
    return d == MgcDecision::Continue ? "continue" : "teardown";
}

inline const char* to_string(MegacoAction a) {
    return a == MegacoAction::Continue ? "continue" : "subtract";
}

}  // namespace tollgate
