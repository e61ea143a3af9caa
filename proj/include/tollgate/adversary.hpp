#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tollgate/channel.hpp"
#include "tollgate/covert.hpp"
#include "tollgate/mulaw.hpp"
#include "tollgate/signalling.hpp"
#include "tollgate/watermark.hpp"

namespace tollgate {

// ── attacker actions ─────────────────────────────────────────────────────────
// All tampering happens in transit, between the sending and receiving
// gateway, so detection never depends on endpoint cooperation.

// Flip each voice payload bit independently with the given probability.
struct FlipVoiceBits {
    double rate = 0.0;
};

// Shift exactly one watermark carrier sample of one window by `cells` lattice
// steps: the minimal targeted modification that changes a single covert bit.
struct TamperCell {
    uint32_t window = 0;
    uint32_t sample_index = 0;  // window-global sample position
    int cells = 1;
    uint16_t delta = kDefaultDelta;
};

// Replace the n-th signalling message. With `raw` set the whole message is
// substituted verbatim; otherwise `field` is rewritten to `value` (start-line
// fields "method", "uri", "status" are addressed by those names).
struct ReplaceSignalling {
    uint32_t target = 0;
    std::string field;
    std::string value;
    ByteVec raw;
};

// Forge a release (BYE carrying ISUP REL) after the given media window,
// impersonating the caller-side gateway using identifiers observed on path.
struct InjectTeardown {
    uint32_t after_window = 0;
};

// Record the packets of one window and splice them over a later window,
// transport counters rewritten to fit the destination slot, covert content
// untouched.
struct ReplayWindow {
    uint32_t record = 0;
    uint32_t replay_at = 0;
};

// Flip the covert payload-kind bit (the RTP padding flag) of one media
// packet, addressed by its global ordinal.
struct CorruptCovertHeader {
    uint64_t packet_index = 0;
};

// Drop each media packet independently with the given probability.
struct DropPackets {
    double rate = 0.0;
};

using AdversaryAction = std::variant<FlipVoiceBits, TamperCell, ReplaceSignalling, InjectTeardown,
                                     ReplayWindow, CorruptCovertHeader, DropPackets>;

// ── on-path adversary ────────────────────────────────────────────────────────
// Sees every datagram in transit, in order, and may mutate, drop, or add.
// Deterministic for a given (actions, seed) pair regardless of the transport
// underneath.

class Adversary {
  public:
    Adversary() : Adversary({}, 0) {}

    Adversary(std::vector<AdversaryAction> actions, uint64_t seed)
        : actions_(std::move(actions)), rng_(seed) {}

    // Transforms one in-flight datagram into what the wire actually delivers.
    std::vector<Datagram> transit(Datagram d) {
        if (d.kind == Datagram::Kind::Signalling) return transit_signalling(std::move(d));
        return transit_media(std::move(d));
    }

    // True once any action has concretely altered, dropped, or injected
    // traffic (an "attack ran but nothing was detected" verdict needs this).
    bool tampered() const { return applications_ > 0; }
    uint64_t applications() const { return applications_; }

  private:
    std::vector<Datagram> transit_signalling(Datagram d) {
        uint32_t ordinal = signalling_seen_++;
        observe_signalling(d);
        for (AdversaryAction& action : actions_) {
            if (auto* rs = std::get_if<ReplaceSignalling>(&action); rs && rs->target == ordinal) {
                d.bytes = forge_signalling(*rs, d.bytes);
                ++applications_;
            }
        }
        return {std::move(d)};
    }

    std::vector<Datagram> transit_media(Datagram d) {
        SimPacket p = SimPacket::parse(d.bytes);
        uint64_t ordinal = media_seen_++;
        uint32_t window = p.rtp_seq / kFramesPerWindow;
        uint32_t frame = p.rtp_seq % kFramesPerWindow;

        std::vector<Datagram> out;
        bool dropped = false;

        for (AdversaryAction& action : actions_) {
            if (dropped) break;
            if (auto* rw = std::get_if<ReplayWindow>(&action)) {
                if (window == rw->record) record_[frame] = p;
                if (window == rw->replay_at) {
                    dropped = true;  // live packet suppressed
                    ++applications_;
                    if (frame == 0) {
                        for (auto& [j, rec] : record_) {
                            SimPacket spliced = rec;
                            spliced.rtp_seq =
                                static_cast<uint16_t>(rw->replay_at * kFramesPerWindow + j);
                            spliced.rtp_timestamp = static_cast<uint32_t>(
                                rw->replay_at * kWindowSamples + j * kFrameSamples);
                            out.push_back(
                                Datagram{Datagram::Kind::Media, spliced.serialize()});
                        }
                    }
                }
            } else if (auto* dp = std::get_if<DropPackets>(&action)) {
                if (bernoulli(dp->rate)) {
                    dropped = true;
                    ++applications_;
                }
            } else if (auto* fv = std::get_if<FlipVoiceBits>(&action)) {
                if (fv->rate > 0.0) {
                    bool changed = false;
                    for (auto& byte : p.payload)
                        for (int b = 0; b < 8; ++b)
                            if (bernoulli(fv->rate)) {
                                byte ^= static_cast<uint8_t>(1u << b);
                                changed = true;
                            }
                    if (changed) ++applications_;
                }
            } else if (auto* tc = std::get_if<TamperCell>(&action)) {
                if (window == tc->window && tc->sample_index / kFrameSamples == frame) {
                    size_t at = tc->sample_index % kFrameSamples;
                    int shifted = ulaw_decode(p.payload[at]) + tc->cells * tc->delta;
                    if (shifted > 32767) shifted = 32767;
                    if (shifted < -32768) shifted = -32768;
                    p.payload[at] = ulaw_encode(static_cast<int16_t>(shifted));
                    ++applications_;
                }
            } else if (auto* cc = std::get_if<CorruptCovertHeader>(&action)) {
                if (cc->packet_index == ordinal) {
                    p.rtp_padding = !p.rtp_padding;
                    ++applications_;
                }
            }
        }

        if (!dropped) out.insert(out.begin(), Datagram{Datagram::Kind::Media, p.serialize()});

        for (AdversaryAction& action : actions_) {
            if (auto* it = std::get_if<InjectTeardown>(&action)) {
                if (window == it->after_window && frame == kFramesPerWindow - 1 &&
                    !teardown_injected_) {
                    teardown_injected_ = true;
                    ++applications_;
                    out.push_back(Datagram{Datagram::Kind::Signalling,
                                           serialize_sip(forged_release())});
                }
            }
        }
        return out;
    }

    void observe_signalling(const Datagram& d) {
        try {
            SipMessage msg = parse_sip(d.bytes);
            if (msg.is_request() && msg.request().method == "INVITE") {
                invite_ = msg;
                if (auto isup = extract_isup(msg)) observed_cic_ = isup->cic;
            }
        } catch (const std::exception&) {
            // Unparseable traffic carries nothing worth recording.
        }
    }

    ByteVec forge_signalling(const ReplaceSignalling& rs, const ByteVec& original) {
        if (!rs.raw.empty()) return rs.raw;
        SipMessage msg = parse_sip(original);
        if (rs.field == "method" && msg.is_request()) {
            msg.start = SipRequest{rs.value, msg.request().uri};
        } else if (rs.field == "uri" && msg.is_request()) {
            msg.start = SipRequest{msg.request().method, rs.value};
        } else if (rs.field == "status" && !msg.is_request()) {
            msg.start = SipResponse{std::stoi(rs.value), msg.response().reason};
        } else {
            bool found = false;
            for (auto& [n, v] : msg.headers)
                if (n == rs.field) {
                    v = rs.value;
                    found = true;
                    break;
                }
            if (!found) msg.headers.emplace_back(rs.field, rs.value);
        }
        return serialize_sip(msg);
    }

    // A release that looks like the caller hanging up: same dialog
    // identifiers, ISUP REL on the observed circuit, normal-clearing cause.
    SipMessage forged_release() {
        SipMessage bye;
        std::string uri = "sip:unknown";
        std::string from = "<sip:unknown>";
        std::string to = "<sip:unknown>";
        std::string call_id = "unknown";
        if (invite_) {
            uri = invite_->request().uri;
            if (auto v = invite_->header("From")) from = *v;
            if (auto v = invite_->header("To")) to = *v;
            if (auto v = invite_->header("Call-ID")) call_id = *v;
        }
        bye.start = SipRequest{"BYE", uri};
        bye.headers.emplace_back("Via", "SIP/2.0/UDP onpath.invalid;branch=z9hG4bKforged");
        bye.headers.emplace_back("From", from);
        bye.headers.emplace_back("To", to);
        bye.headers.emplace_back("Call-ID", call_id);
        bye.headers.emplace_back("CSeq", "99 BYE");
        bye.headers.emplace_back("Max-Forwards", "70");
        IsupMessage rel;
        rel.cic = observed_cic_;
        rel.type = IsupType::Rel;
        rel.params = {0x02, 0x80, 0x90};  // cause: normal clearing
        attach_isup(bye, rel);
        return bye;
    }

    bool bernoulli(double rate) {
        if (rate <= 0.0) return false;
        if (rate >= 1.0) return true;
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < rate;
    }

    std::vector<AdversaryAction> actions_;
    std::mt19937_64 rng_;
    uint64_t media_seen_ = 0;
    uint32_t signalling_seen_ = 0;
    uint64_t applications_ = 0;
    bool teardown_injected_ = false;
    std::optional<SipMessage> invite_;
    uint16_t observed_cic_ = 0;
    std::map<uint32_t, SimPacket> record_;
};

}  // namespace tollgate
