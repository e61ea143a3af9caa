#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tollgate/audio.hpp"
#include "tollgate/covert.hpp"
#include "tollgate/signalling.hpp"
#include "tollgate/token.hpp"
#include "tollgate/watermark.hpp"

namespace tollgate {

// ── level of trust ───────────────────────────────────────────────────────────
// Per-call trust counter driven by window verdicts: verified windows earn
// trust back slowly, failed windows lose it twice as fast, and the call is
// handed to the controller for teardown only when trust is exhausted. A
// single glitch therefore never kills a call, while persistent tampering
// reaches zero within a few windows.

struct LotPolicy {
    int initial = 3;
    int max = 10;
    int reward = 1;
    int penalty = 2;
};

class LotState {
  public:
    explicit LotState(LotPolicy policy = {}) : policy_(policy), level_(policy.initial) {
        if (policy.max <= 0 || policy.initial < 0 || policy.initial > policy.max ||
            policy.reward < 0 || policy.penalty < 0)
            throw std::invalid_argument("LotState: malformed policy");
    }

    int apply(VerifyResult r) {
        if (r == VerifyResult::Match) {
            level_ = std::min(level_ + policy_.reward, policy_.max);
        } else {
            level_ = std::max(level_ - policy_.penalty, 0);
        }
        return level_;
    }

    int level() const { return level_; }
    const LotPolicy& policy() const { return policy_; }

  private:
    LotPolicy policy_;
    int level_;
};

inline MgcDecision mgc_decide(int lot_level) {
    return lot_level == 0 ? MgcDecision::Teardown : MgcDecision::Continue;
}

// ── call phases ──────────────────────────────────────────────────────────────

enum class CallPhase : uint8_t { Setup, Active, TeardownPending, Terminated };

inline const char* to_string(CallPhase p) {
    switch (p) {
        case CallPhase::Setup: return "setup";
        case CallPhase::Active: return "active";
        case CallPhase::TeardownPending: return "teardown_pending";
        case CallPhase::Terminated: return "terminated";
    }
    return "?";
}

// ── media gateway ────────────────────────────────────────────────────────────

struct GatewayConfig {
    uint32_t local_id = 0;
    uint32_t peer_id = 0;
    ByteVec pass;
    uint16_t delta = kDefaultDelta;
    uint32_t ts_tolerance = 0;
    LotPolicy lot;
    size_t chain_window = kDefaultChainWindow;
    double min_carrier_survival = 0.95;
    std::string termination_id = "tg0";
    uint64_t seed = 1;
};

// Everything one verification window produced on the receive side; the
// simulator's report is assembled from these.
struct WindowVerdict {
    uint32_t window_index = 0;
    VerifyResult result = VerifyResult::Mismatch;
    bool structural_ok = false;
    bool token_match = false;
    bool ts_ok = false;
    bool post_auth_due = false;
    bool post_auth_match = true;
    bool survival_ok = false;
    double survival = 0.0;
    int lot_after = 0;
    MgcDecision decision = MgcDecision::Continue;
    MegacoNotify notify;
    bool rollback = false;
    bool teardown_confirmed = false;
};

// Running totals for the hidden transport, reported at end of call.
struct CovertStats {
    uint64_t pdus_sent = 0;
    uint64_t post_auth_sent = 0;
    uint64_t pdus_received = 0;
    uint64_t post_auth_checked = 0;
    uint64_t post_auth_failures = 0;
    uint64_t structural_faults = 0;
};

struct SentWindow {
    VoiceWindow window;
    std::vector<SimPacket> packets;
};

struct ReceivedWindow {
    VoiceWindow window;
    WindowVerdict verdict;
};

// One PSTN/IP media gateway. Hashes every signalling message it sends or
// receives into an append-only buffer, stamps outgoing media windows with a
// token over (signalling so far, voice features now) plus chained post-auth
// digests, and verifies the same on incoming media. Media may flow only while
// the call is Active or winding down; Terminated is absorbing.
class MediaGateway {
  public:
    explicit MediaGateway(GatewayConfig cfg)
        : cfg_(std::move(cfg)),
          lot_(cfg_.lot),
          chain_(cfg_.chain_window),
          layer_{LayerId::Gateway, cfg_.delta},
          rng_(cfg_.seed) {}

    CallPhase phase() const { return phase_; }
    int lot() const { return lot_.level(); }
    const SignallingHashBuffer& signalling() const { return sb_; }
    const std::vector<WindowVerdict>& verdicts() const { return verdicts_; }
    const std::vector<std::string>& event_log() const { return events_; }
    const CovertStats& covert_stats() const { return stats_; }
    size_t rollback_count() const { return rollback_count_; }
    bool teardown_confirmed() const { return teardown_confirmed_; }
    const GatewayConfig& config() const { return cfg_; }

    void activate() {
        if (phase_ != CallPhase::Setup)
            throw std::logic_error("MediaGateway::activate: call is not in setup");
        phase_ = CallPhase::Active;
    }

    // Sender-side teardown completion (the release handshake finished).
    void complete_teardown() {
        if (phase_ == CallPhase::Terminated) return;
        if (phase_ != CallPhase::TeardownPending)
            throw std::logic_error("MediaGateway::complete_teardown: no teardown in progress");
        phase_ = CallPhase::Terminated;
        pending_.reset();
    }

    // Digests one signalling message into the buffer. A release-class message
    // (BYE, or any SIP-T body carrying ISUP REL) moves an active call to
    // TeardownPending and snapshots the pre-teardown state so a forged
    // release can be unwound later. Terminated is absorbing: late messages
    // are dropped with a warning rather than stored.
    std::optional<Digest> hash_signalling(const SipMessage& msg) {
        if (phase_ == CallPhase::Terminated) {
            events_.emplace_back("warning: signalling after termination dropped");
            return std::nullopt;
        }
        Digest d = hash_bytes(canonical_bytes(msg));
        if (is_teardown_message(msg) && phase_ == CallPhase::Active) {
            pending_ = Pending{sb_.size(), current_sm(), phase_};
            phase_ = CallPhase::TeardownPending;
        }
        sb_.append(d);
        return d;
    }

    static bool is_teardown_message(const SipMessage& msg) {
        if (msg.is_request() && msg.request().method == "BYE") return true;
        try {
            auto isup = extract_isup(msg);
            return isup && isup->type == IsupType::Rel;
        } catch (const std::exception&) {
            return false;  // undecodable body: not recognizably a release
        }
    }

    // ── sending ──────────────────────────────────────────────────────────

    SentWindow send_window(const VoiceWindow& ingress) {
        require_media_phase("send_window");
        if (sb_.empty())
            throw std::logic_error("MediaGateway::send_window: no signalling hashed yet");
        VoiceFeature vf = voice_feature(ingress);
        VoiceWindow w = ingress;
        w.index = send_counter_;

        std::vector<SimPacket> packets(kFramesPerWindow);
        for (size_t j = 0; j < kFramesPerWindow; ++j) {
            SimPacket& p = packets[j];
            // Low 3 identification bits are the covert carrier; packets that
            // end up without covert traffic must transmit them as zero.
            p.ip_id = static_cast<uint16_t>(ip_base_++ << 3);
            p.udp_checksum = 0;
            p.rtp_seq = static_cast<uint16_t>(send_counter_ * kFramesPerWindow + j);
            p.rtp_timestamp =
                static_cast<uint32_t>(send_counter_ * kWindowSamples + j * kFrameSamples);
        }

        size_t used_bits = 0;
        if (chain_.post_auth_due()) {
            CovertPdu pa;
            pa.header = CovertHeader{PayloadKind::Security, 0, true, true};
            pa.payload = bytes_to_bits(chain_.digest());
            pdu_encode(pa, w, layer_, packets);
            chain_.push(pa.payload);
            used_bits += kPostAuthPduBits;
            ++stats_.pdus_sent;
            ++stats_.post_auth_sent;
        }

        TokenParams params;
        params.r = static_cast<uint32_t>(rng_());
        params.ts = send_counter_;
        params.id = cfg_.peer_id;
        params.pass = cfg_.pass;
        Token token = build_token(current_sm(), vf.digest, params);
        CovertPdu tp;
        tp.header = CovertHeader{PayloadKind::Security, 0, true, false};
        tp.payload = bytes_to_bits(token.serialize());
        pdu_encode(tp, w, layer_, packets);
        chain_.push(tp.payload);
        used_bits += kTokenPduBits;
        ++stats_.pdus_sent;

        pad_layer_from(w, layer_, used_bits);

        for (size_t j = 0; j < kFramesPerWindow; ++j) {
            packets[j].payload.resize(kFrameSamples);
            for (size_t i = 0; i < kFrameSamples; ++i)
                packets[j].payload[i] = ulaw_encode(w.frames[j][i]);
        }

        ++send_counter_;
        return SentWindow{w, packets};
    }

    // ── receiving ────────────────────────────────────────────────────────

    ReceivedWindow receive_window(const std::vector<SimPacket>& packets) {
        require_media_phase("receive_window");

        // Reassemble by sequence number; lost or malformed frames decode as
        // silence so the window stays full-size.
        std::vector<SimPacket> slots(kFramesPerWindow);
        std::vector<bool> have(kFramesPerWindow, false);
        uint16_t base_seq = static_cast<uint16_t>(recv_counter_ * kFramesPerWindow);
        size_t present = 0;
        for (const SimPacket& p : packets) {
            uint16_t rel = static_cast<uint16_t>(p.rtp_seq - base_seq);
            if (rel >= kFramesPerWindow || p.payload.size() != kFrameSamples) continue;
            if (!have[rel]) ++present;
            slots[rel] = p;
            have[rel] = true;
        }
        VoiceWindow w;
        w.index = recv_counter_;
        for (size_t j = 0; j < kFramesPerWindow; ++j) {
            if (!have[j]) continue;
            for (size_t i = 0; i < kFrameSamples; ++i)
                w.frames[j][i] = ulaw_decode(slots[j].payload[i]);
        }

        WindowVerdict v;
        v.window_index = recv_counter_;
        v.survival = static_cast<double>(present) / kFramesPerWindow;
        v.survival_ok = v.survival >= cfg_.min_carrier_survival;
        v.post_auth_due = chain_.post_auth_due();

        // The PDU layout for this window is fixed by the chain position, so
        // the receiver can always recover payload bits for chain alignment
        // even when the announced headers are damaged.
        Bits pa_bits;
        Bits token_bits;
        v.structural_ok = decode_expected_layout(w, slots, v.post_auth_due, pa_bits, token_bits);
        if (v.structural_ok)
            stats_.pdus_received += v.post_auth_due ? 2 : 1;
        else
            ++stats_.structural_faults;

        if (v.post_auth_due) {
            Mac64 mac{};
            ByteVec packed = bits_to_bytes(pa_bits);
            std::copy_n(packed.begin(), kMacBytes, mac.begin());
            v.post_auth_match = chain_.full() && chain_.verify(mac) == VerifyResult::Match;
            chain_.push(pa_bits);
            ++stats_.post_auth_checked;
            if (!v.post_auth_match) ++stats_.post_auth_failures;
        }

        Token token = Token::parse(bits_to_bytes(token_bits));
        chain_.push(token_bits);

        VoiceFeature vf = voice_feature(w);
        v.token_match =
            verify_token(token, current_sm(), vf.digest, cfg_.pass, cfg_.local_id) ==
            VerifyResult::Match;

        // A failed check while a teardown is pending may mean the release was
        // forged: retry against the snapshot taken before the release was
        // hashed, and unwind the teardown if the snapshot verifies.
        if (!v.token_match && phase_ == CallPhase::TeardownPending && pending_) {
            if (verify_token(token, pending_->sm_before, vf.digest, cfg_.pass, cfg_.local_id) ==
                VerifyResult::Match) {
                sb_.truncate(pending_->sb_size);
                phase_ = pending_->prior;
                pending_.reset();
                v.token_match = true;
                v.rollback = true;
                ++rollback_count_;
            }
        }

        v.ts_ok = timestamp_within(token.ts, recv_counter_, cfg_.ts_tolerance);

        v.result = (v.structural_ok && v.token_match && v.ts_ok && v.post_auth_match &&
                    v.survival_ok)
                       ? VerifyResult::Match
                       : VerifyResult::Mismatch;

        if (v.result == VerifyResult::Match && phase_ == CallPhase::TeardownPending && pending_) {
            // The window was built over signalling that includes the release:
            // the peer really is hanging up.
            phase_ = CallPhase::Terminated;
            pending_.reset();
            v.teardown_confirmed = true;
            teardown_confirmed_ = true;
        }

        v.lot_after = lot_.apply(v.result);
        v.decision = mgc_decide(v.lot_after);
        if (v.decision == MgcDecision::Teardown) phase_ = CallPhase::Terminated;
        v.notify = MegacoNotify{cfg_.termination_id,
                                v.result == VerifyResult::Match ? ObservedEvent::TokenOk
                                                                : ObservedEvent::TokenFail,
                                recv_counter_};

        char line[96];
        std::snprintf(line, sizeof(line), "window=%u vf=%s r=%08x result=%s lot=%d decision=%s",
                      v.window_index, to_hex({vf.digest.data(), 4}).c_str(), token.r,
                      to_string(v.result), v.lot_after, to_string(v.decision));
        events_.emplace_back(line);

        verdicts_.push_back(v);
        ++recv_counter_;
        return ReceivedWindow{w, v};
    }

  private:
    struct Pending {
        size_t sb_size;
        Digest sm_before;
        CallPhase prior;
    };

    void require_media_phase(const char* op) const {
        if (phase_ != CallPhase::Active && phase_ != CallPhase::TeardownPending)
            throw std::logic_error(std::string("MediaGateway::") + op + ": media not allowed in " +
                                   to_string(phase_) + " phase");
    }

    // SM half of the token: digest of the newest signalling message, or the
    // empty-input digest before any signalling was hashed.
    Digest current_sm() const { return sb_.empty() ? hash_bytes(ByteVec{}) : sb_.current(); }

    // Checks the announced PDUs against the expected layout and pulls the
    // payload bits, falling back to fixed offsets when the announcement is
    // damaged. Returns whether announcement and expectation agree.
    bool decode_expected_layout(const VoiceWindow& w, const std::vector<SimPacket>& slots,
                                bool due, Bits& pa_bits, Bits& token_bits) const {
        bool ok = true;
        std::vector<CovertPdu> pdus;
        try {
            pdus = pdu_decode_all(w, layer_, slots);
        } catch (const CovertError&) {
            ok = false;
        }
        const size_t expected = due ? 2 : 1;
        if (ok && pdus.size() == expected) {
            const CovertHeader want_token{PayloadKind::Security, 0, true, false};
            const CovertHeader want_pa{PayloadKind::Security, 0, true, true};
            if (due && pdus[0].header != want_pa) ok = false;
            if (pdus[expected - 1].header != want_token) ok = false;
            if (ok) {
                if (due) pa_bits = pdus[0].payload;
                token_bits = pdus[expected - 1].payload;
                return true;
            }
        } else {
            ok = false;
        }
        size_t off = 0;
        if (due) {
            pa_bits = extract_bits_at(w, layer_, 0, kPostAuthPduBits);
            off = kPostAuthPduBits;
        }
        token_bits = extract_bits_at(w, layer_, off, kTokenPduBits);
        return false;
    }

    GatewayConfig cfg_;
    CallPhase phase_ = CallPhase::Setup;
    LotState lot_;
    SignallingHashBuffer sb_;
    ParamChain chain_;
    WatermarkLayer layer_;
    std::mt19937_64 rng_;
    std::optional<Pending> pending_;
    std::vector<WindowVerdict> verdicts_;
    std::vector<std::string> events_;
    CovertStats stats_;
    uint32_t send_counter_ = 0;
    uint32_t recv_counter_ = 0;
    uint32_t ip_base_ = 1;
    size_t rollback_count_ = 0;
    bool teardown_confirmed_ = false;
};

}  // namespace tollgate
