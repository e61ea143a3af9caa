#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tollgate/adversary.hpp"
#include "tollgate/audio.hpp"
#include "tollgate/channel.hpp"
#include "tollgate/gateway.hpp"
#include "tollgate/signalling.hpp"
#include "tollgate/token.hpp"
#include "tollgate/watermark.hpp"
#include "tollgate/wav.hpp"

namespace tollgate {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── PSTN endpoints ───────────────────────────────────────────────────────────
// The phones on the analog tails. They see no signalling, so their tokens
// bind voice features and window position under the end-to-end secret, with
// the signalling half of the construction pinned to the all-zero digest.

struct EndpointConfig {
    uint32_t local_id = 0;
    uint32_t peer_id = 0;
    ByteVec pass;
    uint16_t delta = kDefaultDelta;
    uint32_t ts_tolerance = 0;
    uint64_t seed = 1;
};

struct EndpointVerdict {
    uint32_t window_index = 0;
    VerifyResult result = VerifyResult::Mismatch;
    bool ts_ok = false;
};

class Endpoint {
  public:
    explicit Endpoint(EndpointConfig cfg)
        : cfg_(std::move(cfg)), layer_{LayerId::Endpoint, cfg_.delta}, rng_(cfg_.seed) {}

    static Digest no_signalling_sm() { return Digest{}; }

    // Marks one window and pushes it down the analog tail toward the gateway.
    VoiceWindow send_window(const VoiceWindow& source) {
        VoiceFeature vf = voice_feature(source);
        TokenParams params;
        params.r = static_cast<uint32_t>(rng_());
        params.ts = send_counter_++;
        params.id = cfg_.peer_id;
        params.pass = cfg_.pass;
        Token token = build_token(no_signalling_sm(), vf.digest, params);
        VoiceWindow w = embed_bits(source, layer_, bytes_to_bits(token.serialize()));
        return adda_roundtrip(w);
    }

    // Receives one window from the far gateway's analog tail and checks the
    // end-to-end mark.
    EndpointVerdict receive_window(const VoiceWindow& from_gateway) {
        VoiceWindow w = adda_roundtrip(from_gateway);
        Token token =
            Token::parse(bits_to_bytes(extract_bits(w, layer_, Token::kWireBits)));
        VoiceFeature vf = voice_feature(w);
        EndpointVerdict v;
        v.window_index = recv_counter_;
        v.result = verify_token(token, no_signalling_sm(), vf.digest, cfg_.pass, cfg_.local_id);
        v.ts_ok = timestamp_within(token.ts, recv_counter_, cfg_.ts_tolerance);
        ++recv_counter_;
        verdicts_.push_back(v);
        return v;
    }

    const std::vector<EndpointVerdict>& verdicts() const { return verdicts_; }

  private:
    EndpointConfig cfg_;
    WatermarkLayer layer_;
    std::mt19937_64 rng_;
    uint32_t send_counter_ = 0;
    uint32_t recv_counter_ = 0;
    std::vector<EndpointVerdict> verdicts_;
};

// ── scenario configuration ───────────────────────────────────────────────────
// Plain `key = value` text, one pair per line, '#' comments. Unknown keys are
// rejected so a typo cannot silently run the wrong experiment.

// Normal hangs up at the end of the configured media run; MidCall hangs up
// halfway through (the call ends early, gracefully); None never sends a
// release at all.
enum class TeardownMode : uint8_t { None, Normal, MidCall };
enum class ChannelKind : uint8_t { Memory, Udp };
enum class AttackKind : uint8_t {
    None,
    FlipVoiceBits,
    TamperCell,
    ReplaceSignalling,
    InjectTeardown,
    ReplayWindow,
    CorruptCovertHeader,
    DropPackets,
};
enum class Outcome : uint8_t {
    CompletedClean,
    GracefulTeardown,
    DetectedAndTornDown,
    Undetected,
};

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::CompletedClean: return "completed_clean";
        case Outcome::GracefulTeardown: return "graceful_teardown";
        case Outcome::DetectedAndTornDown: return "detected_and_torn_down";
        case Outcome::Undetected: return "undetected";
    }
    return "?";
}

inline const char* to_string(TeardownMode t) {
    switch (t) {
        case TeardownMode::None: return "none";
        case TeardownMode::Normal: return "normal";
        case TeardownMode::MidCall: return "midcall";
    }
    return "?";
}

inline const char* to_string(AttackKind a) {
    switch (a) {
        case AttackKind::None: return "none";
        case AttackKind::FlipVoiceBits: return "flip_voice_bits";
        case AttackKind::TamperCell: return "tamper_cell";
        case AttackKind::ReplaceSignalling: return "replace_signalling";
        case AttackKind::InjectTeardown: return "inject_teardown";
        case AttackKind::ReplayWindow: return "replay_window";
        case AttackKind::CorruptCovertHeader: return "corrupt_covert_header";
        case AttackKind::DropPackets: return "drop_packets";
    }
    return "?";
}

inline const char* kSeedEnvVar = "TOLLGATE_SEED";

struct ScenarioConfig {
    uint64_t seed = 1;
    uint32_t windows = 12;
    std::string wav_path;  // empty: synthetic speech seeded from `seed`
    TeardownMode teardown = TeardownMode::Normal;
    ChannelKind channel = ChannelKind::Memory;
    uint16_t delta = kDefaultDelta;
    uint32_t ts_tolerance = 0;
    LotPolicy lot;
    size_t chain_window = kDefaultChainWindow;
    double min_survival = 0.95;
    std::string pass = "tollgate-gw";
    std::string e2e_pass = "tollgate-e2e";

    AttackKind attack = AttackKind::None;
    double attack_rate = 0.0;
    uint32_t attack_window = 0;
    uint32_t attack_sample = 0;
    int attack_cells = 1;
    uint32_t attack_target = 0;
    std::string attack_field;
    std::string attack_value;
    ByteVec attack_raw;
    uint32_t attack_record = 0;
    uint32_t attack_replay_at = 0;
    uint64_t attack_packet = 0;
    uint32_t attack_after_window = 0;

    std::optional<Outcome> expect;
    std::optional<bool> expect_rollback;
    std::optional<uint32_t> expect_detected_window;

    static ScenarioConfig parse(const std::string& text);
};

namespace detail {

inline uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(value, &pos, 0);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ScenarioError("scenario: bad integer for '" + key + "': " + value);
    }
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ScenarioError("scenario: bad number for '" + key + "': " + value);
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ScenarioError("scenario: bad boolean for '" + key + "': " + value);
}

inline Outcome parse_outcome(const std::string& key, const std::string& value) {
    if (value == "completed_clean") return Outcome::CompletedClean;
    if (value == "graceful_teardown") return Outcome::GracefulTeardown;
    if (value == "detected_and_torn_down") return Outcome::DetectedAndTornDown;
    if (value == "undetected") return Outcome::Undetected;
    throw ScenarioError("scenario: bad outcome for '" + key + "': " + value);
}

}  // namespace detail

inline ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    ScenarioConfig cfg;
    bool seed_set = false;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("scenario line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(trimmed.substr(0, eq));
        std::string value = detail::trim(trimmed.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ScenarioError("scenario line " + std::to_string(lineno) + ": empty key or value");

        if (key == "seed") {
            cfg.seed = detail::parse_u64(key, value);
            seed_set = true;
        } else if (key == "windows") {
            cfg.windows = static_cast<uint32_t>(detail::parse_u64(key, value));
            if (cfg.windows == 0) throw ScenarioError("scenario: windows must be positive");
        } else if (key == "audio_wav") {
            cfg.wav_path = value;
        } else if (key == "teardown") {
            if (value == "none") cfg.teardown = TeardownMode::None;
            else if (value == "normal") cfg.teardown = TeardownMode::Normal;
            else if (value == "midcall") cfg.teardown = TeardownMode::MidCall;
            else throw ScenarioError("scenario: teardown must be none|normal|midcall");
        } else if (key == "channel") {
            if (value == "memory") cfg.channel = ChannelKind::Memory;
            else if (value == "udp") cfg.channel = ChannelKind::Udp;
            else throw ScenarioError("scenario: channel must be memory|udp");
        } else if (key == "delta") {
            cfg.delta = static_cast<uint16_t>(detail::parse_u64(key, value));
            if (cfg.delta == 0) throw ScenarioError("scenario: delta must be positive");
        } else if (key == "ts_tolerance") {
            cfg.ts_tolerance = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "lot_initial") {
            cfg.lot.initial = static_cast<int>(detail::parse_u64(key, value));
        } else if (key == "lot_max") {
            cfg.lot.max = static_cast<int>(detail::parse_u64(key, value));
        } else if (key == "lot_reward") {
            cfg.lot.reward = static_cast<int>(detail::parse_u64(key, value));
        } else if (key == "lot_penalty") {
            cfg.lot.penalty = static_cast<int>(detail::parse_u64(key, value));
        } else if (key == "chain_window") {
            cfg.chain_window = static_cast<size_t>(detail::parse_u64(key, value));
        } else if (key == "min_survival") {
            cfg.min_survival = detail::parse_double(key, value);
        } else if (key == "pass") {
            cfg.pass = value;
        } else if (key == "e2e_pass") {
            cfg.e2e_pass = value;
        } else if (key == "attack") {
            if (value == "none") cfg.attack = AttackKind::None;
            else if (value == "flip_voice_bits") cfg.attack = AttackKind::FlipVoiceBits;
            else if (value == "tamper_cell") cfg.attack = AttackKind::TamperCell;
            else if (value == "replace_signalling") cfg.attack = AttackKind::ReplaceSignalling;
            else if (value == "inject_teardown") cfg.attack = AttackKind::InjectTeardown;
            else if (value == "replay_window") cfg.attack = AttackKind::ReplayWindow;
            else if (value == "corrupt_covert_header") cfg.attack = AttackKind::CorruptCovertHeader;
            else if (value == "drop_packets") cfg.attack = AttackKind::DropPackets;
            else throw ScenarioError("scenario: unknown attack: " + value);
        } else if (key == "attack_rate") {
            cfg.attack_rate = detail::parse_double(key, value);
        } else if (key == "attack_window") {
            cfg.attack_window = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "attack_sample") {
            cfg.attack_sample = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "attack_cells") {
            cfg.attack_cells = static_cast<int>(detail::parse_u64(key, value));
        } else if (key == "attack_target") {
            cfg.attack_target = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "attack_field") {
            cfg.attack_field = value;
        } else if (key == "attack_value") {
            cfg.attack_value = value;
        } else if (key == "attack_raw_hex") {
            cfg.attack_raw = from_hex(value);
        } else if (key == "attack_record") {
            cfg.attack_record = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "attack_replay_at") {
            cfg.attack_replay_at = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "attack_packet") {
            cfg.attack_packet = detail::parse_u64(key, value);
        } else if (key == "attack_after_window") {
            cfg.attack_after_window = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else if (key == "expect") {
            cfg.expect = detail::parse_outcome(key, value);
        } else if (key == "expect_rollback") {
            cfg.expect_rollback = detail::parse_bool(key, value);
        } else if (key == "expect_detected_window") {
            cfg.expect_detected_window = static_cast<uint32_t>(detail::parse_u64(key, value));
        } else {
            throw ScenarioError("scenario: unknown key: " + key);
        }
    }
    if (!seed_set) {
        if (const char* env = std::getenv(kSeedEnvVar)) {
            cfg.seed = detail::parse_u64(kSeedEnvVar, env);
        }
    }
    return cfg;
}

// ── run report ───────────────────────────────────────────────────────────────

struct WindowReport {
    WindowVerdict gateway;
    std::optional<EndpointVerdict> endpoint;
};

struct SignallingReport {
    uint32_t ordinal = 0;
    std::string direction;  // "a_to_b" | "b_to_a" | "injected"
    std::string summary;    // "INVITE" / "183" / ...
    bool teardown_class = false;
};

struct RunReport {
    ScenarioConfig config;
    Outcome outcome = Outcome::CompletedClean;
    std::optional<uint32_t> detected_window;
    bool tampered = false;
    uint64_t attack_applications = 0;
    bool teardown_confirmed = false;
    std::vector<uint32_t> rollback_windows;
    std::vector<WindowReport> windows;
    std::vector<SignallingReport> signalling;
    std::vector<std::string> gateway_events;
    CovertStats covert;
    int final_lot = 0;
    uint16_t calibrated_delta = 0;
};

// ── the call itself ──────────────────────────────────────────────────────────
// One A-calls-B conversation across PSTN -> MG A -> IP -> MG B -> PSTN, media
// flowing A to B, with an optional on-path adversary. Deterministic for a
// given config.

class CallSimulator {
  public:
    explicit CallSimulator(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}

    RunReport run() {
        RunReport report;
        report.config = cfg_;
        report.calibrated_delta = cfg_.delta;

        DuplexLink link =
            cfg_.channel == ChannelKind::Udp ? make_udp_link() : make_memory_link();
        Adversary adversary(build_actions(), cfg_.seed + 3);

        GatewayConfig ga;
        ga.local_id = kGatewayAId;
        ga.peer_id = kGatewayBId;
        ga.pass = to_bytes(cfg_.pass);
        ga.delta = cfg_.delta;
        ga.ts_tolerance = cfg_.ts_tolerance;
        ga.lot = cfg_.lot;
        ga.chain_window = cfg_.chain_window;
        ga.min_carrier_survival = cfg_.min_survival;
        ga.termination_id = "tg-a/0";
        ga.seed = cfg_.seed + 2;
        GatewayConfig gb = ga;
        gb.local_id = kGatewayBId;
        gb.peer_id = kGatewayAId;
        gb.termination_id = "tg-b/0";
        MediaGateway mga(ga), mgb(gb);

        EndpointConfig ea;
        ea.local_id = kEndpointAId;
        ea.peer_id = kEndpointBId;
        ea.pass = to_bytes(cfg_.e2e_pass);
        ea.delta = cfg_.delta;
        ea.ts_tolerance = cfg_.ts_tolerance;
        ea.seed = cfg_.seed + 1;
        EndpointConfig eb = ea;
        eb.local_id = kEndpointBId;
        eb.peer_id = kEndpointAId;
        Endpoint epa(ea), epb(eb);

        SpeechSynth synth(cfg_.seed);
        std::vector<VoiceWindow> wav_windows;
        if (!cfg_.wav_path.empty()) {
            wav_windows = split_windows(read_wav(cfg_.wav_path).samples);
            if (wav_windows.empty())
                throw ScenarioError("scenario: audio_wav file holds no samples: " + cfg_.wav_path);
        }

        // ── call setup: INVITE/IAM out, 183/ACM and 200/ANM back ──
        send_signalling(report, adversary, link, mga, mgb, /*a_to_b=*/true,
                        make_invite());
        send_signalling(report, adversary, link, mga, mgb, /*a_to_b=*/false,
                        make_response(183, "Session Progress", IsupType::Acm));
        send_signalling(report, adversary, link, mga, mgb, /*a_to_b=*/false,
                        make_response(200, "OK", IsupType::Anm));
        mga.activate();
        mgb.activate();

        // ── media ──
        uint32_t bye_before_window = UINT32_MAX;
        if (cfg_.teardown == TeardownMode::Normal)
            bye_before_window = cfg_.windows - 1;
        else if (cfg_.teardown == TeardownMode::MidCall)
            bye_before_window = cfg_.windows / 2;
        for (uint32_t w = 0; w < cfg_.windows; ++w) {
            if (w == bye_before_window)
                send_signalling(report, adversary, link, mga, mgb, /*a_to_b=*/true, make_bye());

            VoiceWindow source;
            if (wav_windows.empty()) {
                source = synth.next_window();
            } else {
                source = wav_windows[w % wav_windows.size()];
                source.index = w;
            }
            VoiceWindow from_endpoint = epa.send_window(source);
            SentWindow sent = mga.send_window(from_endpoint);
            for (const SimPacket& p : sent.packets)
                for (Datagram& out : adversary.transit(Datagram{Datagram::Kind::Media,
                                                                p.serialize()}))
                    link.a_to_b->send(std::move(out));

            // Drain in arrival order: media first, then anything spliced in
            // behind the window (a forged release arrives there).
            std::vector<SimPacket> arrived;
            std::vector<SipMessage> trailing_signalling;
            while (auto d = link.a_to_b->recv()) {
                if (d->kind == Datagram::Kind::Media) {
                    arrived.push_back(SimPacket::parse(d->bytes));
                } else {
                    SipMessage msg = parse_sip(d->bytes);
                    trailing_signalling.push_back(std::move(msg));
                }
            }

            ReceivedWindow rec = mgb.receive_window(arrived);
            if (rec.verdict.rollback) report.rollback_windows.push_back(rec.verdict.window_index);

            for (SipMessage& msg : trailing_signalling) {
                SignallingReport sr;
                sr.ordinal = static_cast<uint32_t>(report.signalling.size());
                sr.direction = "injected";
                sr.summary = msg.is_request() ? msg.request().method
                                              : std::to_string(msg.response().status);
                sr.teardown_class = MediaGateway::is_teardown_message(msg);
                report.signalling.push_back(sr);
                mgb.hash_signalling(msg);
            }

            if (rec.verdict.decision == MgcDecision::Teardown) {
                report.detected_window = rec.verdict.window_index;
                push_window_report(report, rec.verdict, std::nullopt);
                break;
            }

            EndpointVerdict ev = epb.receive_window(rec.window);
            push_window_report(report, rec.verdict, ev);

            // An authenticated release stops the media there and then; any
            // remaining configured windows are simply never sent.
            if (rec.verdict.teardown_confirmed) break;
        }

        // ── release handshake completes only when the far side confirmed ──
        if (mgb.teardown_confirmed()) {
            send_signalling(report, adversary, link, mga, mgb, /*a_to_b=*/false,
                            make_response(200, "OK", IsupType::Rlc, /*cseq_bye=*/true));
            mga.complete_teardown();
        }

        report.tampered = adversary.tampered();
        report.attack_applications = adversary.applications();
        report.teardown_confirmed = mgb.teardown_confirmed();
        report.final_lot = mgb.lot();
        report.gateway_events = mgb.event_log();
        report.covert = mgb.covert_stats();
        report.covert.pdus_sent = mga.covert_stats().pdus_sent;
        report.covert.post_auth_sent = mga.covert_stats().post_auth_sent;
        report.outcome = decide_outcome(report, mgb);
        return report;
    }

    static constexpr uint32_t kGatewayAId = 0x0A;
    static constexpr uint32_t kGatewayBId = 0x0B;
    static constexpr uint32_t kEndpointAId = 0x1A;
    static constexpr uint32_t kEndpointBId = 0x1B;

  private:
    std::vector<AdversaryAction> build_actions() const {
        std::vector<AdversaryAction> actions;
        switch (cfg_.attack) {
            case AttackKind::None:
                break;
            case AttackKind::FlipVoiceBits:
                actions.push_back(FlipVoiceBits{cfg_.attack_rate});
                break;
            case AttackKind::TamperCell:
                actions.push_back(
                    TamperCell{cfg_.attack_window, cfg_.attack_sample, cfg_.attack_cells,
                               cfg_.delta});
                break;
            case AttackKind::ReplaceSignalling:
                actions.push_back(ReplaceSignalling{cfg_.attack_target, cfg_.attack_field,
                                                    cfg_.attack_value, cfg_.attack_raw});
                break;
            case AttackKind::InjectTeardown:
                actions.push_back(InjectTeardown{cfg_.attack_after_window});
                break;
            case AttackKind::ReplayWindow:
                actions.push_back(ReplayWindow{cfg_.attack_record, cfg_.attack_replay_at});
                break;
            case AttackKind::CorruptCovertHeader:
                actions.push_back(CorruptCovertHeader{cfg_.attack_packet});
                break;
            case AttackKind::DropPackets:
                actions.push_back(DropPackets{cfg_.attack_rate});
                break;
        }
        return actions;
    }

    // All signalling passes a well-behaved proxy that retouches Via, so the
    // canonical-form hashing is exercised on every message.
    static void proxy_touch(SipMessage& msg) {
        for (auto& [n, v] : msg.headers)
            if (n == "Via") {
                v += ";received=127.0.0.1";
                return;
            }
    }

    void send_signalling(RunReport& report, Adversary& adversary, DuplexLink& link,
                         MediaGateway& mga, MediaGateway& mgb, bool a_to_b,
                         const SipMessage& msg) {
        MediaGateway& sender = a_to_b ? mga : mgb;
        MediaGateway& receiver = a_to_b ? mgb : mga;
        Channel& channel = a_to_b ? *link.a_to_b : *link.b_to_a;

        sender.hash_signalling(msg);
        SipMessage in_transit = msg;
        proxy_touch(in_transit);
        for (Datagram& out :
             adversary.transit(Datagram{Datagram::Kind::Signalling, serialize_sip(in_transit)}))
            channel.send(std::move(out));

        while (auto d = channel.recv()) {
            if (d->kind != Datagram::Kind::Signalling)
                throw ScenarioError("simulator: unexpected media during signalling exchange");
            SipMessage received = parse_sip(d->bytes);
            SignallingReport sr;
            sr.ordinal = static_cast<uint32_t>(report.signalling.size());
            sr.direction = a_to_b ? "a_to_b" : "b_to_a";
            sr.summary = received.is_request() ? received.request().method
                                               : std::to_string(received.response().status);
            sr.teardown_class = MediaGateway::is_teardown_message(received);
            report.signalling.push_back(sr);
            receiver.hash_signalling(received);
        }
    }

    static void push_window_report(RunReport& report, const WindowVerdict& gw,
                                   std::optional<EndpointVerdict> ep) {
        report.windows.push_back(WindowReport{gw, std::move(ep)});
    }

    Outcome decide_outcome(const RunReport& report, const MediaGateway& mgb) const {
        if (report.detected_window) return Outcome::DetectedAndTornDown;
        // A hangup that cuts the call short is a graceful teardown; a release
        // that merely closes out the full configured run is a clean call.
        if (mgb.teardown_confirmed() && report.windows.size() < cfg_.windows)
            return Outcome::GracefulTeardown;
        if (report.tampered) {
            bool any_detection = !report.rollback_windows.empty();
            for (const WindowReport& w : report.windows) {
                if (w.gateway.result == VerifyResult::Mismatch) any_detection = true;
                if (w.endpoint &&
                    (w.endpoint->result == VerifyResult::Mismatch || !w.endpoint->ts_ok))
                    any_detection = true;
            }
            if (!any_detection) return Outcome::Undetected;
        }
        return Outcome::CompletedClean;
    }

    // ── canned call-flow messages ──

    SipMessage make_invite() const {
        SipMessage m;
        m.start = SipRequest{"INVITE", "sip:+15551002@mg-b.example;user=phone"};
        m.headers.emplace_back("Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK1");
        m.headers.emplace_back("Max-Forwards", "70");
        m.headers.emplace_back("From", "<sip:+15551001@mg-a.example;user=phone>;tag=a1");
        m.headers.emplace_back("To", "<sip:+15551002@mg-b.example;user=phone>");
        m.headers.emplace_back("Call-ID", call_id());
        m.headers.emplace_back("CSeq", "1 INVITE");
        m.headers.emplace_back("Contact", "<sip:mg-a.example>");
        IsupMessage iam;
        iam.cic = 0x025;
        iam.type = IsupType::Iam;
        iam.params = {0x00, 0x01, 0x0A};  // nature of connection / forward call indicators
        attach_isup(m, iam);
        return m;
    }

    SipMessage make_response(int status, const std::string& reason, IsupType isup_type,
                             bool cseq_bye = false) const {
        SipMessage m;
        m.start = SipResponse{status, reason};
        m.headers.emplace_back("Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK1");
        m.headers.emplace_back("From", "<sip:+15551001@mg-a.example;user=phone>;tag=a1");
        m.headers.emplace_back("To", "<sip:+15551002@mg-b.example;user=phone>;tag=b1");
        m.headers.emplace_back("Call-ID", call_id());
        m.headers.emplace_back("CSeq", cseq_bye ? "2 BYE" : "1 INVITE");
        IsupMessage isup;
        isup.cic = 0x025;
        isup.type = isup_type;
        isup.params = isup_type == IsupType::Acm ? ByteVec{0x11, 0x14} : ByteVec{0x00};
        attach_isup(m, isup);
        return m;
    }

    SipMessage make_bye() const {
        SipMessage m;
        m.start = SipRequest{"BYE", "sip:+15551002@mg-b.example;user=phone"};
        m.headers.emplace_back("Via", "SIP/2.0/UDP mg-a.example;branch=z9hG4bK2");
        m.headers.emplace_back("Max-Forwards", "70");
        m.headers.emplace_back("From", "<sip:+15551001@mg-a.example;user=phone>;tag=a1");
        m.headers.emplace_back("To", "<sip:+15551002@mg-b.example;user=phone>;tag=b1");
        m.headers.emplace_back("Call-ID", call_id());
        m.headers.emplace_back("CSeq", "2 BYE");
        IsupMessage rel;
        rel.cic = 0x025;
        rel.type = IsupType::Rel;
        rel.params = {0x02, 0x80, 0x90};  // cause: normal clearing
        attach_isup(m, rel);
        return m;
    }

    std::string call_id() const { return "tollgate-" + std::to_string(cfg_.seed) + "@mg-a"; }

    ScenarioConfig cfg_;
};

}  // namespace tollgate
