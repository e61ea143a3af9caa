#pragma once

#include <json.hpp>

#include <sstream>
#include <string>

#include "tollgate/simulator.hpp"

namespace tollgate {

// Report serialization is kept apart from the simulator so only the CLI and
// report-focused tests pay for the JSON dependency.
//
// One run produces exactly one JSON document. Keys are emitted in sorted
// order and the transport kind is deliberately not echoed, so the same
// scenario produces byte-identical reports over the in-memory and UDP
// channels.

inline nlohmann::json attack_json(const ScenarioConfig& cfg) {
    nlohmann::json a;
    a["kind"] = to_string(cfg.attack);
    switch (cfg.attack) {
        case AttackKind::None:
            break;
        case AttackKind::FlipVoiceBits:
        case AttackKind::DropPackets:
            a["rate"] = cfg.attack_rate;
            break;
        case AttackKind::TamperCell:
            a["window"] = cfg.attack_window;
            a["sample"] = cfg.attack_sample;
            a["cells"] = cfg.attack_cells;
            break;
        case AttackKind::ReplaceSignalling:
            a["target"] = cfg.attack_target;
            a["field"] = cfg.attack_field;
            a["value"] = cfg.attack_value;
            if (!cfg.attack_raw.empty()) a["raw"] = to_hex(cfg.attack_raw);
            break;
        case AttackKind::InjectTeardown:
            a["after_window"] = cfg.attack_after_window;
            break;
        case AttackKind::ReplayWindow:
            a["record"] = cfg.attack_record;
            a["replay_at"] = cfg.attack_replay_at;
            break;
        case AttackKind::CorruptCovertHeader:
            a["packet"] = cfg.attack_packet;
            break;
    }
    return a;
}

inline nlohmann::json to_json(const RunReport& report) {
    nlohmann::json j;

    nlohmann::json cfg;
    cfg["attack"] = attack_json(report.config);
    cfg["audio"] = report.config.wav_path.empty() ? "synth" : report.config.wav_path;
    cfg["chain_window"] = report.config.chain_window;
    cfg["delta"] = report.config.delta;
    cfg["lot"] = {{"initial", report.config.lot.initial},
                  {"max", report.config.lot.max},
                  {"penalty", report.config.lot.penalty},
                  {"reward", report.config.lot.reward}};
    cfg["min_survival"] = report.config.min_survival;
    cfg["seed"] = report.config.seed;
    cfg["teardown"] = to_string(report.config.teardown);
    cfg["ts_tolerance"] = report.config.ts_tolerance;
    cfg["windows"] = report.config.windows;
    j["config"] = cfg;

    j["attack_applications"] = report.attack_applications;
    j["covert"] = {{"pdus_sent", report.covert.pdus_sent},
                   {"pdus_received", report.covert.pdus_received},
                   {"post_auth_sent", report.covert.post_auth_sent},
                   {"post_auth_checked", report.covert.post_auth_checked},
                   {"post_auth_failures", report.covert.post_auth_failures},
                   {"structural_faults", report.covert.structural_faults}};
    j["detected_window"] = report.detected_window
                               ? nlohmann::json(*report.detected_window)
                               : nlohmann::json(nullptr);
    j["final_lot"] = report.final_lot;
    j["gateway_events"] = report.gateway_events;
    j["outcome"] = to_string(report.outcome);
    j["rollback_windows"] = report.rollback_windows;
    j["tampered"] = report.tampered;
    j["teardown_confirmed"] = report.teardown_confirmed;

    nlohmann::json sig = nlohmann::json::array();
    for (const SignallingReport& s : report.signalling) {
        sig.push_back({{"direction", s.direction},
                       {"ordinal", s.ordinal},
                       {"summary", s.summary},
                       {"teardown_class", s.teardown_class}});
    }
    j["signalling"] = sig;

    nlohmann::json wins = nlohmann::json::array();
    for (const WindowReport& w : report.windows) {
        nlohmann::json g;
        g["decision"] = to_string(w.gateway.decision);
        g["index"] = w.gateway.window_index;
        g["lot_after"] = w.gateway.lot_after;
        g["notify"] = {{"event", to_string(w.gateway.notify.event)},
                       {"termination", w.gateway.notify.termination_id},
                       {"window", w.gateway.notify.window_index}};
        g["post_auth_due"] = w.gateway.post_auth_due;
        g["post_auth_match"] = w.gateway.post_auth_match;
        g["result"] = w.gateway.result == VerifyResult::Match ? "match" : "mismatch";
        g["rollback"] = w.gateway.rollback;
        g["structural_ok"] = w.gateway.structural_ok;
        g["survival"] = w.gateway.survival;
        g["survival_ok"] = w.gateway.survival_ok;
        g["teardown_confirmed"] = w.gateway.teardown_confirmed;
        g["token_match"] = w.gateway.token_match;
        g["ts_ok"] = w.gateway.ts_ok;
        if (w.endpoint) {
            g["e2e"] = {{"result",
                         w.endpoint->result == VerifyResult::Match ? "match" : "mismatch"},
                        {"ts_ok", w.endpoint->ts_ok}};
        } else {
            g["e2e"] = nullptr;
        }
        wins.push_back(g);
    }
    j["windows"] = wins;
    return j;
}

// Human-readable digest of a report document; consumed by `run` (after the
// JSON) and by `report <file>`.
inline std::string summarize(const nlohmann::json& j) {
    std::ostringstream out;
    size_t match = 0, mismatch = 0, e2e_match = 0, e2e_mismatch = 0;
    int lot_min = -1;
    for (const auto& w : j.at("windows")) {
        if (w.at("result") == "match") ++match;
        else ++mismatch;
        int lot = w.at("lot_after").get<int>();
        if (lot_min < 0 || lot < lot_min) lot_min = lot;
        if (!w.at("e2e").is_null()) {
            if (w.at("e2e").at("result") == "match") ++e2e_match;
            else ++e2e_mismatch;
        }
    }
    out << "outcome: " << j.at("outcome").get<std::string>() << "\n";
    out << "windows verified: " << (match + mismatch) << " (" << match << " match, " << mismatch
        << " mismatch)\n";
    out << "end-to-end layer: " << e2e_match << " match, " << e2e_mismatch << " mismatch\n";
    out << "final lot: " << j.at("final_lot").get<int>() << " (min " << (lot_min < 0 ? 0 : lot_min)
        << ")\n";
    if (j.at("detected_window").is_null())
        out << "detected window: none\n";
    else
        out << "detected window: " << j.at("detected_window").get<uint32_t>() << "\n";
    out << "rollbacks: " << j.at("rollback_windows").size() << "\n";
    out << "teardown confirmed: " << (j.at("teardown_confirmed").get<bool>() ? "yes" : "no")
        << "\n";
    const auto& covert = j.at("covert");
    out << "covert pdus: " << covert.at("pdus_sent").get<uint64_t>() << " sent, "
        << covert.at("pdus_received").get<uint64_t>() << " received ("
        << covert.at("post_auth_checked").get<uint64_t>() << " post-auth checks, "
        << covert.at("post_auth_failures").get<uint64_t>() << " failed)\n";
    out << "attack: " << j.at("config").at("attack").at("kind").get<std::string>()
        << " (applications: " << j.at("attack_applications").get<uint64_t>() << ")\n";
    return out.str();
}

}  // namespace tollgate
