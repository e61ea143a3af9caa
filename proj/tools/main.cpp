// tollgate command-line front end.
//
//   run <scenario.cfg>     execute one simulated call, print report + summary
//   calibrate-delta <wav>  sweep lattice step sizes against a voice corpus
//   embed                  stamp a payload into each window of an audio file
//   extract                read a layer's bits back out of an audio file
//   report <log>           print the human summary of a saved JSON report
//
// `run` exits 0 only when the scenario executed and its outcome matched the
// config's expect clause (when present); 2 flags an expectation mismatch and
// 1 any execution fault.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tollgate/report.hpp"
#include "tollgate/tollgate.hpp"

namespace {

using namespace tollgate;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Audio I/O for the file-level tools: WAV by default, --raw switches to a
// bare little-endian 16-bit sample dump.
std::vector<int16_t> read_samples(const std::string& path, bool raw) {
    if (!raw) return read_wav(path).samples;
    std::string bytes = read_file(path);
    if (bytes.size() % 2 != 0)
        throw std::runtime_error("raw sample file has an odd byte count: " + path);
    std::vector<int16_t> samples(bytes.size() / 2);
    for (size_t i = 0; i < samples.size(); ++i) {
        uint16_t lo = static_cast<uint8_t>(bytes[2 * i]);
        uint16_t hi = static_cast<uint8_t>(bytes[2 * i + 1]);
        samples[i] = static_cast<int16_t>(lo | (hi << 8));
    }
    return samples;
}

void write_samples(const std::string& path, const std::vector<int16_t>& samples, bool raw) {
    if (!raw) {
        write_wav(path, samples, kSampleRate);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (int16_t s : samples) {
        uint16_t u = static_cast<uint16_t>(s);
        char b[2] = {static_cast<char>(u & 0xFF), static_cast<char>(u >> 8)};
        out.write(b, 2);
    }
}

WatermarkLayer make_layer(int layer, uint16_t delta) {
    if (layer != 1 && layer != 2) throw std::runtime_error("--layer must be 1 or 2");
    return WatermarkLayer{layer == 1 ? LayerId::Endpoint : LayerId::Gateway, delta};
}

int cmd_run(const std::string& cfg_path, const std::string& out_path, bool json_only) {
    ScenarioConfig cfg = ScenarioConfig::parse(read_file(cfg_path));
    CallSimulator sim(cfg);
    RunReport r = sim.run();
    nlohmann::json j = to_json(r);
    std::string doc = j.dump(2);
    std::cout << doc << "\n";
    if (!json_only) std::cout << summarize(j);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << doc << "\n";
    }
    bool expectations_ok = true;
    if (cfg.expect && r.outcome != *cfg.expect) {
        std::cerr << "expectation failed: outcome " << to_string(r.outcome) << ", expected "
                  << to_string(*cfg.expect) << "\n";
        expectations_ok = false;
    }
    if (cfg.expect_rollback && *cfg.expect_rollback != !r.rollback_windows.empty()) {
        std::cerr << "expectation failed: rollback "
                  << (r.rollback_windows.empty() ? "absent" : "present") << ", expected "
                  << (*cfg.expect_rollback ? "present" : "absent") << "\n";
        expectations_ok = false;
    }
    if (cfg.expect_detected_window &&
        (!r.detected_window || *r.detected_window != *cfg.expect_detected_window)) {
        std::cerr << "expectation failed: detected window "
                  << (r.detected_window ? std::to_string(*r.detected_window) : "none")
                  << ", expected " << *cfg.expect_detected_window << "\n";
        expectations_ok = false;
    }
    return expectations_ok ? 0 : 2;
}

int cmd_calibrate(const std::string& audio_path, bool raw) {
    std::vector<VoiceWindow> windows = split_windows(read_samples(audio_path, raw));
    if (windows.empty()) throw std::runtime_error("no audio in " + audio_path);
    std::vector<DeltaCalibration> results = calibrate_delta(windows);
    std::cout << "delta  ber\n";
    for (const DeltaCalibration& r : results) {
        char line[48];
        std::snprintf(line, sizeof(line), "%5u  %.6f\n", r.delta, r.ber);
        std::cout << line;
    }
    std::cout << "calibrated delta: " << pick_delta(results) << "\n";
    return 0;
}

int cmd_embed(const std::string& in_path, const std::string& out_path, int layer, uint16_t delta,
              const std::string& payload_hex, bool raw) {
    WatermarkLayer l = make_layer(layer, delta);
    Bits payload = bytes_to_bits(from_hex(payload_hex));
    if (payload.size() > kLayerCapacityBits)
        throw std::runtime_error("payload exceeds layer capacity of " +
                                 std::to_string(kLayerCapacityBits) + " bits per window");
    std::vector<VoiceWindow> windows = split_windows(read_samples(in_path, raw));
    if (windows.empty()) throw std::runtime_error("no audio in " + in_path);
    for (VoiceWindow& w : windows) w = embed_bits(w, l, payload);
    write_samples(out_path, join_windows(windows), raw);
    std::cout << "embedded " << payload.size() << " bits/window into layer " << layer << " of "
              << windows.size() << " windows\n";
    return 0;
}

int cmd_extract(const std::string& in_path, int layer, uint16_t delta, size_t nbits, bool raw) {
    if (nbits == 0 || nbits % 8 != 0 || nbits > kLayerCapacityBits)
        throw std::runtime_error("--bits must be a positive multiple of 8, at most " +
                                 std::to_string(kLayerCapacityBits));
    WatermarkLayer l = make_layer(layer, delta);
    std::vector<VoiceWindow> windows = split_windows(read_samples(in_path, raw));
    if (windows.empty()) throw std::runtime_error("no audio in " + in_path);
    for (const VoiceWindow& w : windows)
        std::cout << to_hex(bits_to_bytes(extract_bits(w, l, nbits))) << "\n";
    return 0;
}

int cmd_report(const std::string& log_path) {
    nlohmann::json j = nlohmann::json::parse(read_file(log_path));
    std::cout << summarize(j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voice-path authentication simulator and watermark tools"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto* run = app.add_subcommand("run", "execute a scenario config");
    std::string run_cfg;
    std::string run_out;
    bool run_json_only = false;
    run->add_option("config", run_cfg, "scenario config file")->required();
    run->add_option("--out", run_out, "also write the JSON report to this file");
    run->add_flag("--json-only", run_json_only, "suppress the human summary");
    run->callback([&] { action = [&] { return cmd_run(run_cfg, run_out, run_json_only); }; });

    auto* cal = app.add_subcommand("calibrate-delta", "sweep lattice steps over a voice file");
    std::string cal_in;
    bool cal_raw = false;
    cal->add_option("audio", cal_in, "mono 16-bit PCM WAV (or raw with --raw)")->required();
    cal->add_flag("--raw", cal_raw, "input is raw little-endian 16-bit samples");
    cal->callback([&] { action = [&] { return cmd_calibrate(cal_in, cal_raw); }; });

    auto* emb = app.add_subcommand("embed", "stamp a payload into every window of a file");
    std::string emb_in, emb_out, emb_payload;
    int emb_layer = 1;
    uint16_t emb_delta = kDefaultDelta;
    bool emb_raw = false;
    emb->add_option("--in", emb_in, "input audio file")->required();
    emb->add_option("--out", emb_out, "output audio file")->required();
    emb->add_option("--payload", emb_payload, "hex payload, embedded per window")->required();
    emb->add_option("--layer", emb_layer, "watermark layer (1 or 2)");
    emb->add_option("--delta", emb_delta, "lattice step size");
    emb->add_flag("--raw", emb_raw, "treat input/output as raw little-endian 16-bit samples");
    emb->callback([&] {
        action = [&] { return cmd_embed(emb_in, emb_out, emb_layer, emb_delta, emb_payload, emb_raw); };
    });

    auto* ext = app.add_subcommand("extract", "read a layer's bits back out of a file");
    std::string ext_in;
    int ext_layer = 1;
    uint16_t ext_delta = kDefaultDelta;
    size_t ext_bits = Token::kWireBits;
    bool ext_raw = false;
    ext->add_option("--in", ext_in, "input audio file")->required();
    ext->add_option("--layer", ext_layer, "watermark layer (1 or 2)");
    ext->add_option("--delta", ext_delta, "lattice step size");
    ext->add_option("--bits", ext_bits, "bits per window to extract (multiple of 8)");
    ext->add_flag("--raw", ext_raw, "input is raw little-endian 16-bit samples");
    ext->callback(
        [&] { action = [&] { return cmd_extract(ext_in, ext_layer, ext_delta, ext_bits, ext_raw); }; });

    auto* rep = app.add_subcommand("report", "summarize a saved JSON report");
    std::string rep_in;
    rep->add_option("log", rep_in, "JSON report file written by run --out")->required();
    rep->callback([&] { action = [&] { return cmd_report(rep_in); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
