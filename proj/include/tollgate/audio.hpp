#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "tollgate/mulaw.hpp"

namespace tollgate {

// 8 kHz narrowband voice, 20 ms frames, 1 s verification windows.
inline constexpr size_t kFrameSamples = 160;
inline constexpr size_t kFramesPerWindow = 50;
inline constexpr size_t kWindowSamples = kFrameSamples * kFramesPerWindow;
inline constexpr uint32_t kSampleRate = 8000;

using PcmFrame = std::array<int16_t, kFrameSamples>;

// One verification window: the unit over which features are computed, tokens
// embedded, and verdicts issued. `index` is the position of the window in the
// call (0-based) and doubles as the logical clock for token timestamps.
struct VoiceWindow {
    std::array<PcmFrame, kFramesPerWindow> frames{};
    uint32_t index = 0;

    int16_t& sample(size_t i) { return frames[i / kFrameSamples][i % kFrameSamples]; }
    int16_t sample(size_t i) const { return frames[i / kFrameSamples][i % kFrameSamples]; }

    bool operator==(const VoiceWindow&) const = default;
};

// Splits a flat sample stream into windows; a ragged tail is zero-padded so a
// short recording still yields a final (partially silent) window.
inline std::vector<VoiceWindow> split_windows(const std::vector<int16_t>& samples) {
    std::vector<VoiceWindow> windows;
    size_t count = (samples.size() + kWindowSamples - 1) / kWindowSamples;
    for (size_t w = 0; w < count; ++w) {
        VoiceWindow win;
        win.index = static_cast<uint32_t>(w);
        for (size_t i = 0; i < kWindowSamples; ++i) {
            size_t src = w * kWindowSamples + i;
            win.sample(i) = src < samples.size() ? samples[src] : int16_t{0};
        }
        windows.push_back(win);
    }
    return windows;
}

inline std::vector<int16_t> join_windows(const std::vector<VoiceWindow>& windows) {
    std::vector<int16_t> samples;
    samples.reserve(windows.size() * kWindowSamples);
    for (const auto& w : windows)
        for (size_t i = 0; i < kWindowSamples; ++i) samples.push_back(w.sample(i));
    return samples;
}

// Model of a PSTN analog hop followed by re-digitization: every sample goes
// through one mu-law companding cycle. Applying this twice equals applying it
// once (see mulaw.hpp), which is the property the embedding depth is sized
// against.
inline VoiceWindow adda_roundtrip(VoiceWindow w) {
    for (auto& frame : w.frames)
        for (auto& s : frame) s = ulaw_roundtrip(s);
    return w;
}

// Deterministic speech-like source: a handful of drifting harmonics under a
// syllable-rate envelope, plus low-level noise. Loud voiced stretches reach
// roughly 85% of full scale so the top mu-law segments are exercised, while
// the envelope valleys provide near-silent frames. Seeded, so every scenario
// regenerates the same corpus.
class SpeechSynth {
  public:
    explicit SpeechSynth(uint64_t seed) : rng_(seed) {
        std::uniform_real_distribution<double> pitch(95.0, 220.0);
        pitch_ = pitch(rng_);
    }

    VoiceWindow next_window() {
        VoiceWindow w;
        w.index = next_index_++;
        for (size_t i = 0; i < kWindowSamples; ++i) {
            double t = static_cast<double>(sample_clock_++) / kSampleRate;
            // Slow pitch drift plus a 3 Hz syllable envelope offset per call.
            double f0 = pitch_ * (1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * 0.31 * t));
            phase0_ += 2.0 * std::numbers::pi * f0 / kSampleRate;
            double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * 3.0 * t + env_phase_);
            env = env * env;  // sharpen valleys toward silence
            double v = std::sin(phase0_) + 0.5 * std::sin(2.0 * phase0_ + 0.7) +
                       0.25 * std::sin(3.0 * phase0_ + 1.9);
            v = v / 1.75 * env;
            v += noise_(rng_) * 0.004;
            double scaled = v * 0.85 * 32767.0;
            if (scaled > 32767.0) scaled = 32767.0;
            if (scaled < -32768.0) scaled = -32768.0;
            w.sample(i) = static_cast<int16_t>(std::lrint(scaled));
        }
        return w;
    }

    std::vector<VoiceWindow> windows(size_t count) {
        std::vector<VoiceWindow> out;
        out.reserve(count);
        for (size_t i = 0; i < count; ++i) out.push_back(next_window());
        return out;
    }

  private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_{0.0, 1.0};
    double pitch_ = 120.0;
    double phase0_ = 0.0;
    double env_phase_ = 0.0;
    uint64_t sample_clock_ = 0;
    uint32_t next_index_ = 0;
};

}  // namespace tollgate
