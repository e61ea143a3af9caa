#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "tollgate/audio.hpp"
#include "tollgate/bytes.hpp"
#include "tollgate/hash.hpp"
#include "tollgate/mulaw.hpp"

namespace tollgate {

// Two independent watermark layers share each window through a fixed sample
// partition: layer 1 (written by the calling endpoint, read by the far
// endpoint) owns indices 0 mod 4, layer 2 (written and read by the media
// gateways) owns indices 2 mod 4. Odd indices are never written; they stay
// voice-only and are what the feature digest summarizes. 2000 carrier samples
// per layer per 1 s window.
enum class LayerId : uint8_t { Endpoint = 1, Gateway = 2 };

inline constexpr size_t kLayerCapacityBits = kWindowSamples / 4;

// Quantization step for the index-modulation lattice. Calibrated against the
// synthetic corpus with tools `calibrate-delta`: 1024 is the smallest
// power-of-two step whose cells survive mu-law companding. Companding moves
// a multiple of 1024 by at most 380 < 512 = delta/2, so extraction lands in
// the right cell; multiples of 512 also move up to 380, which overruns that
// lattice's half-step of 256 in the top segment.
inline constexpr uint16_t kDefaultDelta = 1024;

struct WatermarkLayer {
    LayerId id = LayerId::Endpoint;
    uint16_t delta = kDefaultDelta;
};

inline size_t layer_stride_offset(LayerId id) {
    return id == LayerId::Endpoint ? 0 : 2;
}

// Window-global sample indices owned by the layer, in embedding order.
inline std::vector<size_t> layer_positions(const WatermarkLayer& layer, const VoiceWindow&) {
    std::vector<size_t> pos;
    pos.reserve(kLayerCapacityBits);
    for (size_t i = layer_stride_offset(layer.id); i < kWindowSamples; i += 4) pos.push_back(i);
    return pos;
}

// ── QIM lattice ──────────────────────────────────────────────────────────────
// Bit b lives on the lattice { 2k*delta + b*delta : k in Z }. Embedding moves
// a sample to the nearest point of the target lattice (at most delta away);
// extraction takes the parity of the nearest multiple of delta.

inline int16_t qim_embed_sample(int16_t s, int bit, uint16_t delta) {
    const double step = 2.0 * static_cast<double>(delta);
    long long k = std::llround((static_cast<double>(s) - bit * delta) / step);
    long long v = k * 2 * static_cast<long long>(delta) + bit * static_cast<long long>(delta);
    if (v > 32767) v -= 2 * static_cast<long long>(delta);
    if (v < -32768) v += 2 * static_cast<long long>(delta);
    return static_cast<int16_t>(v);
}

inline int qim_extract_sample(int16_t s, uint16_t delta) {
    long long k = std::llround(static_cast<double>(s) / static_cast<double>(delta));
    return static_cast<int>(k & 1);
}

// ── layer operations ─────────────────────────────────────────────────────────

// Writes `bits` onto the layer's first positions; the remainder of the layer
// is overwritten at that offset. No padding is applied here so that several
// PDUs can be laid down incrementally on one layer.
inline void embed_bits_at(VoiceWindow& w, const WatermarkLayer& layer, size_t offset,
                          const Bits& bits) {
    if (layer.delta == 0) throw std::invalid_argument("embed_bits_at: delta must be positive");
    if (offset + bits.size() > kLayerCapacityBits)
        throw std::invalid_argument("embed_bits_at: layer capacity exceeded");
    size_t base = layer_stride_offset(layer.id);
    for (size_t i = 0; i < bits.size(); ++i) {
        size_t sample_index = base + 4 * (offset + i);
        w.sample(sample_index) = qim_embed_sample(w.sample(sample_index), bits[i] & 1, layer.delta);
    }
}

inline Bits extract_bits_at(const VoiceWindow& w, const WatermarkLayer& layer, size_t offset,
                            size_t count) {
    if (layer.delta == 0) throw std::invalid_argument("extract_bits_at: delta must be positive");
    if (offset + count > kLayerCapacityBits)
        throw std::invalid_argument("extract_bits_at: layer capacity exceeded");
    Bits bits;
    bits.reserve(count);
    size_t base = layer_stride_offset(layer.id);
    for (size_t i = 0; i < count; ++i)
        bits.push_back(static_cast<uint8_t>(
            qim_extract_sample(w.sample(base + 4 * (offset + i)), layer.delta)));
    return bits;
}

// Fills layer positions from `offset` to the end with an alternating 0,1,...
// pattern so the whole layer sits on defined lattice cells.
inline void pad_layer_from(VoiceWindow& w, const WatermarkLayer& layer, size_t offset) {
    Bits pad;
    pad.reserve(kLayerCapacityBits - offset);
    for (size_t i = offset; i < kLayerCapacityBits; ++i)
        pad.push_back(static_cast<uint8_t>(i % 2));
    embed_bits_at(w, layer, offset, pad);
}

// Whole-layer embed: payload first, alternating pad after.
inline VoiceWindow embed_bits(VoiceWindow w, const WatermarkLayer& layer, const Bits& bits) {
    embed_bits_at(w, layer, 0, bits);
    pad_layer_from(w, layer, bits.size());
    return w;
}

inline Bits extract_bits(const VoiceWindow& w, const WatermarkLayer& layer, size_t count) {
    return extract_bits_at(w, layer, 0, count);
}

// ── voice features ───────────────────────────────────────────────────────────
// Per frame: an energy bucket (integer log2 of the summed squared samples)
// and a zero-crossing count, both over the voice-only odd samples. Samples
// are passed through one companding cycle before measuring, so the features
// are exactly invariant under later analog hops: mu-law companding is
// idempotent, and the odd samples are never touched by embedding.

inline ByteVec feature_bytes(const VoiceWindow& w) {
    ByteVec out;
    out.reserve(kFramesPerWindow * 2);
    for (const auto& frame : w.frames) {
        uint64_t energy = 0;
        unsigned crossings = 0;
        int prev_sign = 0;
        for (size_t j = 1; j < kFrameSamples; j += 2) {
            int s = ulaw_roundtrip(frame[j]);
            energy += static_cast<uint64_t>(static_cast<int64_t>(s) * s);
            int sign = s > 0 ? 1 : (s < 0 ? -1 : 0);
            if (sign != 0) {
                if (prev_sign != 0 && sign != prev_sign) ++crossings;
                prev_sign = sign;
            }
        }
        unsigned bucket = energy == 0 ? 0u : static_cast<unsigned>(std::bit_width(energy) - 1);
        out.push_back(static_cast<uint8_t>(bucket > 255 ? 255 : bucket));
        out.push_back(static_cast<uint8_t>(crossings > 255 ? 255 : crossings));
    }
    return out;
}

struct VoiceFeature {
    Digest digest{};
    bool operator==(const VoiceFeature&) const = default;
};

inline VoiceFeature voice_feature(const VoiceWindow& w) {
    return VoiceFeature{hash_bytes(feature_bytes(w))};
}

// ── calibration ──────────────────────────────────────────────────────────────
// Embeds a known pattern on both layers of every window, runs the full
// transport distortion (one analog hop, then the packet-leg companding), and
// measures the bit error rate per candidate step size.

struct DeltaCalibration {
    uint16_t delta = 0;
    double ber = 1.0;
};

inline double layer_ber(const std::vector<VoiceWindow>& windows, uint16_t delta) {
    WatermarkLayer l1{LayerId::Endpoint, delta};
    WatermarkLayer l2{LayerId::Gateway, delta};
    size_t errors = 0;
    size_t total = 0;
    std::mt19937 pattern_rng(0x5eedu);
    for (const auto& original : windows) {
        Bits bits(kLayerCapacityBits);
        for (auto& b : bits) b = static_cast<uint8_t>(pattern_rng() & 1);
        VoiceWindow marked = embed_bits(original, l1, bits);
        marked = adda_roundtrip(marked);         // PSTN tail into the gateway
        marked = embed_bits(marked, l2, bits);   // gateway layer on companded voice
        marked = adda_roundtrip(marked);         // packet leg + far PSTN tail
        Bits got1 = extract_bits(marked, l1, kLayerCapacityBits);
        Bits got2 = extract_bits(marked, l2, kLayerCapacityBits);
        for (size_t i = 0; i < kLayerCapacityBits; ++i) {
            errors += (got1[i] != bits[i]) + (got2[i] != bits[i]);
            total += 2;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total);
}

// Smallest power-of-two step with zero residual BER over the given corpus;
// candidates run 2^4 .. 2^12.
inline std::vector<DeltaCalibration> calibrate_delta(const std::vector<VoiceWindow>& windows) {
    std::vector<DeltaCalibration> results;
    for (int p = 4; p <= 12; ++p) {
        uint16_t delta = static_cast<uint16_t>(1u << p);
        results.push_back(DeltaCalibration{delta, layer_ber(windows, delta)});
    }
    return results;
}

inline uint16_t pick_delta(const std::vector<DeltaCalibration>& results) {
    for (const auto& r : results)
        if (r.ber == 0.0) return r.delta;
    throw std::runtime_error("pick_delta: no candidate step survives the channel");
}

}  // namespace tollgate
