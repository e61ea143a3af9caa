#pragma once

#include <cstdint>

namespace tollgate {

// G.711 mu-law companding, the codec spoken on both the simulated RTP leg and
// the PSTN tails. This is the classic segmented approximation (8 segments,
// 16 steps each, bias 0x84). Two properties the rest of the system leans on:
//
//   1. Idempotence at sample level: for y = ulaw_decode(ulaw_encode(x)),
//      ulaw_decode(ulaw_encode(y)) == y. Repeated analog/digital conversions
//      after the first are lossless, which is what lets watermark bits and
//      voice features survive the PSTN tails exactly.
//   2. Bounded error: within a segment the decoded level is at most half a
//      quantization step from the input, so a sufficiently coarse watermark
//      lattice decodes to the same cell after companding.

inline constexpr int kUlawBias = 0x84;
inline constexpr int kUlawClip = 32635;

inline uint8_t ulaw_encode(int16_t pcm) {
    int sign = (pcm < 0) ? 0x80 : 0x00;
    int mag = sign ? -static_cast<int>(pcm) : static_cast<int>(pcm);
    if (mag > kUlawClip) mag = kUlawClip;
    mag += kUlawBias;

    int seg = 7;
    for (int limit = 0x4000; (mag & limit) == 0 && seg > 0; limit >>= 1) --seg;

    int quant = (mag >> (seg + 3)) & 0x0F;
    return static_cast<uint8_t>(~(sign | (seg << 4) | quant));
}

inline int16_t ulaw_decode(uint8_t code) {
    int u = ~code & 0xFF;
    int seg = (u >> 4) & 0x07;
    int quant = u & 0x0F;
    int mag = (((quant << 3) + kUlawBias) << seg) - kUlawBias;
    return static_cast<int16_t>((u & 0x80) ? -mag : mag);
}

// One encode/decode round trip: the per-sample effect of an analog hop or of
// carrying the sample as an RTP payload octet.
inline int16_t ulaw_roundtrip(int16_t pcm) {
    return ulaw_decode(ulaw_encode(pcm));
}

}  // namespace tollgate
