#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tollgate/bytes.hpp"

namespace tollgate {

// Minimal RIFF/WAVE support: 16-bit PCM, mono, any sample rate (8 kHz
// expected). Enough for the calibrate/embed/extract tools; not a general
// WAV library.

struct WavData {
    std::vector<int16_t> samples;
    uint32_t sample_rate = 8000;
};

inline WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_wav: cannot open " + path);
    std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    auto u16 = [&](size_t at) -> uint16_t {
        if (at + 2 > raw.size()) throw std::runtime_error("read_wav: truncated file " + path);
        return static_cast<uint16_t>(raw[at] | (raw[at + 1] << 8));
    };
    auto u32 = [&](size_t at) -> uint32_t {
        if (at + 4 > raw.size()) throw std::runtime_error("read_wav: truncated file " + path);
        return raw[at] | (raw[at + 1] << 8) | (raw[at + 2] << 16) |
               (static_cast<uint32_t>(raw[at + 3]) << 24);
    };
    if (raw.size() < 12 || std::string(raw.begin(), raw.begin() + 4) != "RIFF" ||
        std::string(raw.begin() + 8, raw.begin() + 12) != "WAVE")
        throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

    WavData wav;
    bool have_fmt = false;
    size_t at = 12;
    while (at + 8 <= raw.size()) {
        std::string id(raw.begin() + at, raw.begin() + at + 4);
        uint32_t len = u32(at + 4);
        size_t body = at + 8;
        if (id == "fmt ") {
            if (u16(body) != 1) throw std::runtime_error("read_wav: only PCM supported");
            if (u16(body + 2) != 1) throw std::runtime_error("read_wav: only mono supported");
            wav.sample_rate = u32(body + 4);
            if (u16(body + 14) != 16) throw std::runtime_error("read_wav: only 16-bit supported");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw std::runtime_error("read_wav: data chunk before fmt");
            if (body + len > raw.size()) throw std::runtime_error("read_wav: truncated data chunk");
            wav.samples.reserve(len / 2);
            for (size_t i = 0; i + 1 < len; i += 2)
                wav.samples.push_back(
                    static_cast<int16_t>(raw[body + i] | (raw[body + i + 1] << 8)));
            return wav;
        }
        at = body + len + (len % 2);  // chunks are word-aligned
    }
    throw std::runtime_error("read_wav: no data chunk in " + path);
}

inline void write_wav(const std::string& path, const std::vector<int16_t>& samples,
                      uint32_t sample_rate = 8000) {
    ByteVec out;
    auto le16 = [&](uint16_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xFF));
        out.push_back(static_cast<uint8_t>(v >> 8));
    };
    auto le32 = [&](uint32_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xFF));
        out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
        out.push_back(static_cast<uint8_t>(v >> 24));
    };
    uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    le32(36 + data_len);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    le32(16);
    le16(1);  // PCM
    le16(1);  // mono
    le32(sample_rate);
    le32(sample_rate * 2);  // byte rate
    le16(2);                // block align
    le16(16);               // bits per sample
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    le32(data_len);
    for (int16_t s : samples) le16(static_cast<uint16_t>(s));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_wav: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_wav: write failed for " + path);
}

}  // namespace tollgate
