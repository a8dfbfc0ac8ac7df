#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>

#include "singvoc/audio.hpp"
#include "singvoc/binio.hpp"

namespace singvoc {
namespace wav {

// RIFF/WAVE codec: PCM 16/24-bit and IEEE float32. Multichannel files decode
// to the first channel. Decoded samples land in [-1, 1]; float32 write/read
// round-trips bit-exactly.

inline AudioBuffer read(const std::filesystem::path& path) {
    binio::Reader r = binio::Reader::from_file(path);
    auto expect_tag = [&](const char* tag) {
        std::string got;
        for (int i = 0; i < 4; ++i) got.push_back(static_cast<char>(r.u8()));
        if (got != tag) {
            fail<IoError>("'", path.string(), "': expected ", tag, " chunk, found '", got,
                          "'");
        }
    };
    expect_tag("RIFF");
    r.u32();  // riff size
    expect_tag("WAVE");

    auto u16le = [&r]() {
        const uint16_t lo = r.u8();
        const uint16_t hi = r.u8();
        return static_cast<uint16_t>(lo | (hi << 8));
    };
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool got_fmt = false;
    AudioBuffer out;
    while (r.remaining() >= 8) {
        std::string tag;
        for (int i = 0; i < 4; ++i) tag.push_back(static_cast<char>(r.u8()));
        const uint32_t size = r.u32();
        if (tag == "fmt ") {
            if (size < 16) fail<IoError>("'", path.string(), "': malformed fmt chunk");
            format = u16le();
            channels = u16le();
            sample_rate = r.u32();
            r.u32();   // byte rate
            u16le();   // block align
            bits = u16le();
            for (uint32_t i = 16; i < size; ++i) r.u8();
            got_fmt = true;
        } else if (tag == "data") {
            if (!got_fmt) fail<IoError>("'", path.string(), "': data before fmt chunk");
            if (channels == 0) fail<IoError>("'", path.string(), "': zero channels");
            const uint32_t bytes_per = bits / 8;
            if (bytes_per == 0) fail<IoError>("'", path.string(), "': zero sample width");
            const uint64_t frames = size / (bytes_per * channels);
            out.samples.reserve(frames);
            for (uint64_t f = 0; f < frames; ++f) {
                for (uint16_t c = 0; c < channels; ++c) {
                    double v = 0.0;
                    if (format == 1 && bits == 16) {
                        const uint16_t raw = u16le();
                        v = static_cast<double>(static_cast<int16_t>(raw)) / 32768.0;
                    } else if (format == 1 && bits == 24) {
                        uint32_t raw = r.u8();
                        raw |= static_cast<uint32_t>(r.u8()) << 8;
                        raw |= static_cast<uint32_t>(r.u8()) << 16;
                        int32_t s = static_cast<int32_t>(raw << 8) >> 8;  // sign extend
                        v = static_cast<double>(s) / 8388608.0;
                    } else if (format == 3 && bits == 32) {
                        v = static_cast<double>(r.f32());
                    } else {
                        fail<IoError>("'", path.string(), "': unsupported wav encoding (format ",
                                      format, ", ", bits, " bits)");
                    }
                    if (c == 0) out.samples.push_back(std::clamp(v, -1.0, 1.0));
                }
            }
            if (size % 2 == 1 && r.remaining() > 0) r.u8();  // pad byte
        } else {
            for (uint32_t i = 0; i < size && r.remaining() > 0; ++i) r.u8();
            if (size % 2 == 1 && r.remaining() > 0) r.u8();
        }
    }
    if (!got_fmt || sample_rate == 0) {
        fail<IoError>("'", path.string(), "': missing fmt chunk");
    }
    out.sample_rate = static_cast<int>(sample_rate);
    return out;
}

enum class Encoding { Float32, Pcm16 };

inline void write(const std::filesystem::path& path, const AudioBuffer& audio,
                  Encoding enc = Encoding::Float32) {
    SINGVOC_CHECK_VALUE(audio.sample_rate > 0, "wav write: sample rate must be positive");
    binio::Writer w;
    const uint16_t channels = 1;
    const uint16_t bits = enc == Encoding::Float32 ? 32 : 16;
    const uint16_t format = enc == Encoding::Float32 ? 3 : 1;
    const uint32_t bytes_per = bits / 8;
    const uint32_t data_size = static_cast<uint32_t>(audio.samples.size() * bytes_per);

    w.raw("RIFF", 4);
    w.u32(36 + data_size);
    w.raw("WAVE", 4);
    w.raw("fmt ", 4);
    w.u32(16);
    w.u8(static_cast<uint8_t>(format & 0xff));
    w.u8(static_cast<uint8_t>(format >> 8));
    w.u8(static_cast<uint8_t>(channels & 0xff));
    w.u8(static_cast<uint8_t>(channels >> 8));
    w.u32(static_cast<uint32_t>(audio.sample_rate));
    w.u32(static_cast<uint32_t>(audio.sample_rate) * bytes_per * channels);
    w.u8(static_cast<uint8_t>((bytes_per * channels) & 0xff));
    w.u8(static_cast<uint8_t>((bytes_per * channels) >> 8));
    w.u8(static_cast<uint8_t>(bits & 0xff));
    w.u8(static_cast<uint8_t>(bits >> 8));
    w.raw("data", 4);
    w.u32(data_size);
    for (double v : audio.samples) {
        if (enc == Encoding::Float32) {
            w.f32(static_cast<float>(v));
        } else {
            const double c = std::clamp(v, -1.0, 1.0);
            const int32_t s = static_cast<int32_t>(std::lround(c * 32767.0));
            const uint16_t raw = static_cast<uint16_t>(static_cast<int16_t>(s));
            w.u8(static_cast<uint8_t>(raw & 0xff));
            w.u8(static_cast<uint8_t>(raw >> 8));
        }
    }
    w.write_file(path);
}

} // namespace wav
} // namespace singvoc
