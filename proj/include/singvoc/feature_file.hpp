#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "singvoc/binio.hpp"
#include "singvoc/features.hpp"

namespace singvoc {

// Versioned binary feature container: magic, header, named f64 arrays, a mel
// normalization stats block, and an FNV-1a checksum trailer. Little-endian
// throughout; every array's leading dimension must equal the declared frame
// count.
struct FeatureFile {
    static constexpr uint32_t kMagic = 0x54465653;  // "SVFT"
    static constexpr uint32_t kVersion = 1;

    uint32_t sample_rate = 48000;
    uint32_t hop = 240;
    int64_t frames = 0;
    std::vector<std::pair<std::string, Tensor>> arrays;
    bool has_stats = false;
    std::vector<double> mel_mean, mel_std;

    const Tensor* find(const std::string& name) const {
        for (const auto& [n, t] : arrays) {
            if (n == name) return &t;
        }
        return nullptr;
    }

    FeatureFrames to_frames() const {
        const Tensor* mel = find("mel");
        const Tensor* f0 = find("f0");
        const Tensor* loud = find("loudness");
        SINGVOC_CHECK(mel && f0 && loud, "feature file lacks mel/f0/loudness arrays");
        FeatureFrames f;
        f.mel = *mel;
        f.f0 = f0->vec();
        f.loudness = loud->vec();
        f.sample_rate = static_cast<int>(sample_rate);
        f.hop = hop;
        return f;
    }
};

inline void write_feature_file(const std::filesystem::path& path, const FeatureFile& f) {
    for (const auto& [name, t] : f.arrays) {
        SINGVOC_CHECK_VALUE(t.dim(0) == f.frames, "feature array '", name,
                            "' has leading dim ", t.dim(0), ", expected frames ", f.frames);
    }
    binio::Writer w;
    w.u32(FeatureFile::kMagic);
    w.u32(FeatureFile::kVersion);
    w.u32(f.sample_rate);
    w.u32(f.hop);
    w.i64(f.frames);
    w.u32(static_cast<uint32_t>(f.arrays.size()));
    for (const auto& [name, t] : f.arrays) {
        w.str(name);
        w.u32(static_cast<uint32_t>(t.rank()));
        for (int i = 0; i < t.rank(); ++i) w.i64(t.dim(i));
        for (int64_t i = 0; i < t.numel(); ++i) w.f64(t.data()[i]);
    }
    w.u8(f.has_stats ? 1 : 0);
    if (f.has_stats) {
        w.f64_array(f.mel_mean);
        w.f64_array(f.mel_std);
    }
    w.finish_with_checksum();
    w.write_file(path);
}

inline FeatureFile read_feature_file(const std::filesystem::path& path) {
    binio::Reader r = binio::Reader::from_file(path);
    r.verify_checksum("feature file");
    FeatureFile f;
    if (r.u32() != FeatureFile::kMagic) {
        fail<IoError>("'", path.string(), "' is not a feature file (bad magic)");
    }
    const uint32_t version = r.u32();
    if (version != FeatureFile::kVersion) {
        fail<IoError>("'", path.string(), "': unsupported feature file version ", version);
    }
    f.sample_rate = r.u32();
    f.hop = r.u32();
    f.frames = r.i64();
    const uint32_t count = r.u32();
    for (uint32_t a = 0; a < count; ++a) {
        std::string name = r.str();
        const uint32_t rank = r.u32();
        std::vector<int64_t> shape;
        int64_t numel = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            shape.push_back(r.i64());
            numel *= shape.back();
        }
        std::vector<double> data(static_cast<size_t>(numel));
        for (int64_t i = 0; i < numel; ++i) data[static_cast<size_t>(i)] = r.f64();
        Tensor t = Tensor::from_vector(std::move(data), shape);
        SINGVOC_CHECK_VALUE(t.dim(0) == f.frames, "feature array '", name,
                            "' disagrees with declared frame count");
        f.arrays.emplace_back(std::move(name), std::move(t));
    }
    f.has_stats = r.u8() != 0;
    if (f.has_stats) {
        f.mel_mean = r.f64_array();
        f.mel_std = r.f64_array();
    }
    SINGVOC_CHECK(r.at_payload_end(), "'", path.string(), "': trailing bytes in payload");
    return f;
}

// Corpus-level per-dimension statistics for mel normalization.
struct MelStats {
    std::vector<double> mean, stdev;
};

inline MelStats compute_mel_stats(const std::vector<Tensor>& mels) {
    SINGVOC_CHECK_VALUE(!mels.empty(), "mel stats: empty corpus");
    const int64_t dims = mels[0].dim(1);
    MelStats s;
    s.mean.assign(static_cast<size_t>(dims), 0.0);
    s.stdev.assign(static_cast<size_t>(dims), 0.0);
    int64_t total = 0;
    for (const Tensor& m : mels) {
        SINGVOC_CHECK_VALUE(m.rank() == 2 && m.dim(1) == dims, "mel stats: dim mismatch");
        for (int64_t b = 0; b < m.dim(0); ++b) {
            for (int64_t d = 0; d < dims; ++d) {
                s.mean[static_cast<size_t>(d)] += m.data()[b * dims + d];
            }
        }
        total += m.dim(0);
    }
    for (auto& v : s.mean) v /= static_cast<double>(total);
    for (const Tensor& m : mels) {
        for (int64_t b = 0; b < m.dim(0); ++b) {
            for (int64_t d = 0; d < dims; ++d) {
                const double delta = m.data()[b * dims + d] - s.mean[static_cast<size_t>(d)];
                s.stdev[static_cast<size_t>(d)] += delta * delta;
            }
        }
    }
    for (auto& v : s.stdev) v = std::sqrt(v / static_cast<double>(total));
    return s;
}

inline Tensor normalize_mel(const Tensor& mel, const MelStats& stats) {
    const int64_t dims = mel.dim(1);
    SINGVOC_CHECK_VALUE(static_cast<int64_t>(stats.mean.size()) == dims,
                        "mel normalization stats dim mismatch");
    Tensor out = Tensor::zeros(mel.shape());
    for (int64_t b = 0; b < mel.dim(0); ++b) {
        for (int64_t d = 0; d < dims; ++d) {
            const double sd = std::max(stats.stdev[static_cast<size_t>(d)], 1e-8);
            out.data()[b * dims + d] =
                (mel.data()[b * dims + d] - stats.mean[static_cast<size_t>(d)]) / sd;
        }
    }
    return out;
}

} // namespace singvoc
