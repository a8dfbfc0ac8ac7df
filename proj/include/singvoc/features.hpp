#pragma once

#include <cstdint>
#include <vector>

#include "singvoc/loudness.hpp"
#include "singvoc/mel.hpp"
#include "singvoc/yin.hpp"

namespace singvoc {

// Per-frame conditioning at the 5 ms hop: mel, pitch, loudness.
struct FeatureFrames {
    Tensor mel;                    // [B, mel_dims]
    std::vector<double> f0;        // [B] Hz, 0 = unvoiced
    std::vector<double> loudness;  // [B] in [0, 1]
    int sample_rate = 48000;
    int64_t hop = 240;

    int64_t frames() const { return mel.defined() ? mel.dim(0) : 0; }
};

struct AnalysisSettings {
    dsp::StftConfig stft{1024, 240, 960};
    int64_t mel_dims = 120;
    dsp::YinConfig yin{};
    int sample_rate = 48000;
};

// mel (log, unnormalized), pitch and loudness on a shared hop grid.
inline FeatureFrames extract_features(const AudioBuffer& x, const AnalysisSettings& s) {
    SINGVOC_CHECK_VALUE(x.sample_rate == s.sample_rate, "feature extraction expects ",
                        s.sample_rate, " Hz audio, got ", x.sample_rate, " Hz");
    dsp::MelAnalyzer mel(s.stft, s.mel_dims, s.sample_rate);
    dsp::YinConfig yin = s.yin;
    yin.hop = s.stft.hop;
    FeatureFrames f;
    f.sample_rate = s.sample_rate;
    f.hop = s.stft.hop;
    f.mel = mel.log_mel(x);
    f.f0 = dsp::yin_pitch(x, yin);
    f.loudness = dsp::loudness(x, s.stft);
    SINGVOC_CHECK_INTERNAL(static_cast<int64_t>(f.f0.size()) == f.frames() &&
                               static_cast<int64_t>(f.loudness.size()) == f.frames(),
                           "feature streams disagree on frame count");
    return f;
}

} // namespace singvoc
