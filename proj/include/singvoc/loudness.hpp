#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/stft.hpp"

namespace singvoc {
namespace dsp {

// IEC 61672 A-weighting, linear amplitude gain (1.0 at 1 kHz).
inline double a_weight_gain(double f) {
    if (f <= 0.0) return 0.0;
    const double f2 = f * f;
    const double ra = 12194.0 * 12194.0 * f2 * f2 /
                      ((f2 + 20.6 * 20.6) *
                       std::sqrt((f2 + 107.7 * 107.7) * (f2 + 737.9 * 737.9)) *
                       (f2 + 12194.0 * 12194.0));
    return ra * std::pow(10.0, 2.0 / 20.0);
}

// Per-frame A-weighted power in dB relative to a full-scale sine (0 dBFS).
// Framing matches the mel analysis.
inline std::vector<double> loudness_db(const AudioBuffer& x, const StftConfig& cfg) {
    validate(cfg);
    Spectrogram spec = stft_magnitude(x, cfg);
    const int64_t frames = spec.num_frames();
    const int64_t bins = spec.bins();
    const int64_t fft = cfg.fft_size;

    std::vector<double> weight(static_cast<size_t>(bins));
    const double bin_hz = static_cast<double>(x.sample_rate) / static_cast<double>(fft);
    for (int64_t k = 0; k < bins; ++k) {
        const double g = a_weight_gain(bin_hz * static_cast<double>(k));
        const double sided = (k == 0 || k == fft / 2) ? 1.0 : 2.0;
        weight[static_cast<size_t>(k)] = sided * g * g;
    }
    const auto window = hann_window(cfg.win_length);
    double wsq = 0.0;
    for (double w : window) wsq += w * w;
    const double norm = 1.0 / (static_cast<double>(fft) * wsq);
    // a full-scale sine carries power 1/2: add 10*log10(2) so it reads 0 dBFS
    const double calib_db = 10.0 * std::log10(2.0);

    std::vector<double> out(static_cast<size_t>(frames));
    const double* mag = spec.frames.data();
    for (int64_t b = 0; b < frames; ++b) {
        double p = 0.0;
        const double* row = mag + b * bins;
        for (int64_t k = 0; k < bins; ++k) {
            p += weight[static_cast<size_t>(k)] * row[k] * row[k];
        }
        out[static_cast<size_t>(b)] = 10.0 * std::log10(p * norm + 1e-10) + calib_db;
    }
    return out;
}

// dB clipped to [-80, 0] then affinely mapped to [0, 1].
inline std::vector<double> loudness(const AudioBuffer& x, const StftConfig& cfg) {
    std::vector<double> db = loudness_db(x, cfg);
    for (double& v : db) {
        v = (std::min(0.0, std::max(-80.0, v)) + 80.0) / 80.0;
    }
    return db;
}

} // namespace dsp
} // namespace singvoc
