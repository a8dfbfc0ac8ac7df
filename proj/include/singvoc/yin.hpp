#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/audio.hpp"
#include "singvoc/parallel.hpp"

namespace singvoc {
namespace dsp {

struct YinConfig {
    double f_min = 50.0;
    double f_max = 1200.0;
    double threshold = 0.15;
    int64_t hop = 240;
    int64_t correlation_window = 1024;  // samples compared per lag
};

// YIN fundamental-frequency estimator: squared difference function,
// cumulative-mean normalization, absolute threshold, parabolic refinement.
// Returns one value per hop-aligned frame; 0 marks unvoiced frames.
inline std::vector<double> yin_pitch(const AudioBuffer& x, const YinConfig& cfg = {}) {
    SINGVOC_CHECK_VALUE(x.sample_rate > 0, "yin: sample rate must be positive");
    SINGVOC_CHECK_VALUE(cfg.f_min > 0 && cfg.f_max > cfg.f_min, "yin: bad f0 range");
    const double sr = static_cast<double>(x.sample_rate);
    const int64_t tau_min = std::max<int64_t>(2, static_cast<int64_t>(sr / cfg.f_max));
    const int64_t tau_max = static_cast<int64_t>(sr / cfg.f_min) + 1;
    const int64_t w = cfg.correlation_window;
    const int64_t frame_len = w + tau_max;
    const int64_t n = x.size();
    const int64_t frames = (n + cfg.hop - 1) / cfg.hop;
    std::vector<double> out(static_cast<size_t>(frames), 0.0);
    if (n == 0) return out;

    // frame centered at b*hop; edges use whatever samples exist (zero pad)
    parallel_chunks(frames, [&](int64_t b0, int64_t b1) {
        std::vector<double> d(static_cast<size_t>(tau_max + 1));
        std::vector<double> cmnd(static_cast<size_t>(tau_max + 1));
        std::vector<double> frame(static_cast<size_t>(frame_len));
        for (int64_t b = b0; b < b1; ++b) {
            const int64_t center = b * cfg.hop;
            const int64_t start = center - frame_len / 2;
            for (int64_t i = 0; i < frame_len; ++i) {
                const int64_t j = start + i;
                frame[static_cast<size_t>(i)] =
                    (j >= 0 && j < n) ? x.samples[static_cast<size_t>(j)] : 0.0;
            }
            // squared difference function
            for (int64_t tau = 1; tau <= tau_max; ++tau) {
                double acc = 0.0;
                const double* a = frame.data();
                const double* c = frame.data() + tau;
                for (int64_t i = 0; i < w; ++i) {
                    const double delta = a[i] - c[i];
                    acc += delta * delta;
                }
                d[static_cast<size_t>(tau)] = acc;
            }
            // cumulative mean normalized difference
            double running = 0.0;
            cmnd[0] = 1.0;
            for (int64_t tau = 1; tau <= tau_max; ++tau) {
                running += d[static_cast<size_t>(tau)];
                cmnd[static_cast<size_t>(tau)] =
                    running > 0.0 ? d[static_cast<size_t>(tau)] * static_cast<double>(tau) / running
                                  : 1.0;
            }
            // first dip under threshold, descended to its local minimum
            int64_t tau_est = -1;
            for (int64_t tau = tau_min; tau <= tau_max; ++tau) {
                if (cmnd[static_cast<size_t>(tau)] < cfg.threshold) {
                    while (tau + 1 <= tau_max &&
                           cmnd[static_cast<size_t>(tau + 1)] < cmnd[static_cast<size_t>(tau)]) {
                        ++tau;
                    }
                    tau_est = tau;
                    break;
                }
            }
            if (tau_est < 0) continue;  // unvoiced
            // parabolic interpolation around the minimum
            double tau_refined = static_cast<double>(tau_est);
            if (tau_est > tau_min && tau_est < tau_max) {
                const double s0 = cmnd[static_cast<size_t>(tau_est - 1)];
                const double s1 = cmnd[static_cast<size_t>(tau_est)];
                const double s2 = cmnd[static_cast<size_t>(tau_est + 1)];
                const double denom = 2.0 * (s0 - 2.0 * s1 + s2);
                if (std::fabs(denom) > 1e-12) {
                    tau_refined += (s0 - s2) / denom;
                }
            }
            double f0 = sr / tau_refined;
            if (f0 < cfg.f_min || f0 > cfg.f_max) continue;
            out[static_cast<size_t>(b)] = f0;
        }
    });
    return out;
}

} // namespace dsp
} // namespace singvoc
