#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "singvoc/audio.hpp"
#include "singvoc/parallel.hpp"

namespace singvoc {
namespace dsp {

namespace detail {

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = M_PI * x;
    return std::sin(px) / px;
}

// Blackman-windowed sinc lowpass at the L-upsampled rate, gain L.
inline std::vector<double> resample_kernel(int64_t up, int64_t down, int64_t& half) {
    const int64_t zero_crossings = 32;
    const int64_t m = std::max(up, down);
    half = zero_crossings * m;
    const double cutoff = 0.45 / static_cast<double>(m);  // of the upsampled rate
    std::vector<double> h(static_cast<size_t>(2 * half + 1));
    const double n = static_cast<double>(2 * half);
    for (int64_t i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i + half);
        const double w = 0.42 - 0.5 * std::cos(2.0 * M_PI * t / n) +
                         0.08 * std::cos(4.0 * M_PI * t / n);
        h[static_cast<size_t>(i + half)] =
            static_cast<double>(up) * 2.0 * cutoff * sinc(2.0 * cutoff * static_cast<double>(i)) * w;
    }
    return h;
}

} // namespace detail

// Windowed-sinc polyphase rational resampler. Output length is
// round(len * target / source); signal outside the input is taken as zero.
inline AudioBuffer resample(const AudioBuffer& x, int target_rate) {
    SINGVOC_CHECK_VALUE(target_rate > 0, "resample: target rate must be positive, got ",
                        target_rate);
    SINGVOC_CHECK_VALUE(x.sample_rate > 0, "resample: source rate must be positive");
    if (target_rate == x.sample_rate) return x;
    const int64_t g = std::gcd<int64_t>(x.sample_rate, target_rate);
    const int64_t up = target_rate / g;    // L
    const int64_t down = x.sample_rate / g;  // M
    int64_t half = 0;
    const std::vector<double> h = detail::resample_kernel(up, down, half);
    const int64_t n = x.size();
    const int64_t out_len = static_cast<int64_t>(
        std::llround(static_cast<double>(n) * static_cast<double>(target_rate) /
                     static_cast<double>(x.sample_rate)));
    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.assign(static_cast<size_t>(out_len), 0.0);
    const double* px = x.samples.data();
    double* py = out.samples.data();
    // y[m] = sum_k x[k] * h[m*down - k*up]
    const auto ceil_div = [](int64_t a, int64_t b) {  // b > 0
        return a >= 0 ? (a + b - 1) / b : -((-a) / b);
    };
    parallel_chunks(out_len, [&](int64_t m0, int64_t m1) {
        for (int64_t m = m0; m < m1; ++m) {
            const int64_t pos = m * down;  // in upsampled ticks
            const int64_t k_lo = std::max<int64_t>(0, ceil_div(pos - half, up));
            const int64_t k_hi = std::min<int64_t>(n - 1, (pos + half) / up);
            double acc = 0.0;
            for (int64_t k = k_lo; k <= k_hi; ++k) {
                acc += px[k] * h[static_cast<size_t>(pos - k * up + half)];
            }
            py[m] = acc;
        }
    });
    return out;
}

} // namespace dsp
} // namespace singvoc
