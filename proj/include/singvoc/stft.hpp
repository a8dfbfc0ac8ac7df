#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "singvoc/audio.hpp"
#include "singvoc/fft.hpp"
#include "singvoc/ops.hpp"

namespace singvoc {
namespace dsp {

struct StftConfig {
    int64_t fft_size = 1024;
    int64_t hop = 240;
    int64_t win_length = 960;
    // window: hann (periodic)

    int64_t bins() const { return fft_size / 2 + 1; }
};

inline void validate(const StftConfig& c) {
    SINGVOC_CHECK_VALUE(c.fft_size > 0 && c.hop > 0 && c.win_length > 0,
                        "stft config values must be positive");
    SINGVOC_CHECK_VALUE(c.win_length <= c.fft_size, "stft win_length ", c.win_length,
                        " exceeds fft_size ", c.fft_size);
    SINGVOC_CHECK_VALUE(c.hop <= c.win_length, "stft hop ", c.hop, " exceeds win_length ",
                        c.win_length);
    SINGVOC_CHECK_VALUE(is_pow2(c.fft_size), "stft fft_size must be a power of two, got ",
                        c.fft_size);
}

inline std::vector<double> hann_window(int64_t n) {
    std::vector<double> w(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        w[static_cast<size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

// Frame count under center padding: one frame per started hop.
inline int64_t stft_num_frames(int64_t len, int64_t hop) { return (len + hop - 1) / hop; }

namespace detail {

// |STFT| of an already center-padded signal. Fused op: forward saves the
// one-sided re/im planes, backward applies the transposed DFT per frame.
inline Tensor stft_mag_padded(const Tensor& padded, const StftConfig& cfg, int64_t frames) {
    const int64_t bins = cfg.bins();
    const int64_t win = cfg.win_length;
    const int64_t fft = cfg.fft_size;
    const int64_t off = (fft - win) / 2;
    const auto window = std::make_shared<std::vector<double>>(hann_window(win));
    auto re = std::make_shared<std::vector<double>>(static_cast<size_t>(frames * bins));
    auto im = std::make_shared<std::vector<double>>(static_cast<size_t>(frames * bins));

    Tensor out = Tensor::zeros({frames, bins});
    {
        const double* px = padded.data();
        double* po = out.data();
        parallel_chunks(frames, [&](int64_t b0, int64_t b1) {
            std::vector<double> buf(static_cast<size_t>(fft));
            std::vector<cplx> spec(static_cast<size_t>(bins));
            for (int64_t b = b0; b < b1; ++b) {
                std::fill(buf.begin(), buf.end(), 0.0);
                const double* frame = px + b * cfg.hop;
                for (int64_t i = 0; i < win; ++i) {
                    buf[static_cast<size_t>(off + i)] = frame[i] * (*window)[static_cast<size_t>(i)];
                }
                rfft(buf.data(), fft, spec.data());
                for (int64_t k = 0; k < bins; ++k) {
                    const double r = spec[static_cast<size_t>(k)].real();
                    const double m = spec[static_cast<size_t>(k)].imag();
                    (*re)[static_cast<size_t>(b * bins + k)] = r;
                    (*im)[static_cast<size_t>(b * bins + k)] = m;
                    po[b * bins + k] = std::sqrt(r * r + m * m);
                }
            }
        });
    }
    if (ops::detail::recording({&padded})) {
        out.set_requires_grad(true);
        auto xi = padded.impl(), oi = out.impl();
        const int64_t hop = cfg.hop;
        GradTape::current()->record([xi, oi, re, im, window, frames, bins, fft, win, off,
                                     hop] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(xi.get());
            std::vector<cplx> spec(static_cast<size_t>(fft));
            // Overlapping frames accumulate into shared samples: keep serial.
            for (int64_t b = 0; b < frames; ++b) {
                std::fill(spec.begin(), spec.end(), cplx(0.0, 0.0));
                bool any = false;
                for (int64_t k = 0; k < bins; ++k) {
                    const double g = oi->grad[b * bins + k];
                    if (g == 0.0) continue;
                    const double r = (*re)[static_cast<size_t>(b * bins + k)];
                    const double m = (*im)[static_cast<size_t>(b * bins + k)];
                    const double mag = std::sqrt(r * r + m * m);
                    if (mag <= 0.0) continue;
                    spec[static_cast<size_t>(k)] = cplx(g * r / mag, g * m / mag);
                    any = true;
                }
                if (!any) continue;
                // transpose of the one-sided DFT: Re(sum_k G_k e^{+2pi i kn/N})
                fft_inplace(spec.data(), fft, /*inverse=*/true);
                double* gx = xi->grad.data() + b * hop;
                for (int64_t i = 0; i < win; ++i) {
                    gx[i] += (*window)[static_cast<size_t>(i)] *
                             spec[static_cast<size_t>(off + i)].real() * static_cast<double>(fft);
                }
            }
        });
    }
    return out;
}

} // namespace detail

// |STFT| with reflect center padding; differentiable when recording.
inline Tensor stft_magnitude(const Tensor& x, const StftConfig& cfg) {
    validate(cfg);
    SINGVOC_CHECK_SHAPE(x.rank() == 1, "stft_magnitude expects a rank-1 signal, got ",
                        shape_str(x.shape()));
    const int64_t len = x.dim(0);
    SINGVOC_CHECK_VALUE(len >= cfg.win_length, "signal of length ", len,
                        " is shorter than one window (", cfg.win_length, ")");
    const int64_t frames = stft_num_frames(len, cfg.hop);
    const int64_t pad = cfg.win_length / 2;
    Tensor padded = ops::pad_reflect(x, pad, pad);
    return detail::stft_mag_padded(padded, cfg, frames);
}

struct Spectrogram {
    Tensor frames;  // [B, bins], linear magnitudes
    StftConfig config;
    int sample_rate = 0;

    int64_t bins() const { return config.bins(); }
    int64_t num_frames() const { return frames.dim(0); }
};

inline Spectrogram stft_magnitude(const AudioBuffer& x, const StftConfig& cfg) {
    Spectrogram s;
    s.frames = stft_magnitude(x.to_tensor(), cfg);
    s.config = cfg;
    s.sample_rate = x.sample_rate;
    return s;
}

// Equal split of the bin axis into (low, mid, high); remainder bins go to the
// lower bands first, e.g. 257 -> 86/86/85.
struct BandSplit {
    std::array<int64_t, 3> start;
    std::array<int64_t, 3> size;
};

inline BandSplit make_band_split(int64_t bins) {
    SINGVOC_CHECK_VALUE(bins >= 3, "band_split needs at least 3 bins, got ", bins);
    const int64_t base = bins / 3;
    const int64_t rem = bins % 3;
    BandSplit bs;
    bs.size = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
    bs.start = {0, bs.size[0], bs.size[0] + bs.size[1]};
    return bs;
}

inline std::array<Tensor, 3> band_split(const Tensor& frames) {
    SINGVOC_CHECK_SHAPE(frames.rank() == 2, "band_split expects [B,bins], got ",
                        shape_str(frames.shape()));
    const BandSplit bs = make_band_split(frames.dim(1));
    return {ops::slice(frames, 1, bs.start[0], bs.size[0]),
            ops::slice(frames, 1, bs.start[1], bs.size[1]),
            ops::slice(frames, 1, bs.start[2], bs.size[2])};
}

inline std::array<Spectrogram, 3> band_split(const Spectrogram& s) {
    auto parts = band_split(s.frames);
    std::array<Spectrogram, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[static_cast<size_t>(i)] = Spectrogram{parts[static_cast<size_t>(i)], s.config,
                                                  s.sample_rate};
    }
    return out;
}

} // namespace dsp
} // namespace singvoc
