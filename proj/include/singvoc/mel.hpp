#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/stft.hpp"

namespace singvoc {
namespace dsp {

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular HTK-scale filterbank over [f_min, f_max]. Rows are sorted by
// center frequency and guaranteed at least one positive entry (a thin filter
// that would fall between bins is snapped to its nearest bin).
class MelFilterbank {
public:
    MelFilterbank(int64_t n_mels, int64_t fft_size, int sample_rate, double f_min = 0.0,
                  double f_max = -1.0)
        : n_mels_(n_mels), bins_(fft_size / 2 + 1) {
        if (f_max <= 0.0) f_max = sample_rate / 2.0;
        SINGVOC_CHECK_VALUE(n_mels > 0 && f_min >= 0.0 && f_max > f_min,
                            "bad mel filterbank parameters");
        std::vector<double> mat(static_cast<size_t>(n_mels * bins_), 0.0);
        const double mel_lo = hz_to_mel(f_min);
        const double mel_hi = hz_to_mel(f_max);
        std::vector<double> edges(static_cast<size_t>(n_mels + 2));
        for (int64_t i = 0; i < n_mels + 2; ++i) {
            edges[static_cast<size_t>(i)] = mel_to_hz(
                mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
        }
        const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
        for (int64_t m = 0; m < n_mels; ++m) {
            const double lo = edges[static_cast<size_t>(m)];
            const double c = edges[static_cast<size_t>(m + 1)];
            const double hi = edges[static_cast<size_t>(m + 2)];
            double row_sum = 0.0;
            for (int64_t k = 0; k < bins_; ++k) {
                const double f = bin_hz * static_cast<double>(k);
                double w = 0.0;
                if (f > lo && f < hi) {
                    w = f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
                }
                mat[static_cast<size_t>(m * bins_ + k)] = w;
                row_sum += w;
            }
            if (row_sum == 0.0) {
                const int64_t k = std::min<int64_t>(
                    bins_ - 1, static_cast<int64_t>(std::lround(c / bin_hz)));
                mat[static_cast<size_t>(m * bins_ + k)] = 1.0;
            }
        }
        matrix_ = Tensor::from_vector(mat, {n_mels, bins_});
        // [bins, n_mels] layout so applying the bank is a plain linear op
        matrix_t_ = ops::transpose2(matrix_);
        zero_bias_ = Tensor::zeros({n_mels});
    }

    int64_t n_mels() const { return n_mels_; }
    int64_t bins() const { return bins_; }
    const Tensor& matrix() const { return matrix_; }

    // mel_linear[b,m] = sum_k M[m,k] * mag[b,k]^2  (power spectrum)
    Tensor apply(const Tensor& magnitudes) const {
        SINGVOC_CHECK_SHAPE(magnitudes.rank() == 2 && magnitudes.dim(1) == bins_,
                            "mel filterbank expects [B,", bins_, "], got ",
                            shape_str(magnitudes.shape()));
        return ops::linear(ops::mul(magnitudes, magnitudes), matrix_t_, zero_bias_);
    }

private:
    int64_t n_mels_;
    int64_t bins_;
    Tensor matrix_;
    Tensor matrix_t_;
    Tensor zero_bias_;
};

constexpr double kLogFloor = 1e-5;

// log-mel analysis at a fixed (rate, stft, mel) setting.
class MelAnalyzer {
public:
    MelAnalyzer(StftConfig cfg, int64_t n_mels, int sample_rate)
        : cfg_(cfg), sample_rate_(sample_rate), bank_(n_mels, cfg.fft_size, sample_rate) {}

    const StftConfig& config() const { return cfg_; }
    int sample_rate() const { return sample_rate_; }
    int64_t n_mels() const { return bank_.n_mels(); }

    // log(mel power + 1e-5); differentiable when recording.
    Tensor log_mel(const Tensor& x) const {
        return ops::log_shift(bank_.apply(stft_magnitude(x, cfg_)), kLogFloor);
    }

    Tensor log_mel(const AudioBuffer& x) const {
        SINGVOC_CHECK_VALUE(x.sample_rate == sample_rate_, "mel analyzer built for ",
                            sample_rate_, " Hz, got ", x.sample_rate, " Hz audio");
        return log_mel(x.to_tensor());
    }

private:
    StftConfig cfg_;
    int sample_rate_;
    MelFilterbank bank_;
};

} // namespace dsp
} // namespace singvoc
