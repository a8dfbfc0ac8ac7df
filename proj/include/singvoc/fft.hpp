#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "singvoc/common.hpp"

namespace singvoc {

using cplx = std::complex<double>;

namespace detail {

struct FftPlan {
    int64_t n = 0;
    std::vector<cplx> twiddle;       // exp(-2*pi*i*k/n) for k < n/2
    std::vector<uint32_t> bitrev;

    explicit FftPlan(int64_t size) : n(size) {
        twiddle.resize(static_cast<size_t>(n / 2));
        const double step = -2.0 * M_PI / static_cast<double>(n);
        for (int64_t k = 0; k < n / 2; ++k) {
            twiddle[static_cast<size_t>(k)] = cplx(std::cos(step * k), std::sin(step * k));
        }
        bitrev.resize(static_cast<size_t>(n));
        int log2n = 0;
        while ((int64_t{1} << log2n) < n) ++log2n;
        for (int64_t i = 0; i < n; ++i) {
            uint32_t r = 0;
            for (int b = 0; b < log2n; ++b) {
                if (i & (int64_t{1} << b)) r |= 1u << (log2n - 1 - b);
            }
            bitrev[static_cast<size_t>(i)] = r;
        }
    }
};

// Plans are built once per size and shared read-only afterwards.
inline const FftPlan& fft_plan(int64_t n) {
    static std::mutex mutex;
    static std::map<int64_t, std::unique_ptr<FftPlan>> plans;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find(n);
    if (it == plans.end()) {
        it = plans.emplace(n, std::make_unique<FftPlan>(n)).first;
    }
    return *it->second;
}

} // namespace detail

inline bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int64_t next_pow2(int64_t n) {
    int64_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 FFT. inverse=true applies the conjugate kernel and 1/n.
inline void fft_inplace(cplx* a, int64_t n, bool inverse = false) {
    SINGVOC_CHECK_VALUE(is_pow2(n), "fft size must be a power of two, got ", n);
    const auto& plan = detail::fft_plan(n);
    for (int64_t i = 0; i < n; ++i) {
        const auto j = static_cast<int64_t>(plan.bitrev[static_cast<size_t>(i)]);
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int64_t len = 2; len <= n; len <<= 1) {
        const int64_t half = len / 2;
        const int64_t stride = n / len;
        for (int64_t base = 0; base < n; base += len) {
            for (int64_t k = 0; k < half; ++k) {
                cplx w = plan.twiddle[static_cast<size_t>(k * stride)];
                if (inverse) w = std::conj(w);
                const cplx u = a[base + k];
                const cplx v = a[base + k + half] * w;
                a[base + k] = u + v;
                a[base + k + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (int64_t i = 0; i < n; ++i) a[i] *= inv;
    }
}

// Real input of length n (power of two) -> n/2+1 one-sided spectrum,
// X_k = sum_t x_t exp(-2*pi*i*k*t/n).
inline void rfft(const double* x, int64_t n, cplx* out) {
    std::vector<cplx> buf(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] = cplx(x[i], 0.0);
    fft_inplace(buf.data(), n);
    for (int64_t k = 0; k <= n / 2; ++k) out[k] = buf[static_cast<size_t>(k)];
}

// Hermitian extension of a one-sided spectrum back to n real samples.
inline void irfft(const cplx* spec, int64_t n, double* out) {
    std::vector<cplx> buf(static_cast<size_t>(n));
    for (int64_t k = 0; k <= n / 2; ++k) buf[static_cast<size_t>(k)] = spec[k];
    for (int64_t k = n / 2 + 1; k < n; ++k) {
        buf[static_cast<size_t>(k)] = std::conj(spec[n - k]);
    }
    fft_inplace(buf.data(), n, /*inverse=*/true);
    for (int64_t i = 0; i < n; ++i) out[i] = buf[static_cast<size_t>(i)].real();
}

} // namespace singvoc
