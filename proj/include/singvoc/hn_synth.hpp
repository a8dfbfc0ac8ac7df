#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "singvoc/fft.hpp"
#include "singvoc/ops.hpp"
#include "singvoc/rng.hpp"
#include "singvoc/stft.hpp"

namespace singvoc {
namespace synth {

// Harmonics whose frequency lands above sr/2 - margin are masked so the
// rendered band stays alias-free with headroom.
constexpr double kNyquistMarginHz = 20.0;

// Frame-rate head outputs of the control network plus the conditioning f0.
struct HnControls {
    Tensor harm_amp;           // [B,1], strictly positive
    Tensor harm_dist;          // [B,Kh], rows sum to 1 after masking (0 when unvoiced)
    Tensor noise_mags;         // [B,Nb], strictly positive
    std::vector<double> f0;    // [B] Hz, 0 marks unvoiced frames

    int64_t frames() const { return harm_amp.dim(0); }
};

// Zero out harmonics above the Nyquist guard band and renormalize each frame
// row to sum to one. Unvoiced frames (f0 = 0) produce all-zero rows.
inline Tensor mask_normalize_dist(const Tensor& raw, const std::vector<double>& f0,
                                  int sample_rate) {
    SINGVOC_CHECK_SHAPE(raw.rank() == 2, "mask_normalize_dist expects [B,K], got ",
                        shape_str(raw.shape()));
    const int64_t b = raw.dim(0), k = raw.dim(1);
    SINGVOC_CHECK_SHAPE(static_cast<int64_t>(f0.size()) == b,
                        "mask_normalize_dist: f0 length ", f0.size(), " != frames ", b);
    const double limit = sample_rate / 2.0 - kNyquistMarginHz;
    auto mask = std::make_shared<std::vector<double>>(static_cast<size_t>(b * k), 0.0);
    for (int64_t i = 0; i < b; ++i) {
        if (f0[static_cast<size_t>(i)] <= 0.0) continue;
        for (int64_t j = 0; j < k; ++j) {
            if (static_cast<double>(j + 1) * f0[static_cast<size_t>(i)] <= limit) {
                (*mask)[static_cast<size_t>(i * k + j)] = 1.0;
            }
        }
    }
    Tensor out = Tensor::zeros({b, k});
    auto sums = std::make_shared<std::vector<double>>(static_cast<size_t>(b), 0.0);
    for (int64_t i = 0; i < b; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < k; ++j) {
            s += (*mask)[static_cast<size_t>(i * k + j)] * raw.data()[i * k + j];
        }
        (*sums)[static_cast<size_t>(i)] = s;
        if (s <= 0.0) continue;
        for (int64_t j = 0; j < k; ++j) {
            out.data()[i * k + j] =
                (*mask)[static_cast<size_t>(i * k + j)] * raw.data()[i * k + j] / s;
        }
    }
    if (ops::detail::recording({&raw})) {
        out.set_requires_grad(true);
        auto ri = raw.impl(), oi = out.impl();
        GradTape::current()->record([ri, oi, mask, sums, b, k] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ri.get());
            for (int64_t i = 0; i < b; ++i) {
                const double s = (*sums)[static_cast<size_t>(i)];
                if (s <= 0.0) continue;
                const double* g = oi->grad.data() + i * k;
                const double* o = oi->data.data() + i * k;
                double dot = 0.0;
                for (int64_t j = 0; j < k; ++j) dot += g[j] * o[j];
                for (int64_t j = 0; j < k; ++j) {
                    const double m = (*mask)[static_cast<size_t>(i * k + j)];
                    if (m == 0.0) continue;
                    ri->grad[i * k + j] += m * (g[j] - dot) / s;
                }
            }
        });
    }
    return out;
}

// Frame-rate -> sample-rate control upsampling; the length contract is
// T = samples_per_frame * B.
inline Tensor interpolate_controls(const Tensor& frames, int64_t t_out,
                                   int64_t samples_per_frame) {
    SINGVOC_CHECK_VALUE(t_out == samples_per_frame * frames.dim(0),
                        "interpolate_controls: T=", t_out, " must equal ",
                        samples_per_frame, "*B=", samples_per_frame * frames.dim(0));
    return ops::interp_linear(frames, t_out);
}

inline std::vector<double> interp_f0(const std::vector<double>& f0, int64_t t_out) {
    const int64_t b = static_cast<int64_t>(f0.size());
    SINGVOC_CHECK_VALUE(b >= 2 && t_out >= 2, "interp_f0: need >= 2 frames and samples");
    std::vector<double> out(static_cast<size_t>(t_out));
    const double scale = static_cast<double>(b - 1) / static_cast<double>(t_out - 1);
    for (int64_t t = 0; t < t_out; ++t) {
        const double pos = static_cast<double>(t) * scale;
        int64_t i = static_cast<int64_t>(pos);
        if (i >= b - 1) i = b - 2;
        const double w = pos - static_cast<double>(i);
        out[static_cast<size_t>(t)] =
            (1.0 - w) * f0[static_cast<size_t>(i)] + w * f0[static_cast<size_t>(i + 1)];
    }
    return out;
}

// Additive sine bank: y[t] = A[t] * sum_k d[t,k] * sin((k+1) * phi[t]) with
// phi[t] = phi[t-1] + 2*pi*f0[t-1]/sr and phi[0] = phase0. Harmonics above
// the guard band and unvoiced samples render silence. Returns the final phase
// so consecutive renders can be chained continuously.
inline std::pair<Tensor, double> harmonic_oscillator(const Tensor& amp, const Tensor& dist,
                                                     const std::vector<double>& f0,
                                                     int sample_rate, double phase0 = 0.0) {
    SINGVOC_CHECK_SHAPE(amp.rank() == 2 && amp.dim(1) == 1, "oscillator amp must be [T,1]");
    SINGVOC_CHECK_SHAPE(dist.rank() == 2 && dist.dim(0) == amp.dim(0),
                        "oscillator dist must be [T,K] matching amp, got ",
                        shape_str(dist.shape()));
    const int64_t t_len = amp.dim(0), k = dist.dim(1);
    SINGVOC_CHECK_SHAPE(static_cast<int64_t>(f0.size()) == t_len,
                        "oscillator f0 length mismatch");
    for (double f : f0) SINGVOC_CHECK_VALUE(f >= 0.0, "oscillator: negative f0");

    auto phases = std::make_shared<std::vector<double>>(static_cast<size_t>(t_len));
    double phi = phase0;
    const double two_pi = 2.0 * M_PI;
    for (int64_t t = 0; t < t_len; ++t) {
        (*phases)[static_cast<size_t>(t)] = phi;
        phi += two_pi * f0[static_cast<size_t>(t)] / static_cast<double>(sample_rate);
        // keep the accumulator in range over long renders
        if (phi > 1e9) phi = std::fmod(phi, two_pi);
    }
    const double limit = sample_rate / 2.0 - kNyquistMarginHz;
    auto f0v = std::make_shared<std::vector<double>>(f0);

    Tensor out = Tensor::zeros({t_len});
    {
        const double* pa = amp.data();
        const double* pd = dist.data();
        double* po = out.data();
        parallel_chunks(t_len, [&](int64_t t0, int64_t t1) {
            for (int64_t t = t0; t < t1; ++t) {
                const double f = (*f0v)[static_cast<size_t>(t)];
                if (f <= 0.0) continue;
                const double ph = (*phases)[static_cast<size_t>(t)];
                double acc = 0.0;
                for (int64_t j = 0; j < k; ++j) {
                    const double fk = static_cast<double>(j + 1) * f;
                    if (fk > limit) break;  // harmonics are ordered in frequency
                    acc += pd[t * k + j] * std::sin(static_cast<double>(j + 1) * ph);
                }
                po[t] = pa[t] * acc;
            }
        });
    }
    if (ops::detail::recording({&amp, &dist})) {
        out.set_requires_grad(true);
        auto ai = amp.impl(), di = dist.impl(), oi = out.impl();
        const bool ga = amp.requires_grad(), gd = dist.requires_grad();
        GradTape::current()->record([ai, di, oi, phases, f0v, ga, gd, t_len, k, limit] {
            if (oi->grad.empty()) return;
            if (ga) Tensor::ensure_grad(ai.get());
            if (gd) Tensor::ensure_grad(di.get());
            parallel_chunks(t_len, [&](int64_t t0, int64_t t1) {
                for (int64_t t = t0; t < t1; ++t) {
                    const double g = oi->grad[t];
                    if (g == 0.0) continue;
                    const double f = (*f0v)[static_cast<size_t>(t)];
                    if (f <= 0.0) continue;
                    const double ph = (*phases)[static_cast<size_t>(t)];
                    const double a = ai->data[t];
                    double acc = 0.0;
                    for (int64_t j = 0; j < k; ++j) {
                        const double fk = static_cast<double>(j + 1) * f;
                        if (fk > limit) break;
                        const double s = std::sin(static_cast<double>(j + 1) * ph);
                        if (gd) di->grad[t * k + j] += g * a * s;
                        acc += di->data[t * k + j] * s;
                    }
                    if (ga) ai->grad[t] += g * acc;
                }
            });
        });
    }
    return {out, std::fmod(phi, two_pi)};
}

// Per-frame zero-phase FIR from magnitude responses applied to uniform white
// noise in [-1,1), hann overlap-add at 50%. Each synthesis frame uses the
// magnitudes of the control frame under its center.
inline Tensor filtered_noise(const Tensor& mags, int64_t t_out, Rng& rng,
                             int64_t frame_size, int64_t control_hop) {
    SINGVOC_CHECK_SHAPE(mags.rank() == 2, "filtered_noise expects [B,Nb], got ",
                        shape_str(mags.shape()));
    SINGVOC_CHECK_VALUE(is_pow2(frame_size), "noise frame size must be a power of two");
    const int64_t b = mags.dim(0), nb = mags.dim(1);
    SINGVOC_CHECK_SHAPE(nb == frame_size / 2 + 1, "filtered_noise: ", nb,
                        " magnitude bins do not match frame size ", frame_size, " (",
                        frame_size / 2 + 1, " bins)");
    SINGVOC_CHECK_VALUE(t_out > 0, "filtered_noise: empty output");

    auto noise = std::make_shared<std::vector<double>>(static_cast<size_t>(t_out));
    for (auto& v : *noise) v = rng.uniform(-1.0, 1.0);

    const int64_t hop = frame_size / 2;
    const int64_t num_frames = (t_out + hop - 1) / hop;
    auto window = std::make_shared<std::vector<double>>(dsp::hann_window(frame_size));

    const auto frame_to_control = [b, hop, control_hop](int64_t f) {
        int64_t c = (f * hop + hop) / control_hop;
        return std::min<int64_t>(std::max<int64_t>(c, 0), b - 1);
    };

    Tensor out = Tensor::zeros({t_out});
    {
        double* po = out.data();
        std::vector<double> buf(static_cast<size_t>(frame_size));
        std::vector<cplx> spec(static_cast<size_t>(nb));
        // overlapping writes: sequential over frames
        for (int64_t f = 0; f < num_frames; ++f) {
            const int64_t start = f * hop;
            for (int64_t i = 0; i < frame_size; ++i) {
                const int64_t j = start + i;
                buf[static_cast<size_t>(i)] =
                    j < t_out ? (*noise)[static_cast<size_t>(j)] * (*window)[static_cast<size_t>(i)]
                              : 0.0;
            }
            rfft(buf.data(), frame_size, spec.data());
            const double* m = mags.data() + frame_to_control(f) * nb;
            for (int64_t kk = 0; kk < nb; ++kk) spec[static_cast<size_t>(kk)] *= m[kk];
            irfft(spec.data(), frame_size, buf.data());
            const int64_t lim = std::min(frame_size, t_out - start);
            for (int64_t i = 0; i < lim; ++i) po[start + i] += buf[static_cast<size_t>(i)];
        }
    }
    if (ops::detail::recording({&mags})) {
        out.set_requires_grad(true);
        auto mi = mags.impl(), oi = out.impl();
        GradTape::current()->record([mi, oi, noise, window, t_out, b, nb, hop, num_frames,
                                     frame_size, frame_to_control] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(mi.get());
            std::vector<double> buf(static_cast<size_t>(frame_size));
            std::vector<cplx> zspec(static_cast<size_t>(nb)), gspec(static_cast<size_t>(nb));
            const double inv_n = 1.0 / static_cast<double>(frame_size);
            for (int64_t f = 0; f < num_frames; ++f) {
                const int64_t start = f * hop;
                for (int64_t i = 0; i < frame_size; ++i) {
                    const int64_t j = start + i;
                    buf[static_cast<size_t>(i)] =
                        j < t_out
                            ? (*noise)[static_cast<size_t>(j)] * (*window)[static_cast<size_t>(i)]
                            : 0.0;
                }
                rfft(buf.data(), frame_size, zspec.data());
                for (int64_t i = 0; i < frame_size; ++i) {
                    const int64_t j = start + i;
                    buf[static_cast<size_t>(i)] = j < t_out ? oi->grad[j] : 0.0;
                }
                rfft(buf.data(), frame_size, gspec.data());
                double* gm = mi->grad.data() + frame_to_control(f) * nb;
                for (int64_t kk = 0; kk < nb; ++kk) {
                    const double sided = (kk == 0 || kk == frame_size / 2) ? 1.0 : 2.0;
                    gm[kk] += sided * inv_n *
                              (zspec[static_cast<size_t>(kk)] *
                               std::conj(gspec[static_cast<size_t>(kk)]))
                                  .real();
                }
            }
        });
    }
    return out;
}

// Learned-impulse-response reverb. The first tap is fixed to 1 (identity);
// only the tail is trained. Convolution runs in the frequency domain and the
// output is truncated to the input length.
class Reverb {
public:
    Reverb(int64_t ir_length, Rng& rng) : ir_length_(ir_length) {
        SINGVOC_CHECK_VALUE(ir_length >= 1, "reverb ir length must be >= 1");
        tail_ = Tensor::zeros({std::max<int64_t>(ir_length - 1, 1)}, /*requires_grad=*/true);
        if (ir_length > 1) {
            for (auto& v : tail_.vec()) v = 1e-4 * rng.gaussian();
        }
    }

    int64_t ir_length() const { return ir_length_; }
    Tensor& tail() { return tail_; }
    const Tensor& tail() const { return tail_; }

    Tensor apply(const Tensor& dry) const {
        SINGVOC_CHECK_SHAPE(dry.rank() == 1, "reverb expects a rank-1 signal");
        const int64_t t_len = dry.dim(0);
        const int64_t ir_len = ir_length_;
        const int64_t big = next_pow2(t_len + ir_len - 1);
        std::vector<cplx> dspec(static_cast<size_t>(big), cplx(0, 0));
        std::vector<cplx> hspec(static_cast<size_t>(big), cplx(0, 0));
        for (int64_t i = 0; i < t_len; ++i) dspec[static_cast<size_t>(i)] = cplx(dry.data()[i], 0);
        hspec[0] = cplx(1.0, 0.0);
        for (int64_t i = 1; i < ir_len; ++i) {
            hspec[static_cast<size_t>(i)] = cplx(tail_.data()[i - 1], 0);
        }
        fft_inplace(dspec.data(), big);
        fft_inplace(hspec.data(), big);
        std::vector<cplx> y(static_cast<size_t>(big));
        for (int64_t i = 0; i < big; ++i) {
            y[static_cast<size_t>(i)] = dspec[static_cast<size_t>(i)] * hspec[static_cast<size_t>(i)];
        }
        fft_inplace(y.data(), big, true);
        Tensor out = Tensor::zeros({t_len});
        for (int64_t i = 0; i < t_len; ++i) out.data()[i] = y[static_cast<size_t>(i)].real();

        if (ops::detail::recording({&dry, &tail_})) {
            out.set_requires_grad(true);
            auto di = dry.impl(), ti = tail_.impl(), oi = out.impl();
            const bool gd = dry.requires_grad(), gt = tail_.requires_grad();
            auto dsaved = std::make_shared<std::vector<cplx>>(std::move(dspec));
            auto hsaved = std::make_shared<std::vector<cplx>>(std::move(hspec));
            GradTape::current()->record([di, ti, oi, dsaved, hsaved, gd, gt, t_len, ir_len,
                                         big] {
                if (oi->grad.empty()) return;
                std::vector<cplx> gspec(static_cast<size_t>(big), cplx(0, 0));
                for (int64_t i = 0; i < t_len; ++i) {
                    gspec[static_cast<size_t>(i)] = cplx(oi->grad[i], 0);
                }
                fft_inplace(gspec.data(), big);
                if (gd) {
                    Tensor::ensure_grad(di.get());
                    std::vector<cplx> tmp(static_cast<size_t>(big));
                    for (int64_t i = 0; i < big; ++i) {
                        tmp[static_cast<size_t>(i)] = gspec[static_cast<size_t>(i)] *
                                                      std::conj((*hsaved)[static_cast<size_t>(i)]);
                    }
                    fft_inplace(tmp.data(), big, true);
                    for (int64_t i = 0; i < t_len; ++i) {
                        di->grad[i] += tmp[static_cast<size_t>(i)].real();
                    }
                }
                if (gt && ir_len > 1) {
                    Tensor::ensure_grad(ti.get());
                    std::vector<cplx> tmp(static_cast<size_t>(big));
                    for (int64_t i = 0; i < big; ++i) {
                        tmp[static_cast<size_t>(i)] = gspec[static_cast<size_t>(i)] *
                                                      std::conj((*dsaved)[static_cast<size_t>(i)]);
                    }
                    fft_inplace(tmp.data(), big, true);
                    for (int64_t s = 1; s < ir_len; ++s) {
                        ti->grad[s - 1] += tmp[static_cast<size_t>(s)].real();
                    }
                }
            });
        }
        return out;
    }

private:
    int64_t ir_length_;
    Tensor tail_;
};

struct GuideRender {
    Tensor audio;          // [T] post-reverb guide waveform (training path)
    Tensor harm_samples;   // [T] pre-reverb harmonic stream
    Tensor noise_samples;  // [T] pre-reverb noise stream
    double final_phase = 0.0;
};

// Full low-rate render: oscillator + filtered noise, then reverb. The
// pre-reverb streams are what the latent refiner consumes downstream.
inline GuideRender render_guide(const HnControls& ctrl, int sample_rate,
                                int64_t samples_per_frame, Rng& rng, const Reverb& reverb,
                                bool apply_reverb = true, double phase0 = 0.0) {
    const int64_t b = ctrl.frames();
    const int64_t t_len = b * samples_per_frame;
    Tensor amp_t = interpolate_controls(ctrl.harm_amp, t_len, samples_per_frame);
    Tensor dist_t = interpolate_controls(ctrl.harm_dist, t_len, samples_per_frame);
    std::vector<double> f0_t = interp_f0(ctrl.f0, t_len);

    GuideRender r;
    auto [harm, phase] = harmonic_oscillator(amp_t, dist_t, f0_t, sample_rate, phase0);
    r.harm_samples = harm;
    r.final_phase = phase;
    const int64_t noise_frame = 2 * (ctrl.noise_mags.dim(1) - 1);
    r.noise_samples = filtered_noise(ctrl.noise_mags, t_len, rng, noise_frame,
                                     samples_per_frame);
    Tensor dry = ops::add(r.harm_samples, r.noise_samples);
    r.audio = apply_reverb ? reverb.apply(dry) : dry;
    return r;
}

} // namespace synth
} // namespace singvoc
