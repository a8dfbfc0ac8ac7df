#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "singvoc/mel.hpp"
#include "singvoc/nn.hpp"
#include "singvoc/stft.hpp"

namespace singvoc {

// Per-sub-discriminator logit maps plus the intermediate feature maps the
// feature-matching loss consumes.
struct DiscriminatorOutput {
    std::vector<Tensor> logits;
    std::vector<std::vector<Tensor>> features;  // [sub][layer]

    int64_t num_subs() const { return static_cast<int64_t>(logits.size()); }
};

// Zero-pad to a multiple of p and fold into (time, phase) planes.
inline Tensor reshape_period(const Tensor& x, int64_t p) {
    SINGVOC_CHECK_SHAPE(x.rank() == 1, "reshape_period expects a rank-1 signal");
    SINGVOC_CHECK_VALUE(p >= 2, "reshape_period: period must be >= 2, got ", p);
    const int64_t n = x.dim(0);
    const int64_t rows = (n + p - 1) / p;
    Tensor padded = rows * p == n ? x : ops::pad_const(x, 0, rows * p - n);
    return ops::reshape(padded, {1, rows, p});
}

struct MpdOptions {
    std::vector<int64_t> periods{2, 3, 5, 7, 11};
    std::vector<int64_t> channels{32, 64, 128, 256, 512};
    int64_t kernel = 5;
    int64_t stride = 3;
};

// Multi-period discriminator: one 2-D conv stack per prime period, convolving
// along the folded time axis only.
class MultiPeriodDiscriminator : public nn::Module {
public:
    MultiPeriodDiscriminator(const MpdOptions& opt, Rng& rng) : opt_(opt) {
        SINGVOC_CHECK_VALUE(!opt.periods.empty() && !opt.channels.empty(),
                            "mpd needs periods and channels");
        for (size_t i = 0; i < opt.periods.size(); ++i) {
            SINGVOC_CHECK_VALUE(opt.periods[i] >= 2, "mpd periods must be >= 2");
            if (i > 0) {
                SINGVOC_CHECK_VALUE(opt.periods[i] > opt.periods[i - 1],
                                    "mpd periods must be strictly increasing");
            }
            for (size_t j = 0; j < i; ++j) {
                SINGVOC_CHECK_VALUE(std::gcd(opt.periods[i], opt.periods[j]) == 1,
                                    "mpd periods must be pairwise coprime");
            }
        }
        const int64_t pad = (opt.kernel - 1) / 2;
        for (size_t p = 0; p < opt.periods.size(); ++p) {
            int64_t cin = 1;
            for (size_t l = 0; l < opt.channels.size(); ++l) {
                stacks_.emplace_back(cin, opt.channels[l], opt.kernel, 1, opt.stride, 1, pad,
                                     0, rng);
                adopt("p" + std::to_string(opt.periods[p]) + ".conv" + std::to_string(l),
                      stacks_.back());
                cin = opt.channels[l];
            }
            finals_.emplace_back(cin, 1, 3, 1, 1, 1, 1, 0, rng);
            adopt("p" + std::to_string(opt.periods[p]) + ".out", finals_.back());
        }
    }

    const MpdOptions& options() const { return opt_; }
    int64_t num_subs() const { return static_cast<int64_t>(opt_.periods.size()); }
    int64_t layers_per_sub() const { return static_cast<int64_t>(opt_.channels.size()); }

    DiscriminatorOutput forward(const Tensor& audio) const {
        DiscriminatorOutput out;
        const int64_t layers = layers_per_sub();
        for (size_t p = 0; p < opt_.periods.size(); ++p) {
            Tensor x = reshape_period(audio, opt_.periods[p]);
            std::vector<Tensor> feats;
            for (int64_t l = 0; l < layers; ++l) {
                x = ops::leaky_relu(stacks_[p * static_cast<size_t>(layers) +
                                            static_cast<size_t>(l)]
                                        .forward(x));
                feats.push_back(x);
            }
            out.logits.push_back(finals_[p].forward(x));
            out.features.push_back(std::move(feats));
        }
        return out;
    }

    // test hook: zeroing the output projections makes every logit zero
    void zero_output_layers() {
        for (auto& f : finals_) {
            for (auto& v : f.weight().vec()) v = 0.0;
            for (auto& v : f.bias().vec()) v = 0.0;
        }
    }

private:
    MpdOptions opt_;
    std::vector<nn::Conv2dLayer> stacks_;  // periods x layers, row-major
    std::vector<nn::Conv2dLayer> finals_;
};

struct MbsdOptions {
    // (FFT size, frame shift, window length)
    std::vector<std::array<int64_t, 3>> stft_sets{
        {512, 128, 512}, {1024, 256, 1024}, {1024, 512, 1024}, {2048, 512, 2048}};
    std::vector<int64_t> channels{32, 64, 128, 256, 256};
    int64_t kernel_freq = 3;
    int64_t kernel_time = 9;
};

// Multi-resolution multi-band spectrogram discriminator: an independent conv
// stack per (STFT resolution, frequency band) pair, K = sets * 3 in total,
// operating on log magnitudes. Band splitting reuses the dsp partition.
class MultiBandSpectrogramDiscriminator : public nn::Module {
public:
    MultiBandSpectrogramDiscriminator(const MbsdOptions& opt, Rng& rng) : opt_(opt) {
        SINGVOC_CHECK_VALUE(!opt.stft_sets.empty() && !opt.channels.empty(),
                            "mbsd needs stft sets and channels");
        SINGVOC_CHECK_VALUE(opt.kernel_freq % 2 == 1 && opt.kernel_time % 2 == 1,
                            "mbsd kernels must be odd");
        const int64_t pf = (opt.kernel_freq - 1) / 2;
        const int64_t pt = (opt.kernel_time - 1) / 2;
        for (size_t s = 0; s < opt.stft_sets.size(); ++s) {
            for (int band = 0; band < 3; ++band) {
                int64_t cin = 1;
                for (size_t l = 0; l < opt.channels.size(); ++l) {
                    // stride (1,2) on the middle layers halves the time axis
                    const int64_t st = (l == 0 || l + 1 == opt.channels.size()) ? 1 : 2;
                    stacks_.emplace_back(cin, opt.channels[l], opt.kernel_freq,
                                         opt.kernel_time, 1, st, pf, pt, rng);
                    adopt("s" + std::to_string(s) + "b" + std::to_string(band) + ".conv" +
                              std::to_string(l),
                          stacks_.back());
                    cin = opt.channels[l];
                }
                finals_.emplace_back(cin, 1, 3, 3, 1, 1, 1, 1, rng);
                adopt("s" + std::to_string(s) + "b" + std::to_string(band) + ".out",
                      finals_.back());
            }
        }
    }

    const MbsdOptions& options() const { return opt_; }
    int64_t num_subs() const { return static_cast<int64_t>(opt_.stft_sets.size()) * 3; }
    int64_t layers_per_sub() const { return static_cast<int64_t>(opt_.channels.size()); }

    DiscriminatorOutput forward(const Tensor& audio) const {
        DiscriminatorOutput out;
        const int64_t layers = layers_per_sub();
        size_t sub = 0;
        for (const auto& set : opt_.stft_sets) {
            dsp::StftConfig cfg{set[0], set[1], set[2]};
            Tensor logmag = ops::log_shift(dsp::stft_magnitude(audio, cfg), dsp::kLogFloor);
            auto bands = dsp::band_split(logmag);
            for (int band = 0; band < 3; ++band) {
                // [B, bins] -> [1, bins, frames]
                Tensor img = ops::transpose2(bands[static_cast<size_t>(band)]);
                img = ops::reshape(img, {1, img.dim(0), img.dim(1)});
                std::vector<Tensor> feats;
                Tensor x = img;
                for (int64_t l = 0; l < layers; ++l) {
                    x = ops::leaky_relu(
                        stacks_[sub * static_cast<size_t>(layers) + static_cast<size_t>(l)]
                            .forward(x));
                    feats.push_back(x);
                }
                out.logits.push_back(finals_[sub].forward(x));
                out.features.push_back(std::move(feats));
                ++sub;
            }
        }
        return out;
    }

    void zero_output_layers() {
        for (auto& f : finals_) {
            for (auto& v : f.weight().vec()) v = 0.0;
            for (auto& v : f.bias().vec()) v = 0.0;
        }
    }

private:
    MbsdOptions opt_;
    std::vector<nn::Conv2dLayer> stacks_;  // subs x layers, row-major
    std::vector<nn::Conv2dLayer> finals_;
};

// Both critics behind one interface; sub-discriminator outputs concatenate
// (MPD first, then MBSD).
class DiscriminatorSet : public nn::Module {
public:
    DiscriminatorSet(const MpdOptions& mpd, const MbsdOptions& mbsd, Rng rng)
        : mpd_(mpd, rng), mbsd_(mbsd, rng) {
        adopt("mpd", mpd_);
        adopt("mbsd", mbsd_);
    }

    MultiPeriodDiscriminator& mpd() { return mpd_; }
    MultiBandSpectrogramDiscriminator& mbsd() { return mbsd_; }

    DiscriminatorOutput forward(const Tensor& audio) const {
        DiscriminatorOutput a = mpd_.forward(audio);
        DiscriminatorOutput b = mbsd_.forward(audio);
        for (size_t i = 0; i < b.logits.size(); ++i) {
            a.logits.push_back(b.logits[i]);
            a.features.push_back(std::move(b.features[i]));
        }
        return a;
    }

private:
    MultiPeriodDiscriminator mpd_;
    MultiBandSpectrogramDiscriminator mbsd_;
};

} // namespace singvoc
