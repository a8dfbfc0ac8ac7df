#pragma once

#include <cstdint>
#include <vector>

#include "singvoc/discriminator.hpp"
#include "singvoc/mel.hpp"
#include "singvoc/stft.hpp"

namespace singvoc {

struct LossWeights {
    double sp = 10.0;   // multi-resolution spectrogram loss
    double fm = 1.0;    // feature matching
    double mel = 1.0;   // mel terms (both rates)
    double adv = 120.0; // adversarial
};

inline void validate(const LossWeights& w) {
    SINGVOC_CHECK_VALUE(w.sp > 0 && w.fm > 0 && w.mel > 0 && w.adv > 0,
                        "loss weights must be strictly positive");
}

// Spectral convergence + log-magnitude L1, averaged over the discriminator's
// four STFT parameter sets. The second argument is the reference signal.
class SpectralLoss {
public:
    explicit SpectralLoss(std::vector<dsp::StftConfig> configs = {{512, 128, 512},
                                                                  {1024, 256, 1024},
                                                                  {1024, 512, 1024},
                                                                  {2048, 512, 2048}})
        : configs_(std::move(configs)) {
        SINGVOC_CHECK_VALUE(!configs_.empty(), "spectral loss needs stft configs");
    }

    // (spectral convergence, log-magnitude L1), each averaged over configs
    std::pair<Tensor, Tensor> components(const Tensor& generated,
                                         const Tensor& reference) const {
        SINGVOC_CHECK_SHAPE(generated.rank() == 1 && reference.rank() == 1 &&
                                generated.dim(0) == reference.dim(0),
                            "spectral loss: length mismatch ", shape_str(generated.shape()),
                            " vs ", shape_str(reference.shape()));
        Tensor sc_total, lm_total;
        for (const auto& cfg : configs_) {
            Tensor gm = dsp::stft_magnitude(generated, cfg);
            Tensor rm = dsp::stft_magnitude(reference, cfg);
            Tensor diff = ops::sub(rm, gm);
            Tensor sc = ops::div(ops::sqrt(ops::sum_all(ops::mul(diff, diff))),
                                 ops::sqrt(ops::sum_all(ops::mul(rm, rm))));
            Tensor logmag = ops::mean_all(ops::abs(ops::sub(
                ops::log_shift(rm, dsp::kLogFloor), ops::log_shift(gm, dsp::kLogFloor))));
            sc_total = sc_total.defined() ? ops::add(sc_total, sc) : sc;
            lm_total = lm_total.defined() ? ops::add(lm_total, logmag) : logmag;
        }
        const double inv = 1.0 / static_cast<double>(configs_.size());
        return {ops::mul_scalar(sc_total, inv), ops::mul_scalar(lm_total, inv)};
    }

    Tensor operator()(const Tensor& generated, const Tensor& reference) const {
        auto [sc, lm] = components(generated, reference);
        return ops::add(sc, lm);
    }

private:
    std::vector<dsp::StftConfig> configs_;
};

// L1 distance between log mel spectrograms at a rate-specific analysis
// setting (48 kHz: 1024/240/960 with 120 mels; 8 kHz: 256/40/160 with 80).
class MelLoss {
public:
    MelLoss(int sample_rate, dsp::StftConfig cfg, int64_t n_mels)
        : sample_rate_(sample_rate), mel_(cfg, n_mels, sample_rate) {}

    static MelLoss for_rate(int sample_rate) {
        if (sample_rate == 48000) return MelLoss(48000, {1024, 240, 960}, 120);
        if (sample_rate == 8000) return MelLoss(8000, {256, 40, 160}, 80);
        fail<ValueError>("mel loss: unsupported rate ", sample_rate);
    }

    int sample_rate() const { return sample_rate_; }

    Tensor operator()(const Tensor& a, const Tensor& b) const {
        SINGVOC_CHECK_SHAPE(a.rank() == 1 && b.rank() == 1 && a.dim(0) == b.dim(0),
                            "mel loss: length mismatch ", shape_str(a.shape()), " vs ",
                            shape_str(b.shape()));
        return ops::mean_all(ops::abs(ops::sub(mel_.log_mel(a), mel_.log_mel(b))));
    }

    Tensor operator()(const AudioBuffer& a, const AudioBuffer& b) const {
        SINGVOC_CHECK_VALUE(a.sample_rate == sample_rate_ && b.sample_rate == sample_rate_,
                            "mel loss built for ", sample_rate_, " Hz, got ", a.sample_rate,
                            " and ", b.sample_rate);
        return (*this)(a.to_tensor(), b.to_tensor());
    }

private:
    int sample_rate_;
    dsp::MelAnalyzer mel_;
};

// Mean over sub-discriminators and layers of the per-layer mean absolute
// feature distance. Real features are treated as constants.
inline Tensor feature_match_loss(const DiscriminatorOutput& real,
                                 const DiscriminatorOutput& fake) {
    SINGVOC_CHECK_SHAPE(real.features.size() == fake.features.size(),
                        "feature match: sub-discriminator count mismatch (",
                        real.features.size(), " vs ", fake.features.size(), ")");
    Tensor total;
    int64_t count = 0;
    for (size_t s = 0; s < real.features.size(); ++s) {
        SINGVOC_CHECK_SHAPE(real.features[s].size() == fake.features[s].size(),
                            "feature match: layer count mismatch in sub ", s);
        for (size_t l = 0; l < real.features[s].size(); ++l) {
            SINGVOC_CHECK_SHAPE(real.features[s][l].shape() == fake.features[s][l].shape(),
                                "feature match: shape mismatch in sub ", s, " layer ", l);
            Tensor term =
                ops::mean_all(ops::abs(ops::sub(fake.features[s][l], real.features[s][l])));
            total = total.defined() ? ops::add(total, term) : term;
            ++count;
        }
    }
    SINGVOC_CHECK_VALUE(count > 0, "feature match: empty feature lists");
    return ops::mul_scalar(total, 1.0 / static_cast<double>(count));
}

namespace detail {
inline Tensor mean_over_subs(const std::vector<Tensor>& terms) {
    Tensor total;
    for (const Tensor& t : terms) total = total.defined() ? ops::add(total, t) : t;
    return ops::mul_scalar(total, 1.0 / static_cast<double>(terms.size()));
}
} // namespace detail

// LS-GAN generator objective: mean over sub-discriminators of mean (1-D)^2.
inline Tensor adversarial_generator_loss(const DiscriminatorOutput& fake) {
    SINGVOC_CHECK_VALUE(!fake.logits.empty(), "adversarial loss: no logits");
    std::vector<Tensor> terms;
    for (const Tensor& l : fake.logits) {
        Tensor one_minus = ops::add_scalar(ops::neg(l), 1.0);
        terms.push_back(ops::mean_all(ops::mul(one_minus, one_minus)));
    }
    return detail::mean_over_subs(terms);
}

// LS-GAN discriminator objective: mean (1-D(y))^2 + mean D(G(z))^2.
inline Tensor adversarial_discriminator_loss(const DiscriminatorOutput& real,
                                             const DiscriminatorOutput& fake) {
    SINGVOC_CHECK_VALUE(real.logits.size() == fake.logits.size(),
                        "adversarial loss: sub-discriminator count mismatch");
    std::vector<Tensor> real_terms, fake_terms;
    for (const Tensor& l : real.logits) {
        Tensor one_minus = ops::add_scalar(ops::neg(l), 1.0);
        real_terms.push_back(ops::mean_all(ops::mul(one_minus, one_minus)));
    }
    for (const Tensor& l : fake.logits) {
        fake_terms.push_back(ops::mean_all(ops::mul(l, l)));
    }
    return ops::add(detail::mean_over_subs(real_terms), detail::mean_over_subs(fake_terms));
}

struct GeneratorLossTerms {
    Tensor sp;
    Tensor fm;
    Tensor mel8k;
    Tensor mel48k;
    Tensor adv;
};

// lambda_sp * L_sp + lambda_fm * L_fm + lambda_mel * (L_m^8k + L_m^48k)
// + lambda_adv * L_adv
inline Tensor generator_total(const GeneratorLossTerms& t, const LossWeights& w) {
    validate(w);
    Tensor total = ops::mul_scalar(t.sp, w.sp);
    total = ops::add(total, ops::mul_scalar(t.fm, w.fm));
    total = ops::add(total, ops::mul_scalar(ops::add(t.mel8k, t.mel48k), w.mel));
    total = ops::add(total, ops::mul_scalar(t.adv, w.adv));
    return total;
}

} // namespace singvoc
