#pragma once

#include <cstdint>
#include <vector>

#include "singvoc/config.hpp"
#include "singvoc/discriminator.hpp"
#include "singvoc/feature_file.hpp"
#include "singvoc/generator.hpp"
#include "singvoc/losses.hpp"
#include "singvoc/optimizer.hpp"
#include "singvoc/resample.hpp"

namespace singvoc {

// One training item: full-length conditioning plus both waveform targets.
struct TrainClip {
    FeatureFrames features;  // normalized mel
    Tensor audio48;          // [hop * B]
    Tensor audio8;           // [guide_spf * B] instructive target
};

// Builds a training clip from raw audio: trims to a whole number of frames,
// extracts features and materializes the low-rate target.
inline TrainClip prepare_clip(const AudioBuffer& x48, const AnalysisSettings& settings,
                              int guide_rate, const MelStats* stats) {
    AudioBuffer trimmed = x48;
    const int64_t hop = settings.stft.hop;
    const int64_t usable = trimmed.size() / hop * hop;
    SINGVOC_CHECK_VALUE(usable >= 2 * hop, "clip too short: ", trimmed.size(), " samples");
    trimmed.samples.resize(static_cast<size_t>(usable));

    TrainClip clip;
    clip.features = extract_features(trimmed, settings);
    if (stats) clip.features.mel = normalize_mel(clip.features.mel, *stats);
    clip.audio48 = trimmed.to_tensor();
    AudioBuffer low = dsp::resample(trimmed, guide_rate);
    clip.audio8 = low.to_tensor();
    SINGVOC_CHECK_INTERNAL(
        clip.audio8.dim(0) == clip.features.frames() * (hop * guide_rate / settings.sample_rate),
        "instructive target length does not match the frame grid");
    return clip;
}

// Frame-aligned crop of a clip: frames [start, start+len).
inline TrainClip crop_clip(const TrainClip& clip, int64_t start, int64_t len) {
    const int64_t b = clip.features.frames();
    SINGVOC_CHECK_VALUE(start >= 0 && len >= 2 && start + len <= b, "bad crop [", start, ",",
                        start + len, ") of ", b, " frames");
    const int64_t spf48 = clip.audio48.dim(0) / b;
    const int64_t spf8 = clip.audio8.dim(0) / b;
    TrainClip out;
    out.features.sample_rate = clip.features.sample_rate;
    out.features.hop = clip.features.hop;
    out.features.mel = ops::slice(clip.features.mel, 0, start, len);
    out.features.f0.assign(clip.features.f0.begin() + start,
                           clip.features.f0.begin() + start + len);
    out.features.loudness.assign(clip.features.loudness.begin() + start,
                                 clip.features.loudness.begin() + start + len);
    out.audio48 = ops::slice(clip.audio48, 0, start * spf48, len * spf48);
    out.audio8 = ops::slice(clip.audio8, 0, start * spf8, len * spf8);
    return out;
}

struct StepMetrics {
    int64_t step = 0;
    double lr = 0.0;
    double loss_sp = 0.0;
    double loss_fm = 0.0;
    double loss_mel8k = 0.0;
    double loss_mel48k = 0.0;
    double loss_adv_g = 0.0;
    double loss_g_total = 0.0;
    double loss_d = 0.0;
    double grad_norm_g = 0.0;
    double grad_norm_d = 0.0;

    bool finite() const {
        for (double v : {lr, loss_sp, loss_fm, loss_mel8k, loss_mel48k, loss_adv_g,
                         loss_g_total, loss_d, grad_norm_g, grad_norm_d}) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

struct TrainSettings {
    LossWeights weights;
    LrSchedule lr;
    AdamW::Options adam;
    double grad_clip = 10.0;
    int64_t crop_frames = 100;
    int64_t batch_size = 1;
    std::vector<dsp::StftConfig> sp_configs{{512, 128, 512},
                                            {1024, 256, 1024},
                                            {1024, 512, 1024},
                                            {2048, 512, 2048}};
};

// Alternating LS-GAN training: one discriminator step on detached fakes, then
// one generator step against the updated discriminators. G and D use separate
// optimizers with identical hyperparameters and one shared schedule.
class Trainer {
public:
    Trainer(Generator& gen, DiscriminatorSet& disc, TrainSettings settings, Rng rng)
        : gen_(gen),
          disc_(disc),
          settings_(std::move(settings)),
          rng_(rng),
          opt_g_(settings_.adam),
          opt_d_(settings_.adam),
          sp_loss_(settings_.sp_configs),
          mel48_(MelLoss::for_rate(gen.options().sample_rate)),
          mel8_(MelLoss::for_rate(gen.options().guide_rate)) {}

    int64_t step() const { return step_; }
    Rng& rng() { return rng_; }
    AdamW& opt_g() { return opt_g_; }
    AdamW& opt_d() { return opt_d_; }
    void restore_step(int64_t step) { step_ = step; }

    StepMetrics train_step(const std::vector<TrainClip>& corpus) {
        SINGVOC_CHECK_VALUE(!corpus.empty(), "train_step: empty corpus");
        StepMetrics m;
        m.step = step_ + 1;
        m.lr = settings_.lr.at(step_ + 1);
        const int64_t batch = settings_.batch_size;
        const double inv_batch = 1.0 / static_cast<double>(batch);

        // fixed batch selection per step, drawn from the training stream
        std::vector<std::pair<size_t, int64_t>> picks;
        for (int64_t i = 0; i < batch; ++i) {
            const size_t clip_idx =
                static_cast<size_t>(rng_.next_below(static_cast<uint64_t>(corpus.size())));
            const int64_t b = corpus[clip_idx].features.frames();
            const int64_t len = std::min(settings_.crop_frames, b);
            const int64_t start =
                static_cast<int64_t>(rng_.next_below(static_cast<uint64_t>(b - len + 1)));
            picks.emplace_back(clip_idx, start);
        }

        // --- discriminator step on detached fakes ---------------------------
        disc_.zero_grad();
        for (const auto& [clip_idx, start] : picks) {
            const TrainClip crop =
                crop_clip(corpus[clip_idx], start,
                          std::min(settings_.crop_frames, corpus[clip_idx].features.frames()));
            Tensor fake48;
            {
                NoGradGuard ng;
                auto out = gen_.forward(crop.features, rng_, /*training=*/true);
                fake48 = out.audio48k;
            }
            GradTape tape;
            DiscriminatorOutput real_out = disc_.forward(crop.audio48);
            DiscriminatorOutput fake_out = disc_.forward(fake48);
            Tensor loss_d =
                ops::mul_scalar(adversarial_discriminator_loss(real_out, fake_out), inv_batch);
            m.loss_d += loss_d.item();
            tape.backward(loss_d);
        }
        m.grad_norm_d = clip_global_norm(disc_.params(), settings_.grad_clip);
        opt_d_.step(disc_.params(), m.lr);

        // --- generator step against the updated discriminators --------------
        gen_.zero_grad();
        disc_.zero_grad();  // G backward deposits gradients through D; scratch
        for (const auto& [clip_idx, start] : picks) {
            const TrainClip crop =
                crop_clip(corpus[clip_idx], start,
                          std::min(settings_.crop_frames, corpus[clip_idx].features.frames()));
            GradTape tape;
            auto out = gen_.forward(crop.features, rng_, /*training=*/true);
            DiscriminatorOutput real_out;
            {
                NoGradGuard ng;
                real_out = disc_.forward(crop.audio48);
            }
            DiscriminatorOutput fake_out = disc_.forward(out.audio48k);
            GeneratorLossTerms terms;
            terms.sp = sp_loss_(out.audio48k, crop.audio48);
            terms.fm = feature_match_loss(real_out, fake_out);
            terms.mel8k = mel8_(out.guide8k, crop.audio8);
            terms.mel48k = mel48_(out.audio48k, crop.audio48);
            terms.adv = adversarial_generator_loss(fake_out);
            Tensor total = ops::mul_scalar(generator_total(terms, settings_.weights), inv_batch);
            m.loss_sp += terms.sp.item() * inv_batch;
            m.loss_fm += terms.fm.item() * inv_batch;
            m.loss_mel8k += terms.mel8k.item() * inv_batch;
            m.loss_mel48k += terms.mel48k.item() * inv_batch;
            m.loss_adv_g += terms.adv.item() * inv_batch;
            m.loss_g_total += total.item();
            tape.backward(total);
        }
        m.grad_norm_g = clip_global_norm(gen_.params(), settings_.grad_clip);
        opt_g_.step(gen_.params(), m.lr);

        ++step_;
        SINGVOC_CHECK_VALUE(m.finite(), "non-finite training metrics at step ", m.step);
        return m;
    }

private:
    Generator& gen_;
    DiscriminatorSet& disc_;
    TrainSettings settings_;
    Rng rng_;
    AdamW opt_g_, opt_d_;
    SpectralLoss sp_loss_;
    MelLoss mel48_, mel8_;
    int64_t step_ = 0;
};

} // namespace singvoc
