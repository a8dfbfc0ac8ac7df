#pragma once

#include <cstdint>

#include "singvoc/control_net.hpp"
#include "singvoc/features.hpp"
#include "singvoc/latent_unet.hpp"
#include "singvoc/wavenet.hpp"

namespace singvoc {

struct GeneratorOptions {
    ControlNetOptions control;
    LatentUnetOptions unet;
    WaveNetOptions wavenet;
    int sample_rate = 48000;
    int guide_rate = 8000;
    int64_t hop = 240;            // full-rate samples per frame
    int64_t reverb_ir_length = 4000;
    bool ablate_latent = false;   // feed zeros instead of the refined latent

    int64_t guide_samples_per_frame() const { return hop * guide_rate / sample_rate; }
    int64_t upsample_factor() const { return sample_rate / guide_rate; }
};

struct GeneratorOutput {
    Tensor audio48k;       // [hop * B]
    Tensor guide8k;        // [guide_spf * B]; defined only on the training path
    Tensor harm_samples;   // pre-reverb harmonic stream at the guide rate
    Tensor noise_samples;  // pre-reverb noise stream at the guide rate
    synth::HnControls controls;
};

// Three-stage generator: frame-rate controller -> low-rate render ->
// latent refinement -> full-rate synthesis. The reverb and the 8 kHz guide
// waveform exist only on the training path.
class Generator : public nn::Module {
public:
    Generator(const GeneratorOptions& opt, Rng rng)
        : opt_(opt),
          control_(opt.control, rng),
          unet_(opt.unet, rng),
          wavenet_(opt.wavenet, rng),
          reverb_(opt.reverb_ir_length, rng) {
        SINGVOC_CHECK_VALUE(opt.sample_rate % opt.guide_rate == 0,
                            "sample rate must be a multiple of the guide rate");
        SINGVOC_CHECK_VALUE(opt.unet.upsample_factor == opt.upsample_factor(),
                            "unet upsample factor ", opt.unet.upsample_factor,
                            " must match rate ratio ", opt.upsample_factor());
        SINGVOC_CHECK_VALUE(wavenet_.upsample_factor() == opt.hop,
                            "mel upsample strides product ", wavenet_.upsample_factor(),
                            " must equal hop ", opt.hop);
        SINGVOC_CHECK_VALUE(opt.unet.latent_channels == opt.wavenet.cond_channels,
                            "latent width ", opt.unet.latent_channels,
                            " must match wavenet conditioning width ",
                            opt.wavenet.cond_channels);
        adopt("control", control_);
        adopt("unet", unet_);
        adopt("wavenet", wavenet_);
        register_param("reverb.tail", reverb_.tail());
    }

    const GeneratorOptions& options() const { return opt_; }
    const ControlNet& control_net() const { return control_; }
    const WaveNet& wavenet() const { return wavenet_; }
    synth::Reverb& reverb() { return reverb_; }

    GeneratorOutput forward(const FeatureFrames& feat, Rng& rng, bool training,
                            ControlNetTrace* trace = nullptr) const {
        const int64_t b = feat.frames();
        SINGVOC_CHECK_VALUE(b >= 2, "generator needs at least 2 frames, got ", b);
        GeneratorOutput out;
        out.controls = control_.forward(feat.mel, feat.f0, feat.loudness, opt_.guide_rate,
                                        trace);
        synth::GuideRender guide =
            synth::render_guide(out.controls, opt_.guide_rate, opt_.guide_samples_per_frame(),
                                rng, reverb_, /*apply_reverb=*/training);
        out.harm_samples = guide.harm_samples;
        out.noise_samples = guide.noise_samples;
        if (training) out.guide8k = guide.audio;

        Tensor latent = unet_.forward(guide.harm_samples, guide.noise_samples);
        if (opt_.ablate_latent) {
            latent = Tensor::zeros(latent.shape());
        }
        out.audio48k = wavenet_.forward(feat.mel, latent);
        return out;
    }

private:
    GeneratorOptions opt_;
    ControlNet control_;
    LatentUnet unet_;
    WaveNet wavenet_;
    synth::Reverb reverb_;
};

} // namespace singvoc
