#pragma once

#include <cstdint>
#include <vector>

#include "singvoc/hn_synth.hpp"
#include "singvoc/nn.hpp"

namespace singvoc {

struct ControlNetOptions {
    int64_t mel_dims = 120;
    int64_t hidden = 512;     // MLP hidden width and GRU size
    int64_t harmonics = 64;   // Kh
    int64_t noise_bins = 65;  // Nb, bins of the noise filter frame
    double f0_scale = 1200.0; // pitch input is min-max scaled by this
};

struct ControlNetTrace {
    Tensor pitch_path;  // f1(p)
    Tensor loud_path;   // f2(l)
    Tensor mel_path;    // f3(m)
    Tensor fused;       // c = f1(p) + f2(l) + f3(m)
    Tensor recurrent;   // g = GRU(c)
    Tensor hidden;      // post-MLP(g + f1(p))
};

// Frame-rate controller: fuses pitch, loudness and mel through per-stream
// MLPs, a GRU and a post MLP, then projects to harmonic and noise controls.
class ControlNet : public nn::Module {
public:
    ControlNet(const ControlNetOptions& opt, Rng& rng)
        : opt_(opt),
          mlp_pitch_(1, opt.hidden, opt.hidden, 3, rng),
          mlp_loud_(1, opt.hidden, opt.hidden, 3, rng),
          mlp_mel_(opt.mel_dims, opt.hidden, opt.hidden, 3, rng),
          gru_(opt.hidden, opt.hidden, rng),
          mlp_post_(opt.hidden, opt.hidden, opt.hidden, 3, rng),
          head_h_(opt.hidden, 1 + opt.harmonics, rng),
          head_n_(opt.hidden, opt.noise_bins, rng) {
        adopt("mlp_pitch", mlp_pitch_);
        adopt("mlp_loud", mlp_loud_);
        adopt("mlp_mel", mlp_mel_);
        adopt("gru", gru_);
        adopt("mlp_post", mlp_post_);
        adopt("head_h", head_h_);
        adopt("head_n", head_n_);
    }

    const ControlNetOptions& options() const { return opt_; }

    synth::HnControls forward(const Tensor& mel, const std::vector<double>& f0,
                              const std::vector<double>& loudness, int guide_rate,
                              ControlNetTrace* trace = nullptr) const {
        SINGVOC_CHECK_SHAPE(mel.rank() == 2 && mel.dim(1) == opt_.mel_dims,
                            "control net expects mel [B,", opt_.mel_dims, "], got ",
                            shape_str(mel.shape()));
        const int64_t b = mel.dim(0);
        SINGVOC_CHECK_SHAPE(static_cast<int64_t>(f0.size()) == b &&
                                static_cast<int64_t>(loudness.size()) == b,
                            "control net: mismatched frame counts (mel ", b, ", f0 ",
                            f0.size(), ", loudness ", loudness.size(), ")");
        std::vector<double> scaled(f0.size());
        for (size_t i = 0; i < f0.size(); ++i) scaled[i] = f0[i] / opt_.f0_scale;
        Tensor p_in = Tensor::from_vector(std::move(scaled), {b, 1});
        Tensor l_in = Tensor::from_vector(loudness, {b, 1});

        Tensor f1 = mlp_pitch_.forward(p_in);
        Tensor f2 = mlp_loud_.forward(l_in);
        Tensor f3 = mlp_mel_.forward(mel);
        Tensor fused = ops::add(ops::add(f1, f2), f3);
        Tensor g = gru_.forward(fused);
        Tensor hidden = mlp_post_.forward(ops::add(g, f1));
        Tensor head_h = head_h_.forward(hidden);
        Tensor head_n = head_n_.forward(hidden);

        if (trace) {
            trace->pitch_path = f1;
            trace->loud_path = f2;
            trace->mel_path = f3;
            trace->fused = fused;
            trace->recurrent = g;
            trace->hidden = hidden;
        }

        synth::HnControls ctrl;
        ctrl.f0 = f0;
        ctrl.harm_amp = ops::exp_sigmoid(ops::slice(head_h, 1, 0, 1));
        Tensor dist_raw = ops::exp_sigmoid(ops::slice(head_h, 1, 1, opt_.harmonics));
        ctrl.harm_dist = synth::mask_normalize_dist(dist_raw, f0, guide_rate);
        ctrl.noise_mags = ops::exp_sigmoid(head_n);
        return ctrl;
    }

private:
    ControlNetOptions opt_;
    nn::Mlp mlp_pitch_, mlp_loud_, mlp_mel_;
    nn::GruLayer gru_;
    nn::Mlp mlp_post_;
    nn::Dense head_h_, head_n_;
};

} // namespace singvoc
