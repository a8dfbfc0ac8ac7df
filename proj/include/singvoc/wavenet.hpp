#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "singvoc/nn.hpp"

namespace singvoc {

struct WaveNetOptions {
    int64_t mel_dims = 120;
    int64_t cond_channels = 32;  // latent channels concatenated after mel upsampling
    std::array<int64_t, 3> mel_up_strides{10, 6, 4};  // product = samples per frame
    int64_t mel_channels = 64;
    int64_t layers = 18;
    int64_t kernel = 15;  // odd, so same-length padding is symmetric
    std::vector<int64_t> dilations{1, 3, 9, 27, 81, 243};
    int64_t residual_channels = 64;
    int64_t skip_channels = 64;
};

// Dilated non-causal conv stack with gated units, residual and skip paths.
// Conditioning: mel upsampled to the latent length, concatenated channelwise
// with the latent sequence. Output is tanh-bounded audio at the full rate.
class WaveNet : public nn::Module {
public:
    WaveNet(const WaveNetOptions& opt, Rng& rng) : opt_(opt) {
        SINGVOC_CHECK_VALUE(opt.kernel % 2 == 1, "wavenet kernel must be odd, got ",
                            opt.kernel);
        SINGVOC_CHECK_VALUE(!opt.dilations.empty(), "wavenet needs a dilation cycle");
        int64_t cin = opt.mel_dims;
        int i = 0;
        for (int64_t stride : opt.mel_up_strides) {
            SINGVOC_CHECK_VALUE(stride % 2 == 0, "mel upsample strides must be even");
            mel_up_.emplace_back(cin, opt.mel_channels, 2 * stride, stride, stride / 2, rng);
            adopt("mel_up" + std::to_string(i++), mel_up_.back());
            cin = opt.mel_channels;
        }
        pre_ = std::make_unique<nn::Conv1dLayer>(opt.mel_channels + opt.cond_channels,
                                                 opt.residual_channels, 1, 1, 1, 0, rng);
        adopt("pre", *pre_);
        for (int64_t l = 0; l < opt.layers; ++l) {
            const int64_t d = opt.dilations[static_cast<size_t>(l) % opt.dilations.size()];
            const int64_t pad = d * (opt.kernel - 1) / 2;
            gate_.emplace_back(opt.residual_channels, 2 * opt.residual_channels, opt.kernel,
                               1, d, pad, rng);
            skip1x1_.emplace_back(opt.residual_channels, opt.skip_channels, 1, 1, 1, 0, rng);
            res1x1_.emplace_back(opt.residual_channels, opt.residual_channels, 1, 1, 1, 0,
                                 rng);
            adopt("layer" + std::to_string(l) + ".gate", gate_.back());
            adopt("layer" + std::to_string(l) + ".skip", skip1x1_.back());
            adopt("layer" + std::to_string(l) + ".res", res1x1_.back());
        }
        post1_ = std::make_unique<nn::Conv1dLayer>(opt.skip_channels, opt.skip_channels, 1,
                                                   1, 1, 0, rng);
        post2_ = std::make_unique<nn::Conv1dLayer>(opt.skip_channels, 1, 1, 1, 1, 0, rng);
        adopt("post1", *post1_);
        adopt("post2", *post2_);
    }

    const WaveNetOptions& options() const { return opt_; }

    int64_t upsample_factor() const {
        int64_t f = 1;
        for (int64_t s : opt_.mel_up_strides) f *= s;
        return f;
    }

    // span of input samples influencing one output sample
    int64_t receptive_field() const {
        int64_t sum_d = 0;
        for (int64_t l = 0; l < opt_.layers; ++l) {
            sum_d += opt_.dilations[static_cast<size_t>(l) % opt_.dilations.size()];
        }
        return 1 + (opt_.kernel - 1) * sum_d;
    }

    // mel [B, mel_dims], latent [cond_channels, T'] with T' = B * factor
    Tensor forward(const Tensor& mel, const Tensor& latent) const {
        SINGVOC_CHECK_SHAPE(mel.rank() == 2 && mel.dim(1) == opt_.mel_dims,
                            "wavenet expects mel [B,", opt_.mel_dims, "], got ",
                            shape_str(mel.shape()));
        const int64_t b = mel.dim(0);
        const int64_t t_full = b * upsample_factor();
        SINGVOC_CHECK_SHAPE(latent.rank() == 2 && latent.dim(0) == opt_.cond_channels &&
                                latent.dim(1) == t_full,
                            "wavenet latent must be [", opt_.cond_channels, ",", t_full,
                            "] for B=", b, ", got ", shape_str(latent.shape()));
        Tensor m = ops::transpose2(mel);  // [mel_dims, B]
        for (const auto& up : mel_up_) m = ops::leaky_relu(up.forward(m));
        SINGVOC_CHECK_INTERNAL(m.dim(1) == t_full, "mel upsampling length bookkeeping: ",
                               m.dim(1), " vs ", t_full);
        Tensor x = pre_->forward(ops::concat0({m, latent}));
        Tensor skip;
        const int64_t r = opt_.residual_channels;
        for (size_t l = 0; l < gate_.size(); ++l) {
            Tensor h = gate_[l].forward(x);
            Tensor z = ops::mul(ops::tanh(ops::slice(h, 0, 0, r)),
                                ops::sigmoid(ops::slice(h, 0, r, r)));
            Tensor s = skip1x1_[l].forward(z);
            skip = skip.defined() ? ops::add(skip, s) : s;
            x = ops::add(x, res1x1_[l].forward(z));
        }
        Tensor out = post2_->forward(ops::leaky_relu(post1_->forward(ops::leaky_relu(skip))));
        return ops::reshape(ops::tanh(out), {t_full});
    }

private:
    WaveNetOptions opt_;
    std::vector<nn::ConvT1dLayer> mel_up_;
    std::unique_ptr<nn::Conv1dLayer> pre_;
    std::vector<nn::Conv1dLayer> gate_, skip1x1_, res1x1_;
    std::unique_ptr<nn::Conv1dLayer> post1_, post2_;
};

} // namespace singvoc
