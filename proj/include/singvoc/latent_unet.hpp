#pragma once

#include <array>
#include <cstdint>

#include "singvoc/nn.hpp"

namespace singvoc {

struct LatentUnetOptions {
    int64_t in_channels = 2;       // stacked harmonic + noise streams
    int64_t latent_channels = 32;  // width of the upsampled sequence and the output
    std::array<int64_t, 3> channels{64, 128, 256};  // encoder ladder
    int64_t upsample_factor = 6;   // low rate -> full rate
    // encoder strides fixed at (8,2,2); decoder mirrors with (2,2,8)
};

// Upsamples the stacked low-rate streams to the full rate with a transposed
// conv, then refines them with a 3-level UNet (stride product 32, skip
// connections by channel concatenation). Output length equals input length.
class LatentUnet : public nn::Module {
public:
    LatentUnet(const LatentUnetOptions& opt, Rng& rng)
        : opt_(opt),
          up_(opt.in_channels, opt.latent_channels, 2 * opt.upsample_factor,
              opt.upsample_factor, opt.upsample_factor / 2, rng),
          enc1_(opt.latent_channels, opt.channels[0], 16, 8, 1, 4, rng),
          enc2_(opt.channels[0], opt.channels[1], 4, 2, 1, 1, rng),
          enc3_(opt.channels[1], opt.channels[2], 4, 2, 1, 1, rng),
          mid_(opt.channels[2], opt.channels[2], 3, 1, 1, 1, rng),
          dec3_up_(opt.channels[2], opt.channels[1], 4, 2, 1, rng),
          dec3_(2 * opt.channels[1], opt.channels[1], 3, 1, 1, 1, rng),
          dec2_up_(opt.channels[1], opt.channels[0], 4, 2, 1, rng),
          dec2_(2 * opt.channels[0], opt.channels[0], 3, 1, 1, 1, rng),
          dec1_up_(opt.channels[0], opt.latent_channels, 16, 8, 4, rng),
          dec1_(2 * opt.latent_channels, opt.latent_channels, 3, 1, 1, 1, rng) {
        SINGVOC_CHECK_VALUE(opt.upsample_factor >= 2 && opt.upsample_factor % 2 == 0,
                            "unet upsample factor must be even, got ", opt.upsample_factor);
        adopt("up", up_);
        adopt("enc1", enc1_);
        adopt("enc2", enc2_);
        adopt("enc3", enc3_);
        adopt("mid", mid_);
        adopt("dec3_up", dec3_up_);
        adopt("dec3", dec3_);
        adopt("dec2_up", dec2_up_);
        adopt("dec2", dec2_);
        adopt("dec1_up", dec1_up_);
        adopt("dec1", dec1_);
    }

    const LatentUnetOptions& options() const { return opt_; }

    // h_samples, n_samples: [T] at the low rate -> latent [C, T*factor]
    Tensor forward(const Tensor& h_samples, const Tensor& n_samples) const {
        SINGVOC_CHECK_SHAPE(h_samples.rank() == 1 && n_samples.rank() == 1 &&
                                h_samples.dim(0) == n_samples.dim(0),
                            "latent unet expects two equal-length streams, got ",
                            shape_str(h_samples.shape()), " and ",
                            shape_str(n_samples.shape()));
        const int64_t t_in = h_samples.dim(0);
        Tensor stacked = ops::concat0({ops::reshape(h_samples, {1, t_in}),
                                       ops::reshape(n_samples, {1, t_in})});
        Tensor u0 = up_.forward(stacked);  // [latent, T*factor]
        const int64_t t_full = t_in * opt_.upsample_factor;
        SINGVOC_CHECK_INTERNAL(u0.dim(1) == t_full,
                               "latent unet upsample length bookkeeping: got ", u0.dim(1),
                               ", want ", t_full);
        return refine(u0);
    }

    // UNet body; pads to a multiple of the stride product and crops back.
    Tensor refine(const Tensor& u0) const {
        const int64_t t_full = u0.dim(1);
        const int64_t unit = 32;  // 8*2*2
        const int64_t padded_len = (t_full + unit - 1) / unit * unit;
        Tensor x0 = padded_len == t_full ? u0 : ops::pad_const(u0, 0, padded_len - t_full);

        Tensor e1 = ops::leaky_relu(enc1_.forward(x0));
        Tensor e2 = ops::leaky_relu(enc2_.forward(e1));
        Tensor e3 = ops::leaky_relu(enc3_.forward(e2));
        Tensor m = ops::leaky_relu(mid_.forward(e3));
        Tensor d3 = ops::leaky_relu(dec3_up_.forward(m));
        d3 = ops::leaky_relu(dec3_.forward(ops::concat0({d3, e2})));
        Tensor d2 = ops::leaky_relu(dec2_up_.forward(d3));
        d2 = ops::leaky_relu(dec2_.forward(ops::concat0({d2, e1})));
        Tensor d1 = ops::leaky_relu(dec1_up_.forward(d2));
        Tensor out = dec1_.forward(ops::concat0({d1, x0}));
        SINGVOC_CHECK_INTERNAL(out.dim(1) == padded_len,
                               "latent unet stride bookkeeping: output length ", out.dim(1),
                               ", want ", padded_len);
        return padded_len == t_full ? out : ops::slice(out, 1, 0, t_full);
    }

private:
    LatentUnetOptions opt_;
    nn::ConvT1dLayer up_;
    nn::Conv1dLayer enc1_, enc2_, enc3_, mid_;
    nn::ConvT1dLayer dec3_up_;
    nn::Conv1dLayer dec3_;
    nn::ConvT1dLayer dec2_up_;
    nn::Conv1dLayer dec2_;
    nn::ConvT1dLayer dec1_up_;
    nn::Conv1dLayer dec1_;
};

} // namespace singvoc
