#pragma once

// Reduced model configurations shared by the unit and acceptance suites.
// "micro" is small enough to finite-difference every parameter; "toy" is the
// overfit-scale setup (well under 2M generator parameters).

#include <cmath>

#include "singvoc/discriminator.hpp"
#include "singvoc/generator.hpp"
#include "test_util.hpp"

namespace testutil {

using namespace singvoc;

inline GeneratorOptions micro_generator_options() {
    GeneratorOptions g;
    g.control.mel_dims = 16;
    g.control.hidden = 8;
    g.control.harmonics = 4;
    g.control.noise_bins = 5;  // noise frame of 8 samples
    g.unet.in_channels = 2;
    g.unet.latent_channels = 4;
    g.unet.channels = {6, 8, 10};
    g.unet.upsample_factor = 6;
    g.wavenet.mel_dims = 16;
    g.wavenet.cond_channels = 4;
    g.wavenet.mel_channels = 4;
    g.wavenet.layers = 3;
    g.wavenet.kernel = 5;
    g.wavenet.dilations = {1, 3, 9};
    g.wavenet.residual_channels = 4;
    g.wavenet.skip_channels = 4;
    g.reverb_ir_length = 16;
    return g;
}

inline GeneratorOptions toy_generator_options() {
    GeneratorOptions g;
    g.control.mel_dims = 120;
    g.control.hidden = 128;
    g.control.harmonics = 64;
    g.control.noise_bins = 65;
    g.unet.latent_channels = 8;
    g.unet.channels = {16, 32, 64};
    g.wavenet.mel_dims = 120;
    g.wavenet.cond_channels = 8;
    g.wavenet.mel_channels = 16;
    g.wavenet.layers = 6;
    g.wavenet.kernel = 15;
    g.wavenet.dilations = {1, 3, 9, 27, 81, 243};
    g.wavenet.residual_channels = 16;
    g.wavenet.skip_channels = 16;
    g.reverb_ir_length = 4000;
    return g;
}

inline MpdOptions micro_mpd_options() {
    MpdOptions m;
    m.channels = {2, 2, 2, 2, 2};
    return m;
}

inline MbsdOptions micro_mbsd_options() {
    MbsdOptions m;
    m.channels = {2, 2, 2, 2, 2};
    m.kernel_time = 5;
    return m;
}

inline MpdOptions toy_mpd_options() {
    MpdOptions m;
    m.channels = {4, 8, 16, 32, 64};
    return m;
}

inline MbsdOptions toy_mbsd_options() {
    MbsdOptions m;
    m.channels = {4, 8, 16, 16, 16};
    return m;
}

// Synthetic "singing" clip: gliding pitch with vibrato, a few harmonics and a
// breathy noise floor.
inline AudioBuffer synthetic_voice(double seconds, int rate, uint64_t seed) {
    Rng rng(seed);
    AudioBuffer b;
    b.sample_rate = rate;
    const int64_t n = static_cast<int64_t>(seconds * rate);
    b.samples.assign(static_cast<size_t>(n), 0.0);
    double phase = 0.0;
    for (int64_t t = 0; t < n; ++t) {
        const double tt = static_cast<double>(t) / rate;
        const double f0 = 220.0 + 40.0 * std::sin(2.0 * M_PI * 0.7 * tt) +
                          30.0 * std::sin(2.0 * M_PI * 5.0 * tt);
        phase += 2.0 * M_PI * f0 / rate;
        double v = 0.0;
        double amp = 0.5;
        for (int h = 1; h <= 6; ++h) {
            v += amp * std::sin(static_cast<double>(h) * phase);
            amp *= 0.55;
        }
        const double env = 0.6 + 0.4 * std::sin(2.0 * M_PI * 0.31 * tt);
        b.samples[static_cast<size_t>(t)] = 0.5 * env * v + 0.01 * rng.uniform(-1, 1);
    }
    return b;
}

inline FeatureFrames random_features(int64_t frames, int64_t mel_dims, uint64_t seed) {
    Rng rng(seed);
    FeatureFrames f;
    f.mel = random_tensor({frames, mel_dims}, rng, -1.0, 1.0);
    f.f0.resize(static_cast<size_t>(frames));
    f.loudness.resize(static_cast<size_t>(frames));
    for (int64_t i = 0; i < frames; ++i) {
        f.f0[static_cast<size_t>(i)] = 150.0 + 100.0 * rng.uniform();
        f.loudness[static_cast<size_t>(i)] = 0.3 + 0.5 * rng.uniform();
    }
    return f;
}

} // namespace testutil
