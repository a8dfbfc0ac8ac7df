#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "singvoc/checkpoint.hpp"
#include "singvoc/trainer.hpp"
#include "test_configs.hpp"
#include "test_util.hpp"

using namespace singvoc;
using Catch::Approx;

namespace {

// micro-sized analysis matching micro_generator_options (mel_dims = 16)
TrainClip micro_clip(double seconds, uint64_t seed) {
    AudioBuffer clip = testutil::synthetic_voice(seconds, 48000, seed);
    AnalysisSettings settings;
    settings.mel_dims = 16;
    TrainClip c = prepare_clip(clip, settings, 8000, nullptr);
    // keep conditioning in a sane range without corpus stats
    MelStats stats = compute_mel_stats({c.features.mel});
    c.features.mel = normalize_mel(c.features.mel, stats);
    return c;
}

std::vector<std::vector<double>> snapshot(const std::vector<nn::NamedParam>& params) {
    std::vector<std::vector<double>> out;
    for (const auto& p : params) out.push_back(p.tensor.vec());
    return out;
}

TrainSettings micro_train_settings() {
    TrainSettings s;
    s.lr.warmup_steps = 20;
    s.lr.peak = 3e-4;
    s.crop_frames = 30;
    return s;
}

} // namespace

TEST_CASE("prepare_clip aligns targets with the frame grid", "[trainer]") {
    TrainClip c = micro_clip(0.5, 3);
    const int64_t b = c.features.frames();
    REQUIRE(c.audio48.dim(0) == 240 * b);
    REQUIRE(c.audio8.dim(0) == 40 * b);

    TrainClip crop = crop_clip(c, 10, 20);
    REQUIRE(crop.features.frames() == 20);
    REQUIRE(crop.audio48.dim(0) == 4800);
    REQUIRE(crop.audio8.dim(0) == 800);
    CHECK_THROWS_AS(crop_clip(c, b - 5, 20), ValueError);
}

TEST_CASE("one train step completes with finite metrics", "[trainer]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(1));
    DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                          Rng(2));
    Trainer trainer(gen, disc, micro_train_settings(), Rng(3));
    std::vector<TrainClip> corpus{micro_clip(0.4, 5)};
    StepMetrics m = trainer.train_step(corpus);
    CHECK(m.step == 1);
    CHECK(m.finite());
    CHECK(m.loss_g_total > 0.0);
    CHECK(m.loss_d > 0.0);
    CHECK(m.lr == Approx(3e-4 / 20.0));
}

TEST_CASE("discriminator phase leaves generator parameters bit-unchanged", "[trainer]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(7));
    DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                          Rng(8));
    TrainClip clip = micro_clip(0.3, 9);
    const auto before = snapshot(gen.params());

    // the discriminator step as the trainer runs it: fakes detached
    Rng rng(10);
    Tensor fake48;
    {
        NoGradGuard ng;
        fake48 = gen.forward(clip.features, rng, true).audio48k;
    }
    disc.zero_grad();
    {
        GradTape tape;
        auto real_out = disc.forward(clip.audio48);
        auto fake_out = disc.forward(fake48);
        tape.backward(adversarial_discriminator_loss(real_out, fake_out));
    }
    clip_global_norm(disc.params(), 10.0);
    AdamW opt;
    opt.step(disc.params(), 1e-4);

    const auto after = snapshot(gen.params());
    for (size_t i = 0; i < before.size(); ++i) {
        REQUIRE(before[i] == after[i]);
    }
    // and no gradient reached the generator
    for (auto& p : gen.params()) {
        if (!p.tensor.has_grad()) continue;
        for (double g : p.tensor.grad_vec()) REQUIRE(g == 0.0);
    }
}

TEST_CASE("every generator parameter receives gradient from the composite loss",
          "[trainer][property]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(11));
    DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                          Rng(12));
    TrainClip clip = micro_clip(0.3, 13);
    // voiced frames throughout so the harmonic path is live
    for (auto& f : clip.features.f0) {
        if (f <= 0.0) f = 200.0;
    }
    SpectralLoss sp;
    MelLoss mel48 = MelLoss::for_rate(48000);
    MelLoss mel8 = MelLoss::for_rate(8000);
    Rng rng(14);
    gen.zero_grad();
    {
        GradTape tape;
        auto out = gen.forward(clip.features, rng, true);
        DiscriminatorOutput real_out;
        {
            NoGradGuard ng;
            real_out = disc.forward(clip.audio48);
        }
        auto fake_out = disc.forward(out.audio48k);
        GeneratorLossTerms terms;
        terms.sp = sp(out.audio48k, clip.audio48);
        terms.fm = feature_match_loss(real_out, fake_out);
        terms.mel8k = mel8(out.guide8k, clip.audio8);
        terms.mel48k = mel48(out.audio48k, clip.audio48);
        terms.adv = adversarial_generator_loss(fake_out);
        tape.backward(generator_total(terms, LossWeights{}));
    }
    for (auto& p : gen.params()) {
        INFO("parameter " << p.name);
        REQUIRE(p.tensor.has_grad());
        double norm = 0.0;
        for (double g : p.tensor.grad_vec()) norm += g * g;
        REQUIRE(norm > 0.0);
    }
}

TEST_CASE("guide mel loss gradient reaches the mel MLP and matches finite differences",
          "[trainer][gradcheck]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(15));
    TrainClip clip = micro_clip(0.25, 16);
    MelLoss mel8 = MelLoss::for_rate(8000);
    Rng base(17);
    auto fwd = [&] {
        Rng rng = base;
        auto out = gen.forward(clip.features, rng, true);
        return mel8(out.guide8k, clip.audio8);
    };
    // spot-check a slice of the mel-MLP input weights
    std::vector<Tensor> mel_weights;
    for (auto& p : gen.params()) {
        if (p.name == "control.mlp_mel.l0.weight") mel_weights.push_back(p.tensor);
    }
    REQUIRE(mel_weights.size() == 1);
    auto report = testutil::grad_check(mel_weights, fwd, 1e-5, /*max_per_tensor=*/12);
    CHECK(report.checked >= 12);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("fixed seed reproduces twenty steps of metrics bit-identically",
          "[trainer][slow]") {
    auto run = [&](uint64_t seed) {
        auto gopt = testutil::micro_generator_options();
        Generator gen(gopt, Rng(seed));
        DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                              Rng(seed + 1));
        Trainer trainer(gen, disc, micro_train_settings(), Rng(seed + 2));
        std::vector<TrainClip> corpus{micro_clip(0.4, 21), micro_clip(0.3, 22)};
        std::vector<StepMetrics> metrics;
        for (int i = 0; i < 20; ++i) metrics.push_back(trainer.train_step(corpus));
        return metrics;
    };
    auto a = run(900);
    auto b = run(900);
    for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].loss_g_total == b[i].loss_g_total);
        REQUIRE(a[i].loss_d == b[i].loss_d);
        REQUIRE(a[i].loss_sp == b[i].loss_sp);
        REQUIRE(a[i].loss_fm == b[i].loss_fm);
        REQUIRE(a[i].loss_mel8k == b[i].loss_mel8k);
        REQUIRE(a[i].loss_mel48k == b[i].loss_mel48k);
        REQUIRE(a[i].grad_norm_g == b[i].grad_norm_g);
        REQUIRE(a[i].grad_norm_d == b[i].grad_norm_d);
    }
    auto c = run(901);
    CHECK(a[5].loss_g_total != c[5].loss_g_total);
}

TEST_CASE("checkpoint resume continues bit-identically", "[trainer][slow]") {
    auto gopt = testutil::micro_generator_options();
    auto make_corpus = [] {
        return std::vector<TrainClip>{micro_clip(0.4, 31), micro_clip(0.35, 32)};
    };

    // uninterrupted reference: 5 + 3 steps
    Generator gen_a(gopt, Rng(50));
    DiscriminatorSet disc_a(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                            Rng(51));
    Trainer tr_a(gen_a, disc_a, micro_train_settings(), Rng(52));
    auto corpus = make_corpus();
    for (int i = 0; i < 5; ++i) tr_a.train_step(corpus);

    const auto ckpt_path = std::filesystem::temp_directory_path() / "singvoc_test_resume.ckpt";
    CheckpointMeta meta;
    meta.config_text = "unit-test";
    meta.step = tr_a.step();
    meta.rng_seed = tr_a.rng().seed();
    meta.rng_counter = tr_a.rng().counter();
    save_checkpoint(ckpt_path, meta, gen_a.params(), disc_a.params(), tr_a.opt_g(),
                    tr_a.opt_d());

    std::vector<StepMetrics> cont;
    for (int i = 0; i < 3; ++i) cont.push_back(tr_a.train_step(corpus));

    // restart from the checkpoint in fresh objects
    Generator gen_b(gopt, Rng(999));  // different init, will be overwritten
    DiscriminatorSet disc_b(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                            Rng(998));
    Trainer tr_b(gen_b, disc_b, micro_train_settings(), Rng(0));
    CheckpointMeta loaded = load_checkpoint(ckpt_path, gen_b.params(), disc_b.params(),
                                            tr_b.opt_g(), tr_b.opt_d());
    REQUIRE(loaded.step == 5);
    tr_b.restore_step(loaded.step);
    tr_b.rng().restore(loaded.rng_seed, loaded.rng_counter);

    for (int i = 0; i < 3; ++i) {
        StepMetrics m = tr_b.train_step(corpus);
        REQUIRE(m.step == cont[static_cast<size_t>(i)].step);
        REQUIRE(m.loss_g_total == cont[static_cast<size_t>(i)].loss_g_total);
        REQUIRE(m.loss_d == cont[static_cast<size_t>(i)].loss_d);
        REQUIRE(m.grad_norm_g == cont[static_cast<size_t>(i)].grad_norm_g);
    }
    std::filesystem::remove(ckpt_path);
}

TEST_CASE("short micro training run reduces the reconstruction losses", "[trainer][slow]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(61));
    DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                          Rng(62));
    TrainSettings settings = micro_train_settings();
    settings.lr.warmup_steps = 10;
    settings.lr.peak = 1e-3;
    Trainer trainer(gen, disc, settings, Rng(63));
    std::vector<TrainClip> corpus{micro_clip(0.3, 64)};
    double first = 0.0, last = 0.0;
    const int steps = 40;
    for (int i = 0; i < steps; ++i) {
        StepMetrics m = trainer.train_step(corpus);
        const double nonadv = 10.0 * m.loss_sp + m.loss_fm + m.loss_mel8k + m.loss_mel48k;
        if (i < 5) first += nonadv / 5.0;
        if (i >= steps - 5) last += nonadv / 5.0;
    }
    CHECK(last < first);
}
