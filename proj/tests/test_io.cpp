#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "singvoc/checkpoint.hpp"
#include "singvoc/config.hpp"
#include "singvoc/feature_file.hpp"
#include "singvoc/wav.hpp"
#include "test_configs.hpp"
#include "test_util.hpp"

using namespace singvoc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path tmp_path(const std::string& name) {
    return fs::temp_directory_path() / ("singvoc_io_" + name);
}

} // namespace

TEST_CASE("float32 wav round-trips bit-exactly", "[wav]") {
    AudioBuffer a;
    a.sample_rate = 48000;
    Rng rng(1);
    a.samples.resize(4801);
    for (auto& v : a.samples) v = rng.uniform(-1.0, 1.0);
    // quantize to f32 representable values first
    for (auto& v : a.samples) v = static_cast<double>(static_cast<float>(v));
    const auto p = tmp_path("roundtrip.wav");
    wav::write(p, a, wav::Encoding::Float32);
    AudioBuffer b = wav::read(p);
    REQUIRE(b.sample_rate == 48000);
    REQUIRE(b.samples.size() == a.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) REQUIRE(b.samples[i] == a.samples[i]);
    fs::remove(p);
}

TEST_CASE("pcm16 wav encodes within quantization error", "[wav]") {
    AudioBuffer a;
    a.sample_rate = 8000;
    for (int i = 0; i < 800; ++i) {
        a.samples.push_back(0.9 * std::sin(2.0 * M_PI * 440.0 * i / 8000.0));
    }
    const auto p = tmp_path("pcm16.wav");
    wav::write(p, a, wav::Encoding::Pcm16);
    AudioBuffer b = wav::read(p);
    REQUIRE(b.samples.size() == a.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        REQUIRE(b.samples[i] == Approx(a.samples[i]).margin(1.0 / 32000.0));
    }
    fs::remove(p);
}

TEST_CASE("multichannel wav takes the first channel, 24-bit decodes", "[wav]") {
    // hand-build a stereo PCM24 file: L = ramp, R = zeros
    binio::Writer w;
    const uint32_t frames = 100;
    const uint32_t data_size = frames * 2 * 3;
    w.raw("RIFF", 4);
    w.u32(36 + data_size);
    w.raw("WAVE", 4);
    w.raw("fmt ", 4);
    w.u32(16);
    w.u8(1);
    w.u8(0);  // pcm
    w.u8(2);
    w.u8(0);  // stereo
    w.u32(8000);
    w.u32(8000 * 6);
    w.u8(6);
    w.u8(0);
    w.u8(24);
    w.u8(0);
    w.raw("data", 4);
    w.u32(data_size);
    for (uint32_t i = 0; i < frames; ++i) {
        const int32_t v = static_cast<int32_t>(i) * 1000;
        w.u8(static_cast<uint8_t>(v & 0xff));
        w.u8(static_cast<uint8_t>((v >> 8) & 0xff));
        w.u8(static_cast<uint8_t>((v >> 16) & 0xff));
        w.u8(0);
        w.u8(0);
        w.u8(0);
    }
    const auto p = tmp_path("stereo24.wav");
    w.write_file(p);
    AudioBuffer b = wav::read(p);
    REQUIRE(b.samples.size() == frames);
    for (uint32_t i = 0; i < frames; ++i) {
        REQUIRE(b.samples[i] == Approx(static_cast<double>(i) * 1000.0 / 8388608.0)
                                    .margin(1e-12));
    }
    fs::remove(p);
}

TEST_CASE("corrupt wav files are rejected", "[wav]") {
    const auto p = tmp_path("bad.wav");
    std::ofstream(p) << "not a wav file at all";
    CHECK_THROWS_AS(wav::read(p), IoError);
    fs::remove(p);
}

TEST_CASE("feature file round-trip is lossless", "[features]") {
    Rng rng(2);
    FeatureFile f;
    f.sample_rate = 48000;
    f.hop = 240;
    f.frames = 40;
    f.arrays.emplace_back("mel", testutil::random_tensor({40, 120}, rng));
    f.arrays.emplace_back("f0", testutil::random_tensor({40}, rng, 0, 800));
    f.arrays.emplace_back("loudness", testutil::random_tensor({40}, rng, 0, 1));
    f.has_stats = true;
    f.mel_mean.assign(120, 0.25);
    f.mel_std.assign(120, 2.0);
    const auto p = tmp_path("features.fst");
    write_feature_file(p, f);
    FeatureFile g = read_feature_file(p);
    REQUIRE(g.frames == 40);
    REQUIRE(g.sample_rate == 48000);
    REQUIRE(g.arrays.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        REQUIRE(g.arrays[i].first == f.arrays[i].first);
        REQUIRE(g.arrays[i].second.vec() == f.arrays[i].second.vec());  // bit-exact
    }
    REQUIRE(g.mel_mean == f.mel_mean);
    REQUIRE(g.mel_std == f.mel_std);

    FeatureFrames frames = g.to_frames();
    REQUIRE(frames.frames() == 40);
    REQUIRE(frames.f0.size() == 40);

    // deterministic bytes: writing again produces an identical file
    const auto p2 = tmp_path("features2.fst");
    write_feature_file(p2, f);
    std::ifstream a(p, std::ios::binary), b(p2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    REQUIRE(sa == sb);
    fs::remove(p);
    fs::remove(p2);
}

TEST_CASE("feature file corruption is detected", "[features]") {
    Rng rng(3);
    FeatureFile f;
    f.frames = 8;
    f.arrays.emplace_back("mel", testutil::random_tensor({8, 4}, rng));
    const auto p = tmp_path("corrupt.fst");
    write_feature_file(p, f);
    // flip one byte in the middle
    std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(40);
    char c;
    io.seekg(40);
    io.get(c);
    io.seekp(40);
    io.put(static_cast<char>(c ^ 0x5a));
    io.close();
    CHECK_THROWS_AS(read_feature_file(p), IoError);
    fs::remove(p);

    FeatureFile bad;
    bad.frames = 9;
    bad.arrays.emplace_back("mel", testutil::random_tensor({8, 4}, rng));
    CHECK_THROWS_AS(write_feature_file(tmp_path("never.fst"), bad), ValueError);
}

TEST_CASE("mel normalization statistics", "[features]") {
    Rng rng(4);
    std::vector<Tensor> corpus;
    for (int i = 0; i < 4; ++i) {
        corpus.push_back(testutil::random_tensor({50, 16}, rng, -3.0 + i, 2.0 + i));
    }
    MelStats stats = compute_mel_stats(corpus);
    std::vector<Tensor> normalized;
    for (const auto& m : corpus) normalized.push_back(normalize_mel(m, stats));
    MelStats post = compute_mel_stats(normalized);
    for (int64_t d = 0; d < 16; ++d) {
        REQUIRE(std::fabs(post.mean[static_cast<size_t>(d)]) < 1e-6);
        REQUIRE(std::fabs(post.stdev[static_cast<size_t>(d)] - 1.0) < 1e-6);
    }
}

TEST_CASE("run config defaults carry the published constants", "[config]") {
    RunConfig cfg;
    CHECK(cfg.lambda_sp == 10.0);
    CHECK(cfg.lambda_fm == 1.0);
    CHECK(cfg.lambda_mel == 1.0);
    CHECK(cfg.lambda_adv == 120.0);
    CHECK(cfg.beta1 == 0.8);
    CHECK(cfg.beta2 == 0.99);
    CHECK(cfg.weight_decay == 0.01);
    CHECK(cfg.warmup_steps == 5000);
    CHECK(cfg.peak_lr == 0.0002);
    CHECK(cfg.lr_decay == 0.999);
    CHECK(cfg.fft_size == 1024);
    CHECK(cfg.win_length == 960);   // 20 ms at 48 kHz
    CHECK(cfg.hop == 240);          // 5 ms
    CHECK(cfg.mel_bins == 120);
    CHECK(cfg.wavenet_layers == 18);
    CHECK(cfg.hidden == 512);
    CHECK(cfg.mpd_periods == std::vector<int64_t>{2, 3, 5, 7, 11});
    REQUIRE(cfg.mbsd_stft_sets.size() == 4);
    CHECK(cfg.mbsd_stft_sets[0] == std::array<int64_t, 3>{512, 128, 512});
    CHECK(cfg.mbsd_stft_sets[1] == std::array<int64_t, 3>{1024, 256, 1024});
    CHECK(cfg.mbsd_stft_sets[2] == std::array<int64_t, 3>{1024, 512, 1024});
    CHECK(cfg.mbsd_stft_sets[3] == std::array<int64_t, 3>{2048, 512, 2048});
    // encoder strides (8,2,2) are structural; decoder mirrors (2,2,8)
    auto gopt = cfg.generator_options();
    CHECK(gopt.unet.upsample_factor == 6);
    CHECK(gopt.wavenet.mel_up_strides == std::array<int64_t, 3>{10, 6, 4});
}

TEST_CASE("run config text round-trip and error handling", "[config]") {
    RunConfig cfg;
    cfg.hidden = 64;
    cfg.wavenet_dilations = {1, 2, 4};
    cfg.lambda_adv = 3.5;
    cfg.ablate_latent = true;
    RunConfig back = RunConfig::from_text(cfg.to_text());
    CHECK(back.to_text() == cfg.to_text());
    CHECK(back.hidden == 64);
    CHECK(back.wavenet_dilations == std::vector<int64_t>{1, 2, 4});
    CHECK(back.ablate_latent);

    CHECK_THROWS_AS(RunConfig::from_text("no_such_key = 3\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("hidden = abc\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_text("hidden 64\n"), ConfigError);
    // comments and blank lines are fine
    RunConfig ok = RunConfig::from_text("# comment\n\nhidden = 32 # tail comment\n");
    CHECK(ok.hidden == 32);
}

TEST_CASE("checkpoint round-trip restores parameters and optimizer state", "[checkpoint]") {
    auto gopt = testutil::micro_generator_options();
    Generator gen(gopt, Rng(5));
    DiscriminatorSet disc(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                          Rng(6));
    AdamW opt_g, opt_d;
    // run one optimizer step so moments are nonzero
    for (auto& p : gen.params()) {
        for (auto& g : p.tensor.grad()) g = 0.01;
    }
    opt_g.step(gen.params(), 1e-4);

    CheckpointMeta meta;
    meta.config_text = "cfg-snapshot";
    meta.step = 17;
    meta.rng_seed = 42;
    meta.rng_counter = 99;
    const auto p = tmp_path("ckpt.svck");
    save_checkpoint(p, meta, gen.params(), disc.params(), opt_g, opt_d);

    Generator gen2(gopt, Rng(7));
    DiscriminatorSet disc2(testutil::micro_mpd_options(), testutil::micro_mbsd_options(),
                           Rng(8));
    AdamW og2, od2;
    CheckpointMeta loaded = load_checkpoint(p, gen2.params(), disc2.params(), og2, od2);
    CHECK(loaded.config_text == "cfg-snapshot");
    CHECK(loaded.step == 17);
    CHECK(loaded.rng_seed == 42);
    CHECK(loaded.rng_counter == 99);
    for (size_t i = 0; i < gen.params().size(); ++i) {
        REQUIRE(gen2.params()[i].tensor.vec() == gen.params()[i].tensor.vec());
    }
    REQUIRE(og2.step_count() == 1);
    REQUIRE(og2.slots().size() == gen.params().size());
    for (size_t i = 0; i < og2.slots().size(); ++i) {
        REQUIRE(og2.slots()[i].m == opt_g.slots()[i].m);
        REQUIRE(og2.slots()[i].v == opt_g.slots()[i].v);
    }
    CHECK(peek_checkpoint(p).step == 17);

    // loading into a model of a different size is refused
    auto small = gopt;
    small.control.hidden = 4;
    Generator gen3(small, Rng(9));
    AdamW og3, od3;
    CHECK_THROWS_AS(load_checkpoint(p, gen3.params(), disc2.params(), og3, od3), IoError);
    fs::remove(p);
}
