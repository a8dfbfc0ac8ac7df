#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "singvoc/fft.hpp"
#include "singvoc/loudness.hpp"
#include "singvoc/mel.hpp"
#include "singvoc/resample.hpp"
#include "singvoc/stft.hpp"
#include "singvoc/yin.hpp"
#include "test_util.hpp"

using namespace singvoc;
using Catch::Approx;

namespace {

AudioBuffer sine(double freq, double amp, int rate, double seconds, double phase = 0.0) {
    AudioBuffer b;
    b.sample_rate = rate;
    const int64_t n = static_cast<int64_t>(seconds * rate);
    b.samples.resize(static_cast<size_t>(n));
    for (int64_t t = 0; t < n; ++t) {
        b.samples[static_cast<size_t>(t)] =
            amp * std::sin(2.0 * M_PI * freq * static_cast<double>(t) / rate + phase);
    }
    return b;
}

AudioBuffer white_noise(double amp, int rate, double seconds, uint64_t seed) {
    Rng rng(seed);
    AudioBuffer b;
    b.sample_rate = rate;
    const int64_t n = static_cast<int64_t>(seconds * rate);
    b.samples.resize(static_cast<size_t>(n));
    for (auto& v : b.samples) v = rng.uniform(-amp, amp);
    return b;
}

} // namespace

TEST_CASE("fft roundtrip and known values", "[fft]") {
    // DFT of delta is all ones
    std::vector<cplx> a(8, cplx(0, 0));
    a[0] = cplx(1, 0);
    fft_inplace(a.data(), 8);
    for (auto& v : a) {
        CHECK(v.real() == Approx(1.0).margin(1e-12));
        CHECK(v.imag() == Approx(0.0).margin(1e-12));
    }
    // inverse undoes forward
    Rng rng(4);
    std::vector<cplx> b(64);
    for (auto& v : b) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto c = b;
    fft_inplace(c.data(), 64);
    fft_inplace(c.data(), 64, true);
    for (size_t i = 0; i < b.size(); ++i) {
        CHECK(std::abs(c[i] - b[i]) < 1e-12);
    }
    // rfft/irfft roundtrip
    std::vector<double> x(128);
    for (auto& v : x) v = rng.uniform(-1, 1);
    std::vector<cplx> spec(65);
    rfft(x.data(), 128, spec.data());
    std::vector<double> y(128);
    irfft(spec.data(), 128, y.data());
    for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == Approx(x[i]).margin(1e-12));

    CHECK_THROWS_AS(fft_inplace(a.data(), 6), ValueError);
}

TEST_CASE("stft frame count and bin position", "[stft]") {
    dsp::StftConfig cfg{1024, 240, 960};
    // 1 s at 48 kHz, hop 240 -> 200 frames
    AudioBuffer s = sine(440.0, 0.7, 48000, 1.0);
    dsp::Spectrogram spec = dsp::stft_magnitude(s, cfg);
    CHECK(spec.num_frames() == 200);
    CHECK(spec.bins() == 513);

    // argmax bin of a 440 Hz sine: round(440*1024/48000) = 9
    const int64_t b = 100;
    int64_t argmax = 0;
    double best = -1.0;
    for (int64_t k = 0; k < spec.bins(); ++k) {
        const double v = spec.frames.data()[b * spec.bins() + k];
        if (v > best) {
            best = v;
            argmax = k;
        }
    }
    CHECK(argmax == 9);

    // all magnitudes non-negative
    for (int64_t i = 0; i < spec.frames.numel(); ++i) {
        REQUIRE(spec.frames.data()[i] >= 0.0);
    }

    // shorter than one window -> error
    AudioBuffer tiny = sine(440.0, 0.5, 48000, 0.01);  // 480 samples < 960
    CHECK_THROWS_AS(dsp::stft_magnitude(tiny, cfg), ValueError);
}

TEST_CASE("stft frame count sweep", "[stft][property]") {
    for (int64_t len : {960, 999, 1000, 1200, 4800, 48000}) {
        for (int64_t hop : {40, 240, 512}) {
            dsp::StftConfig cfg{1024, hop, 960};
            if (hop > cfg.win_length) continue;
            AudioBuffer s = white_noise(0.5, 48000, 1.0, 9);
            s.samples.resize(static_cast<size_t>(len));
            dsp::Spectrogram spec = dsp::stft_magnitude(s, cfg);
            CHECK(spec.num_frames() == (len + hop - 1) / hop);
        }
    }
}

TEST_CASE("stft Parseval energy identity on white noise", "[stft]") {
    dsp::StftConfig cfg{1024, 240, 960};
    AudioBuffer x = white_noise(0.8, 48000, 0.25, 31);
    dsp::Spectrogram spec = dsp::stft_magnitude(x, cfg);
    // replicate the framing: reflect pad by win/2, hann window
    const auto w = dsp::hann_window(cfg.win_length);
    const int64_t pad = cfg.win_length / 2;
    const int64_t n = x.size();
    auto sample_at = [&](int64_t i) {
        // reflect indexing matching ops::pad_reflect
        int64_t j = i - pad;
        const int64_t period = 2 * (n - 1);
        j = ((j % period) + period) % period;
        if (j >= n) j = period - j;
        return x.samples[static_cast<size_t>(j)];
    };
    for (int64_t b = 0; b < spec.num_frames(); b += 17) {
        double time_energy = 0.0;
        for (int64_t i = 0; i < cfg.win_length; ++i) {
            const double v = sample_at(b * cfg.hop + i) * w[static_cast<size_t>(i)];
            time_energy += v * v;
        }
        double freq_energy = 0.0;
        for (int64_t k = 0; k < spec.bins(); ++k) {
            const double m = spec.frames.data()[b * spec.bins() + k];
            const double sided = (k == 0 || k == cfg.fft_size / 2) ? 1.0 : 2.0;
            freq_energy += sided * m * m;
        }
        freq_energy /= static_cast<double>(cfg.fft_size);
        REQUIRE(std::fabs(freq_energy - time_energy) / time_energy < 1e-6);
    }
}

TEST_CASE("stft magnitude is differentiable", "[stft][gradcheck]") {
    dsp::StftConfig cfg{64, 16, 32};
    Rng rng(12);
    Tensor x = testutil::random_tensor({100}, rng, -1, 1, true);
    Rng prj(55);
    auto fwd = [&] {
        Rng r = prj;
        return testutil::project(dsp::stft_magnitude(x, cfg), r);
    };
    CHECK(testutil::grad_check({x}, fwd).max_rel_err < 1e-5);
}

TEST_CASE("band split partitions bins", "[dsp]") {
    auto bs257 = dsp::make_band_split(257);
    CHECK(bs257.size == std::array<int64_t, 3>{86, 86, 85});
    auto bs513 = dsp::make_band_split(513);
    CHECK(bs513.size == std::array<int64_t, 3>{171, 171, 171});

    Rng rng(2);
    Tensor frames = testutil::random_tensor({7, 257}, rng);
    auto parts = dsp::band_split(frames);
    Tensor recon = ops::concat0({ops::transpose2(parts[0]), ops::transpose2(parts[1]),
                                 ops::transpose2(parts[2])});
    Tensor backt = ops::transpose2(recon);
    REQUIRE(backt.shape() == frames.shape());
    for (int64_t i = 0; i < frames.numel(); ++i) {
        REQUIRE(backt.data()[i] == frames.data()[i]);  // bit-exact partition
    }
    // disjoint, ordered, exhaustive for a sweep of sizes
    for (int64_t bins : {3, 4, 5, 100, 257, 513, 1025}) {
        auto bs = dsp::make_band_split(bins);
        CHECK(bs.start[0] == 0);
        CHECK(bs.start[1] == bs.size[0]);
        CHECK(bs.start[2] == bs.size[0] + bs.size[1]);
        CHECK(bs.size[0] + bs.size[1] + bs.size[2] == bins);
        CHECK(bs.size[0] - bs.size[2] <= 1);
        CHECK(bs.size[0] >= bs.size[1]);
        CHECK(bs.size[1] >= bs.size[2]);
    }
    CHECK_THROWS_AS(dsp::make_band_split(2), ValueError);
}

TEST_CASE("mel spectrogram dimensions and silence floor", "[mel]") {
    dsp::MelAnalyzer mel(dsp::StftConfig{1024, 240, 960}, 120, 48000);
    AudioBuffer silence;
    silence.sample_rate = 48000;
    silence.samples.assign(48000, 0.0);
    Tensor lm = mel.log_mel(silence);
    REQUIRE(lm.shape() == std::vector<int64_t>({200, 120}));
    for (int64_t i = 0; i < lm.numel(); ++i) {
        REQUIRE(lm.data()[i] == Approx(std::log(1e-5)).margin(1e-9));
    }
}

TEST_CASE("mel energy scales as power", "[mel]") {
    dsp::MelAnalyzer mel(dsp::StftConfig{1024, 240, 960}, 120, 48000);
    AudioBuffer x = white_noise(0.4, 48000, 0.5, 77);
    AudioBuffer x2 = x;
    for (auto& v : x2.samples) v *= 2.0;
    Tensor a = mel.log_mel(x);
    Tensor b = mel.log_mel(x2);
    // doubling amplitude multiplies every linear mel value by 4 (power)
    int64_t checked = 0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double la = std::exp(a.data()[i]) - 1e-5;
        const double lb = std::exp(b.data()[i]) - 1e-5;
        if (la > 1e-7) {
            REQUIRE(lb / la == Approx(4.0).epsilon(1e-6));
            ++checked;
        }
    }
    REQUIRE(checked > 1000);
}

TEST_CASE("mel filterbank row properties", "[mel]") {
    for (auto [mels, fft, sr] : {std::tuple<int64_t, int64_t, int>{120, 1024, 48000},
                                 std::tuple<int64_t, int64_t, int>{80, 256, 8000}}) {
        dsp::MelFilterbank bank(mels, fft, sr);
        const Tensor& m = bank.matrix();
        REQUIRE(m.shape() == std::vector<int64_t>({mels, fft / 2 + 1}));
        for (int64_t r = 0; r < mels; ++r) {
            double row_sum = 0.0;
            bool has_positive = false;
            for (int64_t k = 0; k < bank.bins(); ++k) {
                const double v = m.data()[r * bank.bins() + k];
                REQUIRE(v >= 0.0);
                row_sum += v;
                has_positive = has_positive || v > 0.0;
            }
            REQUIRE(has_positive);
            REQUIRE(row_sum > 0.0);
        }
        // applied to an all-ones magnitude vector: all-positive output
        Tensor ones = Tensor::full({1, bank.bins()}, 1.0);
        Tensor out = bank.apply(ones);
        for (int64_t i = 0; i < out.numel(); ++i) REQUIRE(out.data()[i] > 0.0);
    }
}

TEST_CASE("mel gradient flows into the signal", "[mel][gradcheck]") {
    dsp::MelAnalyzer mel(dsp::StftConfig{64, 16, 32}, 8, 8000);
    Rng rng(3);
    Tensor x = testutil::random_tensor({96}, rng, -1, 1, true);
    Rng prj(17);
    auto fwd = [&] {
        Rng r = prj;
        return testutil::project(mel.log_mel(x), r);
    };
    CHECK(testutil::grad_check({x}, fwd).max_rel_err < 1e-5);
}

TEST_CASE("loudness hand values", "[loudness]") {
    dsp::StftConfig cfg{1024, 240, 960};
    AudioBuffer silence;
    silence.sample_rate = 48000;
    silence.samples.assign(24000, 0.0);
    for (double v : dsp::loudness(silence, cfg)) REQUIRE(v == 0.0);

    AudioBuffer tone = sine(1000.0, 1.0, 48000, 0.5);
    auto db = dsp::loudness_db(tone, cfg);
    // interior frames of a full-scale 1 kHz sine sit within 3 dB of 0 dBFS
    for (size_t i = 10; i + 10 < db.size(); ++i) {
        REQUIRE(std::fabs(db[i]) < 3.0);
    }

    AudioBuffer half = tone;
    for (auto& v : half.samples) v *= 0.5;
    auto db_half = dsp::loudness_db(half, cfg);
    for (size_t i = 10; i + 10 < db.size(); ++i) {
        REQUIRE(db[i] - db_half[i] == Approx(6.0206).margin(0.01));
    }

    // mapped values stay in [0,1]
    for (double v : dsp::loudness(tone, cfg)) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("yin tracks a sine, rejects noise and silence", "[yin]") {
    dsp::YinConfig cfg;
    AudioBuffer tone = sine(440.0, 0.6, 48000, 1.0);
    auto f0 = dsp::yin_pitch(tone, cfg);
    REQUIRE(f0.size() == 200);
    const size_t margin = 5;
    for (size_t i = margin; i + margin < f0.size(); ++i) {
        REQUIRE(f0[i] == Approx(440.0).margin(1.0));
    }

    auto noise_f0 = dsp::yin_pitch(white_noise(0.8, 48000, 1.0, 5), cfg);
    int64_t unvoiced = 0;
    for (double v : noise_f0) unvoiced += v == 0.0 ? 1 : 0;
    REQUIRE(static_cast<double>(unvoiced) >= 0.9 * static_cast<double>(noise_f0.size()));

    AudioBuffer silence;
    silence.sample_rate = 48000;
    silence.samples.assign(48000, 0.0);
    for (double v : dsp::yin_pitch(silence, cfg)) REQUIRE(v == 0.0);
}

TEST_CASE("resample length, passband, stopband", "[resample]") {
    AudioBuffer x = white_noise(0.5, 48000, 1.0, 8);
    AudioBuffer y = dsp::resample(x, 8000);
    CHECK(y.sample_rate == 8000);
    CHECK(y.size() == 8000);

    // 100 Hz passes with < 1% amplitude error
    AudioBuffer tone = sine(100.0, 0.8, 48000, 1.0);
    AudioBuffer down = dsp::resample(tone, 8000);
    double rms = 0.0;
    int64_t count = 0;
    for (int64_t i = 500; i < down.size() - 500; ++i) {
        rms += down.samples[static_cast<size_t>(i)] * down.samples[static_cast<size_t>(i)];
        ++count;
    }
    rms = std::sqrt(rms / static_cast<double>(count));
    const double amp = rms * std::sqrt(2.0);
    CHECK(std::fabs(amp - 0.8) / 0.8 < 0.01);

    // 5 kHz (above the new Nyquist) is attenuated below -60 dB
    AudioBuffer high = sine(5000.0, 0.8, 48000, 1.0);
    AudioBuffer down_high = dsp::resample(high, 8000);
    double rms_out = 0.0;
    count = 0;
    for (int64_t i = 500; i < down_high.size() - 500; ++i) {
        rms_out += down_high.samples[static_cast<size_t>(i)] *
                   down_high.samples[static_cast<size_t>(i)];
        ++count;
    }
    rms_out = std::sqrt(rms_out / static_cast<double>(count));
    const double rms_in = 0.8 / std::sqrt(2.0);
    CHECK(20.0 * std::log10(rms_out / rms_in + 1e-30) < -60.0);

    CHECK_THROWS_AS(dsp::resample(x, 0), ValueError);
    CHECK_THROWS_AS(dsp::resample(x, -8000), ValueError);
}

TEST_CASE("resample roundtrip correlates with lowpassed input", "[resample]") {
    // multi-tone signal below the 4 kHz band edge
    AudioBuffer x;
    x.sample_rate = 48000;
    x.samples.assign(48000, 0.0);
    for (double f : {110.0, 440.0, 950.0, 2000.0, 3100.0}) {
        for (int64_t t = 0; t < x.size(); ++t) {
            x.samples[static_cast<size_t>(t)] +=
                0.15 * std::sin(2.0 * M_PI * f * static_cast<double>(t) / 48000.0);
        }
    }
    AudioBuffer round = dsp::resample(dsp::resample(x, 8000), 48000);
    REQUIRE(round.size() == x.size());

    // independent 4 kHz lowpass reference: FFT-zero bins above 4 kHz
    const int64_t n = next_pow2(x.size());
    std::vector<cplx> spec(static_cast<size_t>(n), cplx(0, 0));
    for (int64_t i = 0; i < x.size(); ++i) spec[static_cast<size_t>(i)] = cplx(x.samples[static_cast<size_t>(i)], 0);
    fft_inplace(spec.data(), n);
    const int64_t cut = n * 4000 / 48000;
    for (int64_t k = cut; k <= n - cut; ++k) spec[static_cast<size_t>(k)] = cplx(0, 0);
    fft_inplace(spec.data(), n, true);

    double num = 0.0, da = 0.0, db = 0.0;
    for (int64_t i = 2000; i < x.size() - 2000; ++i) {
        const double a = round.samples[static_cast<size_t>(i)];
        const double b = spec[static_cast<size_t>(i)].real();
        num += a * b;
        da += a * a;
        db += b * b;
    }
    CHECK(num / std::sqrt(da * db) > 0.99);
}

TEST_CASE("dsp determinism: identical input gives bit-identical output", "[dsp]") {
    AudioBuffer x = white_noise(0.5, 48000, 0.3, 42);
    dsp::StftConfig cfg{1024, 240, 960};
    auto a = dsp::stft_magnitude(x, cfg);
    auto b = dsp::stft_magnitude(x, cfg);
    REQUIRE(testutil::max_abs_diff(a.frames, b.frames) == 0.0);
    auto r1 = dsp::resample(x, 8000);
    auto r2 = dsp::resample(x, 8000);
    REQUIRE(r1.samples == r2.samples);
    auto y1 = dsp::yin_pitch(x);
    auto y2 = dsp::yin_pitch(x);
    REQUIRE(y1 == y2);
}
