#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "singvoc/common.hpp"
#include "singvoc/discriminator.hpp"
#include "singvoc/features.hpp"
#include "singvoc/generator.hpp"
#include "singvoc/losses.hpp"
#include "singvoc/optimizer.hpp"

namespace singvoc {

// Plain-text key=value run configuration. Defaults are the published training
// settings; every key is listed in kv_fields(), and unknown keys are
// rejected at parse time.
struct RunConfig {
    // analysis
    int64_t sample_rate = 48000;
    int64_t guide_rate = 8000;
    int64_t fft_size = 1024;
    int64_t win_length = 960;  // 20 ms
    int64_t hop = 240;         // 5 ms
    int64_t mel_bins = 120;
    int64_t guide_fft_size = 256;
    int64_t guide_win_length = 160;
    int64_t guide_hop = 40;
    int64_t guide_mel_bins = 80;
    // generator
    int64_t hidden = 512;
    int64_t harmonics = 64;
    int64_t noise_frame = 128;
    int64_t reverb_ir = 4000;
    int64_t latent_channels = 32;
    std::vector<int64_t> unet_channels{64, 128, 256};
    std::vector<int64_t> mel_up_strides{10, 6, 4};
    int64_t mel_up_channels = 64;
    int64_t wavenet_layers = 18;
    int64_t wavenet_kernel = 15;
    std::vector<int64_t> wavenet_dilations{1, 3, 9, 27, 81, 243};
    int64_t wavenet_residual = 64;
    int64_t wavenet_skip = 64;
    bool ablate_latent = false;
    // discriminators
    std::vector<int64_t> mpd_periods{2, 3, 5, 7, 11};
    std::vector<int64_t> mpd_channels{32, 64, 128, 256, 512};
    std::vector<int64_t> mbsd_channels{32, 64, 128, 256, 256};
    std::vector<std::array<int64_t, 3>> mbsd_stft_sets{
        {512, 128, 512}, {1024, 256, 1024}, {1024, 512, 1024}, {2048, 512, 2048}};
    // loss weights
    double lambda_sp = 10.0;
    double lambda_fm = 1.0;
    double lambda_mel = 1.0;
    double lambda_adv = 120.0;
    // optimizer / schedule
    double beta1 = 0.8;
    double beta2 = 0.99;
    double weight_decay = 0.01;
    int64_t warmup_steps = 5000;
    double peak_lr = 0.0002;
    double lr_decay = 0.999;
    double grad_clip = 10.0;
    // training loop
    int64_t batch_size = 1;
    int64_t crop_frames = 100;  // 0.5 s
    int64_t train_steps = 1000;
    int64_t ckpt_interval = 200;
    int64_t log_interval = 1;
    uint64_t seed = 1234;

    // ---- derived option structs -------------------------------------------

    GeneratorOptions generator_options() const {
        GeneratorOptions g;
        g.control.mel_dims = mel_bins;
        g.control.hidden = hidden;
        g.control.harmonics = harmonics;
        g.control.noise_bins = noise_frame / 2 + 1;
        g.unet.latent_channels = latent_channels;
        SINGVOC_CHECK_VALUE(unet_channels.size() == 3, "unet_channels needs 3 entries");
        g.unet.channels = {unet_channels[0], unet_channels[1], unet_channels[2]};
        g.unet.upsample_factor = sample_rate / guide_rate;
        g.wavenet.mel_dims = mel_bins;
        g.wavenet.cond_channels = latent_channels;
        SINGVOC_CHECK_VALUE(mel_up_strides.size() == 3, "mel_up_strides needs 3 entries");
        g.wavenet.mel_up_strides = {mel_up_strides[0], mel_up_strides[1], mel_up_strides[2]};
        g.wavenet.mel_channels = mel_up_channels;
        g.wavenet.layers = wavenet_layers;
        g.wavenet.kernel = wavenet_kernel;
        g.wavenet.dilations = wavenet_dilations;
        g.wavenet.residual_channels = wavenet_residual;
        g.wavenet.skip_channels = wavenet_skip;
        g.sample_rate = static_cast<int>(sample_rate);
        g.guide_rate = static_cast<int>(guide_rate);
        g.hop = hop;
        g.reverb_ir_length = reverb_ir;
        g.ablate_latent = ablate_latent;
        return g;
    }

    MpdOptions mpd_options() const {
        MpdOptions m;
        m.periods = mpd_periods;
        m.channels = mpd_channels;
        return m;
    }

    MbsdOptions mbsd_options() const {
        MbsdOptions m;
        m.stft_sets = mbsd_stft_sets;
        m.channels = mbsd_channels;
        return m;
    }

    LossWeights loss_weights() const {
        LossWeights w;
        w.sp = lambda_sp;
        w.fm = lambda_fm;
        w.mel = lambda_mel;
        w.adv = lambda_adv;
        return w;
    }

    std::vector<dsp::StftConfig> spectral_loss_configs() const {
        std::vector<dsp::StftConfig> out;
        for (const auto& s : mbsd_stft_sets) out.push_back({s[0], s[1], s[2]});
        return out;
    }

    LrSchedule lr_schedule() const { return {warmup_steps, peak_lr, lr_decay}; }

    AdamW::Options adam_options() const {
        AdamW::Options a;
        a.beta1 = beta1;
        a.beta2 = beta2;
        a.weight_decay = weight_decay;
        return a;
    }

    AnalysisSettings analysis_settings() const {
        AnalysisSettings s;
        s.stft = {fft_size, hop, win_length};
        s.mel_dims = mel_bins;
        s.sample_rate = static_cast<int>(sample_rate);
        return s;
    }

    dsp::StftConfig guide_mel_config() const {
        return {guide_fft_size, guide_hop, guide_win_length};
    }

    // ---- text form ----------------------------------------------------------

    std::string to_text() const;
    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        int64_t r = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (...) {
        fail<ConfigError>("config key '", key, "': expected integer, got '", v, "'");
    }
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double r = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (...) {
        fail<ConfigError>("config key '", key, "': expected number, got '", v, "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail<ConfigError>("config key '", key, "': expected true/false, got '", v, "'");
}

inline std::vector<int64_t> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) fail<ConfigError>("config key '", key, "': empty list");
    return out;
}

inline std::vector<std::array<int64_t, 3>> parse_triples(const std::string& key,
                                                         const std::string& v) {
    std::vector<std::array<int64_t, 3>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::stringstream ts(trim(item));
        std::string part;
        std::array<int64_t, 3> triple{};
        int i = 0;
        while (std::getline(ts, part, ':')) {
            if (i >= 3) fail<ConfigError>("config key '", key, "': malformed triple '", item, "'");
            triple[static_cast<size_t>(i++)] = parse_int(key, trim(part));
        }
        if (i != 3) fail<ConfigError>("config key '", key, "': malformed triple '", item, "'");
        out.push_back(triple);
    }
    if (out.empty()) fail<ConfigError>("config key '", key, "': empty list");
    return out;
}

inline std::string int_list_to_string(const std::vector<int64_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

inline std::string triples_to_string(const std::vector<std::array<int64_t, 3>>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i][0]) + ":" + std::to_string(v[i][1]) + ":" +
             std::to_string(v[i][2]);
    }
    return s;
}

inline std::string double_to_string(double v) {
    std::ostringstream oss;
    oss.precision(17);
    oss << v;
    return oss.str();
}

} // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
    using namespace detail;
    auto i = [&] { return parse_int(key, value); };
    auto d = [&] { return parse_double(key, value); };
    if (key == "sample_rate") sample_rate = i();
    else if (key == "guide_rate") guide_rate = i();
    else if (key == "fft_size") fft_size = i();
    else if (key == "win_length") win_length = i();
    else if (key == "hop") hop = i();
    else if (key == "mel_bins") mel_bins = i();
    else if (key == "guide_fft_size") guide_fft_size = i();
    else if (key == "guide_win_length") guide_win_length = i();
    else if (key == "guide_hop") guide_hop = i();
    else if (key == "guide_mel_bins") guide_mel_bins = i();
    else if (key == "hidden") hidden = i();
    else if (key == "harmonics") harmonics = i();
    else if (key == "noise_frame") noise_frame = i();
    else if (key == "reverb_ir") reverb_ir = i();
    else if (key == "latent_channels") latent_channels = i();
    else if (key == "unet_channels") unet_channels = parse_int_list(key, value);
    else if (key == "mel_up_strides") mel_up_strides = parse_int_list(key, value);
    else if (key == "mel_up_channels") mel_up_channels = i();
    else if (key == "wavenet_layers") wavenet_layers = i();
    else if (key == "wavenet_kernel") wavenet_kernel = i();
    else if (key == "wavenet_dilations") wavenet_dilations = parse_int_list(key, value);
    else if (key == "wavenet_residual") wavenet_residual = i();
    else if (key == "wavenet_skip") wavenet_skip = i();
    else if (key == "ablate_latent") ablate_latent = parse_bool(key, value);
    else if (key == "mpd_periods") mpd_periods = parse_int_list(key, value);
    else if (key == "mpd_channels") mpd_channels = parse_int_list(key, value);
    else if (key == "mbsd_channels") mbsd_channels = parse_int_list(key, value);
    else if (key == "mbsd_stft_sets") mbsd_stft_sets = parse_triples(key, value);
    else if (key == "lambda_sp") lambda_sp = d();
    else if (key == "lambda_fm") lambda_fm = d();
    else if (key == "lambda_mel") lambda_mel = d();
    else if (key == "lambda_adv") lambda_adv = d();
    else if (key == "beta1") beta1 = d();
    else if (key == "beta2") beta2 = d();
    else if (key == "weight_decay") weight_decay = d();
    else if (key == "warmup_steps") warmup_steps = i();
    else if (key == "peak_lr") peak_lr = d();
    else if (key == "lr_decay") lr_decay = d();
    else if (key == "grad_clip") grad_clip = d();
    else if (key == "batch_size") batch_size = i();
    else if (key == "crop_frames") crop_frames = i();
    else if (key == "train_steps") train_steps = i();
    else if (key == "ckpt_interval") ckpt_interval = i();
    else if (key == "log_interval") log_interval = i();
    else if (key == "seed") seed = static_cast<uint64_t>(i());
    else fail<ConfigError>("unknown config key '", key, "'");
}

inline std::string RunConfig::to_text() const {
    using namespace detail;
    std::ostringstream o;
    o << "sample_rate = " << sample_rate << "\n";
    o << "guide_rate = " << guide_rate << "\n";
    o << "fft_size = " << fft_size << "\n";
    o << "win_length = " << win_length << "\n";
    o << "hop = " << hop << "\n";
    o << "mel_bins = " << mel_bins << "\n";
    o << "guide_fft_size = " << guide_fft_size << "\n";
    o << "guide_win_length = " << guide_win_length << "\n";
    o << "guide_hop = " << guide_hop << "\n";
    o << "guide_mel_bins = " << guide_mel_bins << "\n";
    o << "hidden = " << hidden << "\n";
    o << "harmonics = " << harmonics << "\n";
    o << "noise_frame = " << noise_frame << "\n";
    o << "reverb_ir = " << reverb_ir << "\n";
    o << "latent_channels = " << latent_channels << "\n";
    o << "unet_channels = " << int_list_to_string(unet_channels) << "\n";
    o << "mel_up_strides = " << int_list_to_string(mel_up_strides) << "\n";
    o << "mel_up_channels = " << mel_up_channels << "\n";
    o << "wavenet_layers = " << wavenet_layers << "\n";
    o << "wavenet_kernel = " << wavenet_kernel << "\n";
    o << "wavenet_dilations = " << int_list_to_string(wavenet_dilations) << "\n";
    o << "wavenet_residual = " << wavenet_residual << "\n";
    o << "wavenet_skip = " << wavenet_skip << "\n";
    o << "ablate_latent = " << (ablate_latent ? "true" : "false") << "\n";
    o << "mpd_periods = " << int_list_to_string(mpd_periods) << "\n";
    o << "mpd_channels = " << int_list_to_string(mpd_channels) << "\n";
    o << "mbsd_channels = " << int_list_to_string(mbsd_channels) << "\n";
    o << "mbsd_stft_sets = " << triples_to_string(mbsd_stft_sets) << "\n";
    o << "lambda_sp = " << double_to_string(lambda_sp) << "\n";
    o << "lambda_fm = " << double_to_string(lambda_fm) << "\n";
    o << "lambda_mel = " << double_to_string(lambda_mel) << "\n";
    o << "lambda_adv = " << double_to_string(lambda_adv) << "\n";
    o << "beta1 = " << double_to_string(beta1) << "\n";
    o << "beta2 = " << double_to_string(beta2) << "\n";
    o << "weight_decay = " << double_to_string(weight_decay) << "\n";
    o << "warmup_steps = " << warmup_steps << "\n";
    o << "peak_lr = " << double_to_string(peak_lr) << "\n";
    o << "lr_decay = " << double_to_string(lr_decay) << "\n";
    o << "grad_clip = " << double_to_string(grad_clip) << "\n";
    o << "batch_size = " << batch_size << "\n";
    o << "crop_frames = " << crop_frames << "\n";
    o << "train_steps = " << train_steps << "\n";
    o << "ckpt_interval = " << ckpt_interval << "\n";
    o << "log_interval = " << log_interval << "\n";
    o << "seed = " << seed << "\n";
    return o.str();
}

inline RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int64_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail<ConfigError>("config line ", line_no, ": expected key = value, got '", line,
                              "'");
        }
        cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) fail<IoError>("cannot open config file '", path, "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_text(text);
}

} // namespace singvoc
