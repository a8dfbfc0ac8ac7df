#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "singvoc/binio.hpp"
#include "singvoc/nn.hpp"
#include "singvoc/optimizer.hpp"
#include "singvoc/rng.hpp"

namespace singvoc {

// Full training state: config snapshot, step, both parameter sets, both
// optimizer states and the rng position. Loading a checkpoint reproduces the
// next training step bit-identically.
struct CheckpointMeta {
    std::string config_text;
    int64_t step = 0;
    uint64_t rng_seed = 0;
    uint64_t rng_counter = 0;
};

namespace detail {

inline void write_params(binio::Writer& w, const std::vector<nn::NamedParam>& params) {
    w.u32(static_cast<uint32_t>(params.size()));
    for (const auto& p : params) {
        w.str(p.name);
        w.u32(static_cast<uint32_t>(p.tensor.rank()));
        for (int i = 0; i < p.tensor.rank(); ++i) w.i64(p.tensor.dim(i));
        for (int64_t i = 0; i < p.tensor.numel(); ++i) w.f64(p.tensor.data()[i]);
    }
}

inline void read_params(binio::Reader& r, std::vector<nn::NamedParam>& params,
                        const char* which) {
    const uint32_t count = r.u32();
    if (count != params.size()) {
        fail<IoError>("checkpoint holds ", count, " ", which, " parameters, model has ",
                      params.size(), " (config mismatch)");
    }
    for (auto& p : params) {
        const std::string name = r.str();
        if (name != p.name) {
            fail<IoError>("checkpoint parameter '", name, "' does not match model parameter '",
                          p.name, "' (config mismatch)");
        }
        const uint32_t rank = r.u32();
        std::vector<int64_t> shape;
        int64_t numel = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            shape.push_back(r.i64());
            numel *= shape.back();
        }
        if (shape != p.tensor.shape()) {
            fail<IoError>("checkpoint parameter '", name, "' has shape ", shape_str(shape),
                          ", model expects ", shape_str(p.tensor.shape()));
        }
        for (int64_t i = 0; i < numel; ++i) p.tensor.data()[i] = r.f64();
    }
}

inline void write_opt(binio::Writer& w, const AdamW& opt) {
    w.i64(opt.step_count());
    w.u32(static_cast<uint32_t>(opt.slots().size()));
    for (const auto& s : opt.slots()) {
        w.f64_array(s.m);
        w.f64_array(s.v);
    }
}

inline void read_opt(binio::Reader& r, AdamW& opt) {
    const int64_t step_count = r.i64();
    const uint32_t count = r.u32();
    std::vector<AdamW::Slot> slots(count);
    for (auto& s : slots) {
        s.m = r.f64_array();
        s.v = r.f64_array();
    }
    opt.restore(step_count, std::move(slots));
}

} // namespace detail

constexpr uint32_t kCheckpointMagic = 0x4b435653;  // "SVCK"
constexpr uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                            const std::vector<nn::NamedParam>& gen_params,
                            const std::vector<nn::NamedParam>& disc_params,
                            const AdamW& opt_g, const AdamW& opt_d) {
    binio::Writer w;
    w.u32(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.str(meta.config_text);
    w.i64(meta.step);
    w.u64(meta.rng_seed);
    w.u64(meta.rng_counter);
    detail::write_params(w, gen_params);
    detail::write_params(w, disc_params);
    detail::write_opt(w, opt_g);
    detail::write_opt(w, opt_d);
    w.finish_with_checksum();
    w.write_file(path);
}

// Restores parameters and optimizer state in place; returns the metadata.
inline CheckpointMeta load_checkpoint(const std::filesystem::path& path,
                                      std::vector<nn::NamedParam>& gen_params,
                                      std::vector<nn::NamedParam>& disc_params, AdamW& opt_g,
                                      AdamW& opt_d) {
    binio::Reader r = binio::Reader::from_file(path);
    r.verify_checksum("checkpoint");
    if (r.u32() != kCheckpointMagic) {
        fail<IoError>("'", path.string(), "' is not a checkpoint (bad magic)");
    }
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        fail<IoError>("'", path.string(), "': unsupported checkpoint version ", version);
    }
    CheckpointMeta meta;
    meta.config_text = r.str();
    meta.step = r.i64();
    meta.rng_seed = r.u64();
    meta.rng_counter = r.u64();
    detail::read_params(r, gen_params, "generator");
    detail::read_params(r, disc_params, "discriminator");
    detail::read_opt(r, opt_g);
    detail::read_opt(r, opt_d);
    SINGVOC_CHECK(r.at_payload_end(), "'", path.string(), "': trailing bytes in payload");
    return meta;
}

// Reads only the config snapshot (used to validate resume compatibility).
inline CheckpointMeta peek_checkpoint(const std::filesystem::path& path) {
    binio::Reader r = binio::Reader::from_file(path);
    r.verify_checksum("checkpoint");
    if (r.u32() != kCheckpointMagic) {
        fail<IoError>("'", path.string(), "' is not a checkpoint (bad magic)");
    }
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        fail<IoError>("'", path.string(), "': unsupported checkpoint version ", version);
    }
    CheckpointMeta meta;
    meta.config_text = r.str();
    meta.step = r.i64();
    meta.rng_seed = r.u64();
    meta.rng_counter = r.u64();
    return meta;
}

} // namespace singvoc
