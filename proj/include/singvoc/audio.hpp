#pragma once

#include <cstdint>
#include <vector>

#include "singvoc/common.hpp"
#include "singvoc/tensor.hpp"

namespace singvoc {

// Mono sample sequence. All waveforms in the pipeline live in one of these:
// ground truth, generated audio, the 8 kHz guide signal.
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 0;

    AudioBuffer() = default;
    AudioBuffer(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

    int64_t size() const { return static_cast<int64_t>(samples.size()); }
    double duration() const {
        return sample_rate > 0 ? static_cast<double>(size()) / sample_rate : 0.0;
    }

    Tensor to_tensor() const { return Tensor::from_vector(samples, {size()}); }

    static AudioBuffer from_tensor(const Tensor& t, int rate) {
        return AudioBuffer(t.vec(), rate);
    }
};

} // namespace singvoc
