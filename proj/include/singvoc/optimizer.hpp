#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/nn.hpp"

namespace singvoc {

// Linear warmup to the peak over warmup_steps, then geometric decay per step.
struct LrSchedule {
    int64_t warmup_steps = 5000;
    double peak = 0.0002;
    double decay = 0.999;

    double at(int64_t step) const {
        SINGVOC_CHECK_VALUE(step >= 0, "lr schedule: negative step");
        if (step <= warmup_steps) {
            return peak * static_cast<double>(step) / static_cast<double>(warmup_steps);
        }
        return peak * std::pow(decay, static_cast<double>(step - warmup_steps));
    }
};

// Decoupled-weight-decay Adam with bias correction. Moment slots are laid out
// in parameter-registration order so checkpoints restore exactly.
class AdamW {
public:
    struct Options {
        double beta1 = 0.8;
        double beta2 = 0.99;
        double eps = 1e-8;
        double weight_decay = 0.01;
    };

    struct Slot {
        std::vector<double> m, v;
    };

    AdamW() = default;
    explicit AdamW(const Options& opt) : opt_(opt) {}

    const Options& options() const { return opt_; }
    int64_t step_count() const { return step_count_; }
    std::vector<Slot>& slots() { return slots_; }
    const std::vector<Slot>& slots() const { return slots_; }
    void restore(int64_t step_count, std::vector<Slot> slots) {
        step_count_ = step_count;
        slots_ = std::move(slots);
    }

    void step(std::vector<nn::NamedParam>& params, double lr) {
        if (slots_.empty()) {
            slots_.resize(params.size());
            for (size_t i = 0; i < params.size(); ++i) {
                const size_t n = static_cast<size_t>(params[i].tensor.numel());
                slots_[i].m.assign(n, 0.0);
                slots_[i].v.assign(n, 0.0);
            }
        }
        SINGVOC_CHECK_INTERNAL(slots_.size() == params.size(),
                               "optimizer slot count does not match parameter count");
        ++step_count_;
        const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_count_));
        const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_count_));
        for (size_t i = 0; i < params.size(); ++i) {
            Tensor& t = params[i].tensor;
            const int64_t n = t.numel();
            const bool has_grad = t.has_grad();
            const double* g = has_grad ? t.grad_vec().data() : nullptr;
            double* w = t.data();
            Slot& s = slots_[i];
            for (int64_t j = 0; j < n; ++j) {
                const double gj = has_grad ? g[j] : 0.0;
                SINGVOC_CHECK_VALUE(std::isfinite(gj), "non-finite gradient in parameter '",
                                    params[i].name, "' at index ", j);
                s.m[static_cast<size_t>(j)] =
                    opt_.beta1 * s.m[static_cast<size_t>(j)] + (1.0 - opt_.beta1) * gj;
                s.v[static_cast<size_t>(j)] =
                    opt_.beta2 * s.v[static_cast<size_t>(j)] + (1.0 - opt_.beta2) * gj * gj;
                const double mhat = s.m[static_cast<size_t>(j)] / bc1;
                const double vhat = s.v[static_cast<size_t>(j)] / bc2;
                w[j] -= lr * (mhat / (std::sqrt(vhat) + opt_.eps) +
                              opt_.weight_decay * w[j]);
            }
        }
    }

private:
    Options opt_;
    int64_t step_count_ = 0;
    std::vector<Slot> slots_;
};

// Returns the pre-clip global norm; scales gradients in place when needed.
inline double clip_global_norm(std::vector<nn::NamedParam>& params, double max_norm) {
    double sq = 0.0;
    for (auto& p : params) {
        if (!p.tensor.has_grad()) continue;
        for (double g : p.tensor.grad_vec()) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& p : params) {
            if (!p.tensor.has_grad()) continue;
            for (double& g : p.tensor.grad()) g *= scale;
        }
    }
    return norm;
}

} // namespace singvoc
