#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "singvoc/conv.hpp"
#include "singvoc/gru.hpp"
#include "singvoc/ops.hpp"
#include "singvoc/rng.hpp"

namespace singvoc {
namespace nn {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Owns a flat, ordered list of named parameters. Composite modules adopt
// their children's parameters under a prefix; tensors are shared handles, so
// the optimizer and checkpoint code see a single storage per parameter.
class Module {
public:
    virtual ~Module() = default;

    const std::vector<NamedParam>& params() const { return params_; }
    std::vector<NamedParam>& params() { return params_; }

    int64_t num_parameters() const {
        int64_t n = 0;
        for (const auto& p : params_) n += p.tensor.numel();
        return n;
    }

    void zero_grad() {
        for (auto& p : params_) p.tensor.zero_grad();
    }

protected:
    Tensor register_param(const std::string& name, Tensor t) {
        t.set_requires_grad(true);
        params_.push_back({name, t});
        return t;
    }

    void adopt(const std::string& prefix, Module& child) {
        for (auto& p : child.params_) {
            params_.push_back({prefix + "." + p.name, p.tensor});
        }
    }

private:
    std::vector<NamedParam> params_;
};

// Kaiming-style uniform init scaled by fan-in.
inline Tensor uniform_init(std::vector<int64_t> shape, int64_t fan_in, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (auto& v : t.vec()) v = rng.uniform(-bound, bound);
    return t;
}

class Dense : public Module {
public:
    Dense(int64_t din, int64_t dout, Rng& rng)
        : w_(register_param("weight", uniform_init({din, dout}, din, rng))),
          b_(register_param("bias", uniform_init({dout}, din, rng))) {}

    Tensor forward(const Tensor& x) const { return ops::linear(x, w_, b_); }

    Tensor& weight() { return w_; }
    Tensor& bias() { return b_; }

private:
    Tensor w_, b_;
};

// Stack of Dense layers with leaky_relu(0.1) after each one.
class Mlp : public Module {
public:
    Mlp(int64_t din, int64_t hidden, int64_t dout, int64_t layers, Rng& rng) {
        SINGVOC_CHECK_VALUE(layers >= 1, "mlp needs at least one layer");
        for (int64_t i = 0; i < layers; ++i) {
            const int64_t in = i == 0 ? din : hidden;
            const int64_t out = i == layers - 1 ? dout : hidden;
            layers_.emplace_back(in, out, rng);
        }
        for (size_t i = 0; i < layers_.size(); ++i) {
            adopt("l" + std::to_string(i), layers_[i]);
        }
    }

    Tensor forward(const Tensor& x) const {
        Tensor h = x;
        for (const auto& l : layers_) h = ops::leaky_relu(l.forward(h));
        return h;
    }

private:
    std::vector<Dense> layers_;
};

class Conv1dLayer : public Module {
public:
    Conv1dLayer(int64_t cin, int64_t cout, int64_t k, int64_t stride, int64_t dilation,
                int64_t padding, Rng& rng)
        : stride_(stride), dilation_(dilation), padding_(padding) {
        w_ = register_param("weight", uniform_init({cout, cin, k}, cin * k, rng));
        b_ = register_param("bias", uniform_init({cout}, cin * k, rng));
    }

    Tensor forward(const Tensor& x) const {
        return ops::conv1d(x, w_, b_, stride_, dilation_, padding_);
    }

    Tensor& weight() { return w_; }
    Tensor& bias() { return b_; }

private:
    Tensor w_, b_;
    int64_t stride_, dilation_, padding_;
};

class ConvT1dLayer : public Module {
public:
    ConvT1dLayer(int64_t cin, int64_t cout, int64_t k, int64_t stride, int64_t padding,
                 Rng& rng)
        : stride_(stride), padding_(padding) {
        w_ = register_param("weight", uniform_init({cin, cout, k}, cin * k, rng));
        b_ = register_param("bias", uniform_init({cout}, cin * k, rng));
    }

    Tensor forward(const Tensor& x) const {
        return ops::conv_transpose1d(x, w_, b_, stride_, padding_);
    }

private:
    Tensor w_, b_;
    int64_t stride_, padding_;
};

class Conv2dLayer : public Module {
public:
    Conv2dLayer(int64_t cin, int64_t cout, int64_t kh, int64_t kw, int64_t sh, int64_t sw,
                int64_t ph, int64_t pw, Rng& rng)
        : sh_(sh), sw_(sw), ph_(ph), pw_(pw) {
        w_ = register_param("weight", uniform_init({cout, cin, kh, kw}, cin * kh * kw, rng));
        b_ = register_param("bias", uniform_init({cout}, cin * kh * kw, rng));
    }

    Tensor forward(const Tensor& x) const {
        return ops::conv2d(x, w_, b_, sh_, sw_, ph_, pw_);
    }

    Tensor& weight() { return w_; }
    Tensor& bias() { return b_; }

private:
    Tensor w_, b_;
    int64_t sh_, sw_, ph_, pw_;
};

class GruLayer : public Module {
public:
    GruLayer(int64_t din, int64_t hidden, Rng& rng) : hidden_(hidden) {
        // simple scaled uniform; fan is the hidden size
        wr_ = register_param("wr", uniform_init({din, hidden}, hidden, rng));
        wz_ = register_param("wz", uniform_init({din, hidden}, hidden, rng));
        wn_ = register_param("wn", uniform_init({din, hidden}, hidden, rng));
        ur_ = register_param("ur", uniform_init({hidden, hidden}, hidden, rng));
        uz_ = register_param("uz", uniform_init({hidden, hidden}, hidden, rng));
        un_ = register_param("un", uniform_init({hidden, hidden}, hidden, rng));
        br_ = register_param("br", uniform_init({hidden}, hidden, rng));
        bz_ = register_param("bz", uniform_init({hidden}, hidden, rng));
        bn_ = register_param("bn", uniform_init({hidden}, hidden, rng));
    }

    Tensor forward(const Tensor& x) const {
        Tensor h0 = Tensor::zeros({hidden_});
        return ops::gru_forward(x, h0, wr_, wz_, wn_, ur_, uz_, un_, br_, bz_, bn_);
    }

private:
    int64_t hidden_;
    Tensor wr_, wz_, wn_, ur_, uz_, un_, br_, bz_, bn_;
};

} // namespace nn
} // namespace singvoc
