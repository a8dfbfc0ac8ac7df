#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "singvoc/common.hpp"

namespace singvoc {

struct TensorImpl {
    std::vector<int64_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated on first accumulation
    bool requires_grad = false;
};

inline std::string shape_str(const std::vector<int64_t>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

inline int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return n;
}

// Shared handle to an n-d array of f64 in row-major order. Copies share
// storage; use clone()/detach() for value copies.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int64_t> shape, bool requires_grad = false) {
        auto impl = std::make_shared<TensorImpl>();
        check_shape(shape);
        impl->shape = std::move(shape);
        impl->data.assign(static_cast<size_t>(shape_numel(impl->shape)), 0.0);
        impl->requires_grad = requires_grad;
        return Tensor(std::move(impl));
    }

    static Tensor full(std::vector<int64_t> shape, double value) {
        Tensor t = zeros(std::move(shape));
        for (auto& v : t.impl_->data) v = value;
        return t;
    }

    static Tensor scalar(double value) { return full({1}, value); }

    static Tensor from_vector(std::vector<double> data, std::vector<int64_t> shape,
                              bool requires_grad = false) {
        check_shape(shape);
        SINGVOC_CHECK_SHAPE(static_cast<int64_t>(data.size()) == shape_numel(shape),
                            "data size ", data.size(), " does not match shape ",
                            shape_str(shape));
        auto impl = std::make_shared<TensorImpl>();
        impl->shape = std::move(shape);
        impl->data = std::move(data);
        impl->requires_grad = requires_grad;
        return Tensor(std::move(impl));
    }

    bool defined() const { return impl_ != nullptr; }
    const std::vector<int64_t>& shape() const { return impl_->shape; }
    int rank() const { return static_cast<int>(impl_->shape.size()); }
    int64_t dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

    double* data() { return impl_->data.data(); }
    const double* data() const { return impl_->data.data(); }
    std::vector<double>& vec() { return impl_->data; }
    const std::vector<double>& vec() const { return impl_->data; }

    double item() const {
        SINGVOC_CHECK_SHAPE(numel() == 1, "item() on non-scalar tensor ",
                            shape_str(impl_->shape));
        return impl_->data[0];
    }

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool v) {
        impl_->requires_grad = v;
        return *this;
    }

    bool has_grad() const { return !impl_->grad.empty(); }
    std::vector<double>& grad() {
        ensure_grad(impl_.get());
        return impl_->grad;
    }
    const std::vector<double>& grad_vec() const { return impl_->grad; }
    void zero_grad() {
        if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }

    Tensor detach() const {
        auto impl = std::make_shared<TensorImpl>();
        impl->shape = impl_->shape;
        impl->data = impl_->data;
        impl->requires_grad = false;
        return Tensor(std::move(impl));
    }

    Tensor clone() const {
        Tensor t = detach();
        t.impl_->requires_grad = impl_->requires_grad;
        return t;
    }

    void assert_finite(const char* what) const {
        for (double v : impl_->data) {
            SINGVOC_CHECK_VALUE(std::isfinite(v), what, ": non-finite value in tensor ",
                                shape_str(impl_->shape));
        }
    }

    const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

    static void ensure_grad(TensorImpl* t) {
        if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
    }

private:
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

    static void check_shape(const std::vector<int64_t>& shape) {
        SINGVOC_CHECK_SHAPE(!shape.empty(), "tensor shape must have at least one dim");
        for (int64_t d : shape) {
            SINGVOC_CHECK_SHAPE(d > 0, "tensor dims must be positive, got ", shape_str(shape));
        }
    }

    std::shared_ptr<TensorImpl> impl_;
};

class GradTape;

namespace detail {
inline GradTape*& current_tape() {
    thread_local GradTape* tape = nullptr;
    return tape;
}
} // namespace detail

// Reverse-mode tape. Ops append one record per forward call; backward() walks
// the records in reverse creation order, which is a valid topological order
// and visits each node exactly once. Tapes nest: the innermost active tape
// records. A dynamic graph is built per forward pass; nothing is cached.
class GradTape {
public:
    GradTape() : prev_(detail::current_tape()) { detail::current_tape() = this; }
    ~GradTape() { detail::current_tape() = prev_; }

    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    static GradTape* current() { return detail::current_tape(); }

    void record(std::function<void()> backward_fn) {
        nodes_.push_back(std::move(backward_fn));
    }

    size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and propagates to every recorded input.
    void backward(Tensor loss) {
        SINGVOC_CHECK_VALUE(loss.numel() == 1,
                            "backward requires a scalar loss, got shape ",
                            shape_str(loss.shape()));
        SINGVOC_CHECK_VALUE(!consumed_, "backward called twice on the same graph");
        consumed_ = true;
        Tensor::ensure_grad(loss.impl().get());
        loss.grad()[0] = 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

private:
    std::vector<std::function<void()>> nodes_;
    GradTape* prev_ = nullptr;
    bool consumed_ = false;
};

// Disables recording within a scope (inference, detached discriminator pass).
class NoGradGuard {
public:
    NoGradGuard() : saved_(detail::current_tape()) { detail::current_tape() = nullptr; }
    ~NoGradGuard() { detail::current_tape() = saved_; }

    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    GradTape* saved_;
};

} // namespace singvoc
