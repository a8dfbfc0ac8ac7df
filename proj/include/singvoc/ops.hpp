#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/parallel.hpp"
#include "singvoc/tensor.hpp"

namespace singvoc {
namespace ops {

namespace detail {

inline bool recording(std::initializer_list<const Tensor*> inputs) {
    if (!GradTape::current()) return false;
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

template <typename F>
void maybe_parallel(int64_t n, F&& body) {
    if (n < 1 << 14) {
        for (int64_t i = 0; i < n; ++i) body(i);
    } else {
        parallel_chunks(n, [&](int64_t b, int64_t e) {
            for (int64_t i = b; i < e; ++i) body(i);
        });
    }
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    SINGVOC_CHECK_SHAPE(a.shape() == b.shape(), op, ": shape mismatch ",
                        shape_str(a.shape()), " vs ", shape_str(b.shape()));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary
// ---------------------------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const int64_t n = a.numel();
    detail::maybe_parallel(n, [&](int64_t i) { po[i] = pa[i] + pb[i]; });
    if (detail::recording({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([ai, bi, oi, ga, gb, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ga) {
                Tensor::ensure_grad(ai.get());
                for (int64_t i = 0; i < n; ++i) ai->grad[i] += g[i];
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t i = 0; i < n; ++i) bi->grad[i] += g[i];
            }
        });
    }
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const int64_t n = a.numel();
    detail::maybe_parallel(n, [&](int64_t i) { po[i] = pa[i] - pb[i]; });
    if (detail::recording({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([ai, bi, oi, ga, gb, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ga) {
                Tensor::ensure_grad(ai.get());
                for (int64_t i = 0; i < n; ++i) ai->grad[i] += g[i];
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t i = 0; i < n; ++i) bi->grad[i] -= g[i];
            }
        });
    }
    return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::check_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const int64_t n = a.numel();
    detail::maybe_parallel(n, [&](int64_t i) { po[i] = pa[i] * pb[i]; });
    if (detail::recording({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([ai, bi, oi, ga, gb, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ga) {
                Tensor::ensure_grad(ai.get());
                for (int64_t i = 0; i < n; ++i) ai->grad[i] += g[i] * bi->data[i];
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t i = 0; i < n; ++i) bi->grad[i] += g[i] * ai->data[i];
            }
        });
    }
    return out;
}

inline Tensor div(const Tensor& a, const Tensor& b) {
    detail::check_same_shape(a, b, "div");
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    const int64_t n = a.numel();
    detail::maybe_parallel(n, [&](int64_t i) { po[i] = pa[i] / pb[i]; });
    if (detail::recording({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([ai, bi, oi, ga, gb, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ga) {
                Tensor::ensure_grad(ai.get());
                for (int64_t i = 0; i < n; ++i) ai->grad[i] += g[i] / bi->data[i];
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t i = 0; i < n; ++i) {
                    const double inv = 1.0 / bi->data[i];
                    bi->grad[i] -= g[i] * ai->data[i] * inv * inv;
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise unary / scalar
// ---------------------------------------------------------------------------

namespace detail {

// Shared skeleton: out[i] = fwd(a[i]); da[i] += g[i] * dfn(a[i], out[i]).
template <typename Fwd, typename Dfn>
Tensor unary_op(const Tensor& a, Fwd fwd, Dfn dfn) {
    Tensor out = Tensor::zeros(a.shape());
    const double* pa = a.data();
    double* po = out.data();
    const int64_t n = a.numel();
    maybe_parallel(n, [&](int64_t i) { po[i] = fwd(pa[i]); });
    if (recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, dfn, n] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            const double* g = oi->grad.data();
            for (int64_t i = 0; i < n; ++i) {
                ai->grad[i] += g[i] * dfn(ai->data[i], oi->data[i]);
            }
        });
    }
    return out;
}

} // namespace detail

inline Tensor neg(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

inline Tensor add_scalar(const Tensor& a, double c) {
    return detail::unary_op(
        a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

inline Tensor mul_scalar(const Tensor& a, double c) {
    return detail::unary_op(
        a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

inline Tensor abs(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::fabs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

// log(x + shift); shift doubles as the log floor for magnitudes.
inline Tensor log_shift(const Tensor& a, double shift) {
    return detail::unary_op(
        a, [shift](double x) { return std::log(x + shift); },
        [shift](double x, double) { return 1.0 / (x + shift); });
}

inline Tensor sqrt(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

inline Tensor sin(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::sin(x); },
        [](double x, double) { return std::cos(x); });
}

inline Tensor tanh(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

inline Tensor sigmoid(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Tensor leaky_relu(const Tensor& a, double slope = 0.1) {
    return detail::unary_op(
        a, [slope](double x) { return x >= 0.0 ? x : slope * x; },
        [slope](double x, double) { return x >= 0.0 ? 1.0 : slope; });
}

// 2*sigmoid(x)^ln(10) + 1e-7: strictly positive, bounded, monotone. Used for
// amplitude-like heads so they cannot go negative.
inline Tensor exp_sigmoid(const Tensor& a) {
    constexpr double kPower = 2.302585092994045684;  // ln(10)
    constexpr double kFloor = 1e-7;
    return detail::unary_op(
        a,
        [](double x) {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return 2.0 * std::pow(s, kPower) + kFloor;
        },
        [](double x, double) {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return 2.0 * kPower * std::pow(s, kPower) * (1.0 - s);
        });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

inline Tensor sum_all(const Tensor& a) {
    Tensor out = Tensor::zeros({1});
    const double* pa = a.data();
    const int64_t n = a.numel();
    double acc = 0.0;  // sequential: reduction order is part of determinism
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    out.data()[0] = acc;
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, n] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            const double g = oi->grad[0];
            for (int64_t i = 0; i < n; ++i) ai->grad[i] += g;
        });
    }
    return out;
}

inline Tensor mean_all(const Tensor& a) {
    return mul_scalar(sum_all(a), 1.0 / static_cast<double>(a.numel()));
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

inline Tensor reshape(const Tensor& a, std::vector<int64_t> new_shape) {
    SINGVOC_CHECK_SHAPE(shape_numel(new_shape) == a.numel(), "reshape ",
                        shape_str(a.shape()), " -> ", shape_str(new_shape),
                        " changes element count");
    Tensor out = Tensor::from_vector(a.vec(), std::move(new_shape));
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            for (size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor transpose2(const Tensor& a) {
    SINGVOC_CHECK_SHAPE(a.rank() == 2, "transpose2 expects rank-2, got ",
                        shape_str(a.shape()));
    const int64_t r = a.dim(0), c = a.dim(1);
    Tensor out = Tensor::zeros({c, r});
    const double* pa = a.data();
    double* po = out.data();
    detail::maybe_parallel(c, [&](int64_t j) {
        for (int64_t i = 0; i < r; ++i) po[j * r + i] = pa[i * c + j];
    });
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, r, c] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            for (int64_t j = 0; j < c; ++j) {
                for (int64_t i = 0; i < r; ++i) {
                    ai->grad[i * c + j] += oi->grad[j * r + i];
                }
            }
        });
    }
    return out;
}

// Slice along one axis; works for any rank.
inline Tensor slice(const Tensor& a, int axis, int64_t start, int64_t len) {
    const auto& shp = a.shape();
    SINGVOC_CHECK_SHAPE(axis >= 0 && axis < a.rank(), "slice: axis ", axis,
                        " out of range for ", shape_str(shp));
    SINGVOC_CHECK_SHAPE(start >= 0 && len > 0 && start + len <= shp[static_cast<size_t>(axis)],
                        "slice: range [", start, ",", start + len, ") out of bounds for ",
                        shape_str(shp), " axis ", axis);
    std::vector<int64_t> out_shape = shp;
    out_shape[static_cast<size_t>(axis)] = len;
    Tensor out = Tensor::zeros(out_shape);
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= shp[static_cast<size_t>(i)];
    for (int i = axis + 1; i < a.rank(); ++i) inner *= shp[static_cast<size_t>(i)];
    const int64_t axis_in = shp[static_cast<size_t>(axis)];
    const double* pa = a.data();
    double* po = out.data();
    for (int64_t o = 0; o < outer; ++o) {
        const double* src = pa + (o * axis_in + start) * inner;
        double* dst = po + o * len * inner;
        std::copy(src, src + len * inner, dst);
    }
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, outer, inner, axis_in, start, len] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            for (int64_t o = 0; o < outer; ++o) {
                double* dst = ai->grad.data() + (o * axis_in + start) * inner;
                const double* src = oi->grad.data() + o * len * inner;
                for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
            }
        });
    }
    return out;
}

// Concatenate along axis 0 (row-major blocks are contiguous).
inline Tensor concat0(const std::vector<Tensor>& parts) {
    SINGVOC_CHECK_SHAPE(!parts.empty(), "concat0: empty input list");
    std::vector<int64_t> out_shape = parts[0].shape();
    int64_t dim0 = 0;
    for (const Tensor& p : parts) {
        SINGVOC_CHECK_SHAPE(p.rank() == parts[0].rank(), "concat0: rank mismatch");
        for (int i = 1; i < p.rank(); ++i) {
            SINGVOC_CHECK_SHAPE(p.dim(i) == parts[0].dim(i),
                                "concat0: trailing dim mismatch ", shape_str(p.shape()),
                                " vs ", shape_str(parts[0].shape()));
        }
        dim0 += p.dim(0);
    }
    out_shape[0] = dim0;
    Tensor out = Tensor::zeros(out_shape);
    double* po = out.data();
    int64_t offset = 0;
    bool any_grad = false;
    for (const Tensor& p : parts) {
        std::copy(p.data(), p.data() + p.numel(), po + offset);
        offset += p.numel();
        any_grad = any_grad || p.requires_grad();
    }
    if (GradTape::current() && any_grad) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<TensorImpl>> impls;
        std::vector<bool> need;
        for (const Tensor& p : parts) {
            impls.push_back(p.impl());
            need.push_back(p.requires_grad());
        }
        auto oi = out.impl();
        GradTape::current()->record([impls, need, oi] {
            if (oi->grad.empty()) return;
            int64_t off = 0;
            for (size_t p = 0; p < impls.size(); ++p) {
                const int64_t n = static_cast<int64_t>(impls[p]->data.size());
                if (need[p]) {
                    Tensor::ensure_grad(impls[p].get());
                    for (int64_t i = 0; i < n; ++i) {
                        impls[p]->grad[i] += oi->grad[off + i];
                    }
                }
                off += n;
            }
        });
    }
    return out;
}

// Constant padding of the last axis (rank 1 or 2).
inline Tensor pad_const(const Tensor& a, int64_t left, int64_t right, double value = 0.0) {
    SINGVOC_CHECK_SHAPE(a.rank() <= 2, "pad_const expects rank 1 or 2, got ",
                        shape_str(a.shape()));
    SINGVOC_CHECK_VALUE(left >= 0 && right >= 0, "pad_const: negative pad");
    const int64_t rows = a.rank() == 2 ? a.dim(0) : 1;
    const int64_t len = a.dim(a.rank() - 1);
    const int64_t out_len = len + left + right;
    std::vector<int64_t> out_shape = a.shape();
    out_shape.back() = out_len;
    Tensor out = Tensor::full(out_shape, value);
    for (int64_t r = 0; r < rows; ++r) {
        std::copy(a.data() + r * len, a.data() + (r + 1) * len,
                  out.data() + r * out_len + left);
    }
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, rows, len, out_len, left] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            for (int64_t r = 0; r < rows; ++r) {
                for (int64_t i = 0; i < len; ++i) {
                    ai->grad[r * len + i] += oi->grad[r * out_len + left + i];
                }
            }
        });
    }
    return out;
}

namespace detail {
inline int64_t reflect_index(int64_t i, int64_t n) {
    // Reflection without edge repetition, e.g. n=4: -1 -> 1, 4 -> 2.
    if (n == 1) return 0;
    const int64_t period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}
} // namespace detail

// Reflect padding of a rank-1 signal.
inline Tensor pad_reflect(const Tensor& a, int64_t left, int64_t right) {
    SINGVOC_CHECK_SHAPE(a.rank() == 1, "pad_reflect expects rank-1, got ",
                        shape_str(a.shape()));
    const int64_t n = a.dim(0);
    SINGVOC_CHECK_VALUE(left >= 0 && right >= 0, "pad_reflect: negative pad");
    SINGVOC_CHECK_VALUE(left < n && right < n,
                        "pad_reflect: pad (", left, ",", right,
                        ") too large for signal of length ", n);
    Tensor out = Tensor::zeros({n + left + right});
    const double* pa = a.data();
    double* po = out.data();
    for (int64_t i = 0; i < n + left + right; ++i) {
        po[i] = pa[detail::reflect_index(i - left, n)];
    }
    if (detail::recording({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        GradTape::current()->record([ai, oi, n, left, right] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(ai.get());
            for (int64_t i = 0; i < n + left + right; ++i) {
                ai->grad[detail::reflect_index(i - left, n)] += oi->grad[i];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear: out[i,j] = sum_k x[i,k] * W[k,j] + b[j]
// ---------------------------------------------------------------------------

inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    SINGVOC_CHECK_SHAPE(x.rank() == 2 && w.rank() == 2 && b.rank() == 1,
                        "linear: expected x[B,din], W[din,dout], b[dout], got ",
                        shape_str(x.shape()), " ", shape_str(w.shape()), " ",
                        shape_str(b.shape()));
    const int64_t rows = x.dim(0), din = x.dim(1);
    const int64_t dout = w.dim(1);
    SINGVOC_CHECK_SHAPE(w.dim(0) == din, "linear: input width ", shape_str(x.shape()),
                        " incompatible with weight ", shape_str(w.shape()));
    SINGVOC_CHECK_SHAPE(b.dim(0) == dout, "linear: bias ", shape_str(b.shape()),
                        " incompatible with weight ", shape_str(w.shape()));
    Tensor out = Tensor::zeros({rows, dout});
    {
        const double* px = x.data();
        const double* pw = w.data();
        const double* pb = b.data();
        double* po = out.data();
        parallel_chunks(rows, [&](int64_t r0, int64_t r1) {
            for (int64_t i = r0; i < r1; ++i) {
                double* orow = po + i * dout;
                std::copy(pb, pb + dout, orow);
                const double* xrow = px + i * din;
                for (int64_t k = 0; k < din; ++k) {
                    const double xv = xrow[k];
                    const double* wrow = pw + k * dout;
                    for (int64_t j = 0; j < dout; ++j) orow[j] += xv * wrow[j];
                }
            }
        });
    }
    if (detail::recording({&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = out.impl();
        const bool gx = x.requires_grad(), gw = w.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([xi, wi, bi, oi, gx, gw, gb, rows, din, dout] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (gx) {
                Tensor::ensure_grad(xi.get());
                double* dx = xi->grad.data();
                parallel_chunks(rows, [&](int64_t r0, int64_t r1) {
                    for (int64_t i = r0; i < r1; ++i) {
                        const double* grow = g + i * dout;
                        double* dxrow = dx + i * din;
                        for (int64_t k = 0; k < din; ++k) {
                            const double* wrow = wi->data.data() + k * dout;
                            double acc = 0.0;
                            for (int64_t j = 0; j < dout; ++j) acc += grow[j] * wrow[j];
                            dxrow[k] += acc;
                        }
                    }
                });
            }
            if (gw) {
                Tensor::ensure_grad(wi.get());
                double* dw = wi->grad.data();
                parallel_chunks(din, [&](int64_t k0, int64_t k1) {
                    for (int64_t k = k0; k < k1; ++k) {
                        double* dwrow = dw + k * dout;
                        for (int64_t i = 0; i < rows; ++i) {
                            const double xv = xi->data[i * din + k];
                            const double* grow = g + i * dout;
                            for (int64_t j = 0; j < dout; ++j) dwrow[j] += xv * grow[j];
                        }
                    }
                });
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t i = 0; i < rows; ++i) {
                    const double* grow = g + i * dout;
                    for (int64_t j = 0; j < dout; ++j) bi->grad[j] += grow[j];
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frame-rate -> sample-rate linear interpolation, endpoints clamped.
// Sample t maps to frame coordinate t*(B-1)/(T-1).
// ---------------------------------------------------------------------------

inline Tensor interp_linear(const Tensor& frames, int64_t t_out) {
    SINGVOC_CHECK_SHAPE(frames.rank() == 2, "interp_linear expects [B,D], got ",
                        shape_str(frames.shape()));
    const int64_t b_in = frames.dim(0), d = frames.dim(1);
    SINGVOC_CHECK_VALUE(b_in >= 2, "interp_linear: need at least 2 frames, got ", b_in);
    SINGVOC_CHECK_VALUE(t_out >= 2, "interp_linear: need at least 2 samples, got ", t_out);
    Tensor out = Tensor::zeros({t_out, d});
    const double scale = static_cast<double>(b_in - 1) / static_cast<double>(t_out - 1);
    const double* pf = frames.data();
    double* po = out.data();
    detail::maybe_parallel(t_out, [&](int64_t t) {
        const double pos = static_cast<double>(t) * scale;
        int64_t i = static_cast<int64_t>(pos);
        if (i >= b_in - 1) i = b_in - 2;
        const double wgt = pos - static_cast<double>(i);
        const double* f0 = pf + i * d;
        const double* f1 = f0 + d;
        double* orow = po + t * d;
        for (int64_t j = 0; j < d; ++j) orow[j] = (1.0 - wgt) * f0[j] + wgt * f1[j];
    });
    if (detail::recording({&frames})) {
        out.set_requires_grad(true);
        auto fi = frames.impl(), oi = out.impl();
        GradTape::current()->record([fi, oi, b_in, d, t_out, scale] {
            if (oi->grad.empty()) return;
            Tensor::ensure_grad(fi.get());
            for (int64_t t = 0; t < t_out; ++t) {
                const double pos = static_cast<double>(t) * scale;
                int64_t i = static_cast<int64_t>(pos);
                if (i >= b_in - 1) i = b_in - 2;
                const double wgt = pos - static_cast<double>(i);
                const double* grow = oi->grad.data() + t * d;
                double* g0 = fi->grad.data() + i * d;
                for (int64_t j = 0; j < d; ++j) {
                    g0[j] += (1.0 - wgt) * grow[j];
                    g0[d + j] += wgt * grow[j];
                }
            }
        });
    }
    return out;
}

} // namespace ops
} // namespace singvoc
