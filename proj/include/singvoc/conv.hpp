#pragma once

#include <algorithm>
#include <cstdint>

#include "singvoc/ops.hpp"

namespace singvoc {
namespace ops {

// Cross-correlation convention throughout (no kernel flip), matching
// mainstream deep-learning semantics.

inline int64_t conv1d_out_len(int64_t len, int64_t k, int64_t stride, int64_t dilation,
                              int64_t padding) {
    return (len + 2 * padding - dilation * (k - 1) - 1) / stride + 1;
}

// x[Cin,L] * w[Cout,Cin,K] + b[Cout] -> [Cout,Lout]
inline Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b,
                     int64_t stride = 1, int64_t dilation = 1, int64_t padding = 0) {
    SINGVOC_CHECK_SHAPE(x.rank() == 2 && w.rank() == 3,
                        "conv1d: expected x[Cin,L], w[Cout,Cin,K], got ",
                        shape_str(x.shape()), " ", shape_str(w.shape()));
    SINGVOC_CHECK_VALUE(stride >= 1 && dilation >= 1 && padding >= 0,
                        "conv1d: stride/dilation must be >= 1, padding >= 0");
    const int64_t cin = x.dim(0), len = x.dim(1);
    const int64_t cout = w.dim(0), k = w.dim(2);
    SINGVOC_CHECK_VALUE(k >= 1, "conv1d: kernel size must be >= 1");
    SINGVOC_CHECK_SHAPE(w.dim(1) == cin, "conv1d: channel mismatch, x ",
                        shape_str(x.shape()), " vs w ", shape_str(w.shape()));
    SINGVOC_CHECK_SHAPE(b.rank() == 1 && b.dim(0) == cout, "conv1d: bias ",
                        shape_str(b.shape()), " must be [", cout, "]");
    const int64_t lout = conv1d_out_len(len, k, stride, dilation, padding);
    SINGVOC_CHECK_VALUE(lout >= 1, "conv1d: input too short (L=", len, ", K=", k,
                        ", stride=", stride, ", dilation=", dilation, ", pad=", padding,
                        " gives empty output)");
    Tensor out = Tensor::zeros({cout, lout});
    {
        const double* px = x.data();
        const double* pw = w.data();
        const double* pb = b.data();
        double* po = out.data();
        parallel_chunks(cout, [&](int64_t c0, int64_t c1) {
            for (int64_t co = c0; co < c1; ++co) {
                double* orow = po + co * lout;
                std::fill(orow, orow + lout, pb[co]);
                for (int64_t ci = 0; ci < cin; ++ci) {
                    const double* xrow = px + ci * len;
                    const double* wrow = pw + (co * cin + ci) * k;
                    for (int64_t kk = 0; kk < k; ++kk) {
                        const double wv = wrow[kk];
                        if (wv == 0.0) continue;
                        const int64_t j0 = kk * dilation - padding;
                        // valid t: 0 <= j0 + t*stride < len
                        int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                        int64_t t_hi = (len - 1 - j0) >= 0
                                           ? (len - 1 - j0) / stride + 1
                                           : 0;
                        t_hi = std::min(t_hi, lout);
                        const double* xp = xrow + j0 + t_lo * stride;
                        for (int64_t t = t_lo; t < t_hi; ++t, xp += stride) {
                            orow[t] += wv * (*xp);
                        }
                    }
                }
            }
        });
    }
    if (detail::recording({&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = out.impl();
        const bool gx = x.requires_grad(), gw = w.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([=] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (gx) {
                Tensor::ensure_grad(xi.get());
                parallel_chunks(cin, [&](int64_t i0, int64_t i1) {
                    for (int64_t ci = i0; ci < i1; ++ci) {
                        double* dxrow = xi->grad.data() + ci * len;
                        for (int64_t co = 0; co < cout; ++co) {
                            const double* grow = g + co * lout;
                            const double* wrow = wi->data.data() + (co * cin + ci) * k;
                            for (int64_t kk = 0; kk < k; ++kk) {
                                const double wv = wrow[kk];
                                if (wv == 0.0) continue;
                                const int64_t j0 = kk * dilation - padding;
                                int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                                int64_t t_hi = (len - 1 - j0) >= 0
                                                   ? (len - 1 - j0) / stride + 1
                                                   : 0;
                                t_hi = std::min(t_hi, lout);
                                double* dxp = dxrow + j0 + t_lo * stride;
                                for (int64_t t = t_lo; t < t_hi; ++t, dxp += stride) {
                                    *dxp += wv * grow[t];
                                }
                            }
                        }
                    }
                });
            }
            if (gw) {
                Tensor::ensure_grad(wi.get());
                parallel_chunks(cout, [&](int64_t c0, int64_t c1) {
                    for (int64_t co = c0; co < c1; ++co) {
                        const double* grow = g + co * lout;
                        for (int64_t ci = 0; ci < cin; ++ci) {
                            const double* xrow = xi->data.data() + ci * len;
                            double* dwrow = wi->grad.data() + (co * cin + ci) * k;
                            for (int64_t kk = 0; kk < k; ++kk) {
                                const int64_t j0 = kk * dilation - padding;
                                int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                                int64_t t_hi = (len - 1 - j0) >= 0
                                                   ? (len - 1 - j0) / stride + 1
                                                   : 0;
                                t_hi = std::min(t_hi, lout);
                                const double* xp = xrow + j0 + t_lo * stride;
                                double acc = 0.0;
                                for (int64_t t = t_lo; t < t_hi; ++t, xp += stride) {
                                    acc += grow[t] * (*xp);
                                }
                                dwrow[kk] += acc;
                            }
                        }
                    }
                });
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t co = 0; co < cout; ++co) {
                    const double* grow = g + co * lout;
                    double acc = 0.0;
                    for (int64_t t = 0; t < lout; ++t) acc += grow[t];
                    bi->grad[co] += acc;
                }
            }
        });
    }
    return out;
}

inline int64_t conv_transpose1d_out_len(int64_t len, int64_t k, int64_t stride,
                                        int64_t padding) {
    return (len - 1) * stride + k - 2 * padding;
}

// x[Cin,L] * w[Cin,Cout,K] + b[Cout] -> [Cout,(L-1)*stride+K-2*padding].
// With padding=0 this is the exact adjoint of conv1d(stride) with the same
// kernel tensor (layout [Cin=co_of_conv, Cout=ci_of_conv, K]).
inline Tensor conv_transpose1d(const Tensor& x, const Tensor& w, const Tensor& b,
                               int64_t stride = 1, int64_t padding = 0) {
    SINGVOC_CHECK_SHAPE(x.rank() == 2 && w.rank() == 3,
                        "conv_transpose1d: expected x[Cin,L], w[Cin,Cout,K], got ",
                        shape_str(x.shape()), " ", shape_str(w.shape()));
    SINGVOC_CHECK_VALUE(stride >= 1 && padding >= 0,
                        "conv_transpose1d: stride must be >= 1, padding >= 0");
    const int64_t cin = x.dim(0), len = x.dim(1);
    SINGVOC_CHECK_VALUE(len >= 1, "conv_transpose1d: empty input");
    SINGVOC_CHECK_SHAPE(w.dim(0) == cin, "conv_transpose1d: channel mismatch, x ",
                        shape_str(x.shape()), " vs w ", shape_str(w.shape()));
    const int64_t cout = w.dim(1), k = w.dim(2);
    SINGVOC_CHECK_SHAPE(b.rank() == 1 && b.dim(0) == cout, "conv_transpose1d: bias ",
                        shape_str(b.shape()), " must be [", cout, "]");
    const int64_t lout = conv_transpose1d_out_len(len, k, stride, padding);
    SINGVOC_CHECK_VALUE(lout >= 1, "conv_transpose1d: output empty (L=", len, ", K=", k,
                        ", stride=", stride, ", pad=", padding, ")");
    Tensor out = Tensor::zeros({cout, lout});
    {
        const double* px = x.data();
        const double* pw = w.data();
        const double* pb = b.data();
        double* po = out.data();
        parallel_chunks(cout, [&](int64_t c0, int64_t c1) {
            for (int64_t co = c0; co < c1; ++co) {
                double* orow = po + co * lout;
                std::fill(orow, orow + lout, pb[co]);
                for (int64_t ci = 0; ci < cin; ++ci) {
                    const double* xrow = px + ci * len;
                    const double* wrow = pw + (ci * cout + co) * k;
                    for (int64_t kk = 0; kk < k; ++kk) {
                        const double wv = wrow[kk];
                        if (wv == 0.0) continue;
                        const int64_t j0 = kk - padding;
                        // out index j0 + t*stride must be in [0, lout)
                        int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                        int64_t t_hi = (lout - 1 - j0) >= 0
                                           ? (lout - 1 - j0) / stride + 1
                                           : 0;
                        t_hi = std::min(t_hi, len);
                        double* op = orow + j0 + t_lo * stride;
                        for (int64_t t = t_lo; t < t_hi; ++t, op += stride) {
                            *op += wv * xrow[t];
                        }
                    }
                }
            }
        });
    }
    if (detail::recording({&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = out.impl();
        const bool gx = x.requires_grad(), gw = w.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([=] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (gx) {
                Tensor::ensure_grad(xi.get());
                parallel_chunks(cin, [&](int64_t i0, int64_t i1) {
                    for (int64_t ci = i0; ci < i1; ++ci) {
                        double* dxrow = xi->grad.data() + ci * len;
                        for (int64_t co = 0; co < cout; ++co) {
                            const double* grow = g + co * lout;
                            const double* wrow = wi->data.data() + (ci * cout + co) * k;
                            for (int64_t kk = 0; kk < k; ++kk) {
                                const double wv = wrow[kk];
                                if (wv == 0.0) continue;
                                const int64_t j0 = kk - padding;
                                int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                                int64_t t_hi = (lout - 1 - j0) >= 0
                                                   ? (lout - 1 - j0) / stride + 1
                                                   : 0;
                                t_hi = std::min(t_hi, len);
                                const double* gp = grow + j0 + t_lo * stride;
                                for (int64_t t = t_lo; t < t_hi; ++t, gp += stride) {
                                    dxrow[t] += wv * (*gp);
                                }
                            }
                        }
                    }
                });
            }
            if (gw) {
                Tensor::ensure_grad(wi.get());
                parallel_chunks(cin, [&](int64_t i0, int64_t i1) {
                    for (int64_t ci = i0; ci < i1; ++ci) {
                        const double* xrow = xi->data.data() + ci * len;
                        for (int64_t co = 0; co < cout; ++co) {
                            const double* grow = g + co * lout;
                            double* dwrow = wi->grad.data() + (ci * cout + co) * k;
                            for (int64_t kk = 0; kk < k; ++kk) {
                                const int64_t j0 = kk - padding;
                                int64_t t_lo = j0 >= 0 ? 0 : (-j0 + stride - 1) / stride;
                                int64_t t_hi = (lout - 1 - j0) >= 0
                                                   ? (lout - 1 - j0) / stride + 1
                                                   : 0;
                                t_hi = std::min(t_hi, len);
                                const double* gp = grow + j0 + t_lo * stride;
                                double acc = 0.0;
                                for (int64_t t = t_lo; t < t_hi; ++t, gp += stride) {
                                    acc += xrow[t] * (*gp);
                                }
                                dwrow[kk] += acc;
                            }
                        }
                    }
                });
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t co = 0; co < cout; ++co) {
                    const double* grow = g + co * lout;
                    double acc = 0.0;
                    for (int64_t t = 0; t < lout; ++t) acc += grow[t];
                    bi->grad[co] += acc;
                }
            }
        });
    }
    return out;
}

// x[Cin,H,W] * w[Cout,Cin,Kh,Kw] + b[Cout] -> [Cout,Hout,Wout]
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
                     int64_t stride_h = 1, int64_t stride_w = 1,
                     int64_t pad_h = 0, int64_t pad_w = 0) {
    SINGVOC_CHECK_SHAPE(x.rank() == 3 && w.rank() == 4,
                        "conv2d: expected x[Cin,H,W], w[Cout,Cin,Kh,Kw], got ",
                        shape_str(x.shape()), " ", shape_str(w.shape()));
    SINGVOC_CHECK_VALUE(stride_h >= 1 && stride_w >= 1 && pad_h >= 0 && pad_w >= 0,
                        "conv2d: bad stride/padding");
    const int64_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int64_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    SINGVOC_CHECK_SHAPE(w.dim(1) == cin, "conv2d: channel mismatch, x ",
                        shape_str(x.shape()), " vs w ", shape_str(w.shape()));
    SINGVOC_CHECK_SHAPE(b.rank() == 1 && b.dim(0) == cout, "conv2d: bias ",
                        shape_str(b.shape()), " must be [", cout, "]");
    const int64_t hout = (h + 2 * pad_h - (kh - 1) - 1) / stride_h + 1;
    const int64_t wout = (wd + 2 * pad_w - (kw - 1) - 1) / stride_w + 1;
    SINGVOC_CHECK_VALUE(hout >= 1 && wout >= 1, "conv2d: input ", shape_str(x.shape()),
                        " too small for kernel ", shape_str(w.shape()));
    Tensor out = Tensor::zeros({cout, hout, wout});
    {
        const double* px = x.data();
        const double* pw = w.data();
        const double* pb = b.data();
        double* po = out.data();
        parallel_chunks(cout, [&](int64_t c0, int64_t c1) {
            for (int64_t co = c0; co < c1; ++co) {
                double* oplane = po + co * hout * wout;
                std::fill(oplane, oplane + hout * wout, pb[co]);
                for (int64_t ci = 0; ci < cin; ++ci) {
                    const double* xplane = px + ci * h * wd;
                    const double* wk = pw + ((co * cin + ci) * kh) * kw;
                    for (int64_t r = 0; r < hout; ++r) {
                        double* orow = oplane + r * wout;
                        for (int64_t ki = 0; ki < kh; ++ki) {
                            const int64_t xr = r * stride_h - pad_h + ki;
                            if (xr < 0 || xr >= h) continue;
                            const double* xrow = xplane + xr * wd;
                            const double* wrow = wk + ki * kw;
                            for (int64_t kj = 0; kj < kw; ++kj) {
                                const double wv = wrow[kj];
                                if (wv == 0.0) continue;
                                const int64_t j0 = kj - pad_w;
                                int64_t c_lo =
                                    j0 >= 0 ? 0 : (-j0 + stride_w - 1) / stride_w;
                                int64_t c_hi = (wd - 1 - j0) >= 0
                                                   ? (wd - 1 - j0) / stride_w + 1
                                                   : 0;
                                c_hi = std::min(c_hi, wout);
                                const double* xp = xrow + j0 + c_lo * stride_w;
                                for (int64_t c = c_lo; c < c_hi; ++c, xp += stride_w) {
                                    orow[c] += wv * (*xp);
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    if (detail::recording({&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), wi = w.impl(), bi = b.impl(), oi = out.impl();
        const bool gx = x.requires_grad(), gw = w.requires_grad(), gb = b.requires_grad();
        GradTape::current()->record([=] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (gx) {
                Tensor::ensure_grad(xi.get());
                parallel_chunks(cin, [&](int64_t i0, int64_t i1) {
                    for (int64_t ci = i0; ci < i1; ++ci) {
                        double* dxplane = xi->grad.data() + ci * h * wd;
                        for (int64_t co = 0; co < cout; ++co) {
                            const double* gplane = g + co * hout * wout;
                            const double* wk = wi->data.data() + ((co * cin + ci) * kh) * kw;
                            for (int64_t r = 0; r < hout; ++r) {
                                const double* grow = gplane + r * wout;
                                for (int64_t ki = 0; ki < kh; ++ki) {
                                    const int64_t xr = r * stride_h - pad_h + ki;
                                    if (xr < 0 || xr >= h) continue;
                                    double* dxrow = dxplane + xr * wd;
                                    const double* wrow = wk + ki * kw;
                                    for (int64_t kj = 0; kj < kw; ++kj) {
                                        const double wv = wrow[kj];
                                        if (wv == 0.0) continue;
                                        const int64_t j0 = kj - pad_w;
                                        int64_t c_lo = j0 >= 0
                                                           ? 0
                                                           : (-j0 + stride_w - 1) / stride_w;
                                        int64_t c_hi = (wd - 1 - j0) >= 0
                                                           ? (wd - 1 - j0) / stride_w + 1
                                                           : 0;
                                        c_hi = std::min(c_hi, wout);
                                        double* dxp = dxrow + j0 + c_lo * stride_w;
                                        for (int64_t c = c_lo; c < c_hi;
                                             ++c, dxp += stride_w) {
                                            *dxp += wv * grow[c];
                                        }
                                    }
                                }
                            }
                        }
                    }
                });
            }
            if (gw) {
                Tensor::ensure_grad(wi.get());
                parallel_chunks(cout, [&](int64_t c0, int64_t c1) {
                    for (int64_t co = c0; co < c1; ++co) {
                        const double* gplane = g + co * hout * wout;
                        for (int64_t ci = 0; ci < cin; ++ci) {
                            const double* xplane = xi->data.data() + ci * h * wd;
                            double* dwk = wi->grad.data() + ((co * cin + ci) * kh) * kw;
                            for (int64_t ki = 0; ki < kh; ++ki) {
                                for (int64_t kj = 0; kj < kw; ++kj) {
                                    const int64_t j0 = kj - pad_w;
                                    double acc = 0.0;
                                    for (int64_t r = 0; r < hout; ++r) {
                                        const int64_t xr = r * stride_h - pad_h + ki;
                                        if (xr < 0 || xr >= h) continue;
                                        const double* xrow = xplane + xr * wd;
                                        const double* grow = gplane + r * wout;
                                        int64_t c_lo = j0 >= 0
                                                           ? 0
                                                           : (-j0 + stride_w - 1) / stride_w;
                                        int64_t c_hi = (wd - 1 - j0) >= 0
                                                           ? (wd - 1 - j0) / stride_w + 1
                                                           : 0;
                                        c_hi = std::min(c_hi, wout);
                                        const double* xp = xrow + j0 + c_lo * stride_w;
                                        for (int64_t c = c_lo; c < c_hi;
                                             ++c, xp += stride_w) {
                                            acc += grow[c] * (*xp);
                                        }
                                    }
                                    dwk[ki * kw + kj] += acc;
                                }
                            }
                        }
                    }
                });
            }
            if (gb) {
                Tensor::ensure_grad(bi.get());
                for (int64_t co = 0; co < cout; ++co) {
                    const double* gplane = g + co * hout * wout;
                    double acc = 0.0;
                    for (int64_t i = 0; i < hout * wout; ++i) acc += gplane[i];
                    bi->grad[co] += acc;
                }
            }
        });
    }
    return out;
}

} // namespace ops
} // namespace singvoc
