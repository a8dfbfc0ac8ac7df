#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singvoc/ops.hpp"

namespace singvoc {
namespace ops {

namespace detail {

// out[B,H] += x[B,D] @ w[D,H]
inline void matmul_acc(const double* x, const double* w, double* out, int64_t b,
                       int64_t d, int64_t h) {
    parallel_chunks(b, [&](int64_t r0, int64_t r1) {
        for (int64_t i = r0; i < r1; ++i) {
            const double* xrow = x + i * d;
            double* orow = out + i * h;
            for (int64_t k = 0; k < d; ++k) {
                const double xv = xrow[k];
                if (xv == 0.0) continue;
                const double* wrow = w + k * h;
                for (int64_t j = 0; j < h; ++j) orow[j] += xv * wrow[j];
            }
        }
    });
}

inline void matvec_acc(const double* x, const double* w, double* out, int64_t d,
                       int64_t h) {
    for (int64_t k = 0; k < d; ++k) {
        const double xv = x[k];
        if (xv == 0.0) continue;
        const double* wrow = w + k * h;
        for (int64_t j = 0; j < h; ++j) out[j] += xv * wrow[j];
    }
}

// out[D] += g[H] . w[D,H] rows
inline void matvec_t_acc(const double* g, const double* w, double* out, int64_t d,
                         int64_t h) {
    for (int64_t k = 0; k < d; ++k) {
        const double* wrow = w + k * h;
        double acc = 0.0;
        for (int64_t j = 0; j < h; ++j) acc += g[j] * wrow[j];
        out[k] += acc;
    }
}

// w_grad[D,H] += x[D] outer g[H]
inline void outer_acc(const double* x, const double* g, double* wg, int64_t d,
                      int64_t h) {
    for (int64_t k = 0; k < d; ++k) {
        const double xv = x[k];
        if (xv == 0.0) continue;
        double* wrow = wg + k * h;
        for (int64_t j = 0; j < h; ++j) wrow[j] += xv * g[j];
    }
}

} // namespace detail

// GRU over B steps:
//   r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
//   z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
//   n_t = tanh(x_t Wn + r_t .* (h_{t-1} Un) + bn)
//   h_t = (1 - z_t) .* n_t + z_t .* h_{t-1}
// Returns all hidden states [B,H].
inline Tensor gru_forward(const Tensor& x, const Tensor& h0, const Tensor& wr,
                          const Tensor& wz, const Tensor& wn, const Tensor& ur,
                          const Tensor& uz, const Tensor& un, const Tensor& br,
                          const Tensor& bz, const Tensor& bn) {
    SINGVOC_CHECK_SHAPE(x.rank() == 2 && h0.rank() == 1, "gru: expected x[B,D], h0[H]");
    const int64_t b = x.dim(0), d = x.dim(1), h = h0.dim(0);
    SINGVOC_CHECK_SHAPE(wr.shape() == std::vector<int64_t>({d, h}) && wz.shape() == wr.shape() &&
                            wn.shape() == wr.shape(),
                        "gru: input weights must be [", d, ",", h, "]");
    SINGVOC_CHECK_SHAPE(ur.shape() == std::vector<int64_t>({h, h}) && uz.shape() == ur.shape() &&
                            un.shape() == ur.shape(),
                        "gru: recurrent weights must be [", h, ",", h, "]");
    SINGVOC_CHECK_SHAPE(br.shape() == std::vector<int64_t>({h}) && bz.shape() == br.shape() &&
                            bn.shape() == br.shape(),
                        "gru: biases must be [", h, "]");

    // Input projections for all steps at once.
    std::vector<double> xr(static_cast<size_t>(b * h)), xz(static_cast<size_t>(b * h)),
        xn(static_cast<size_t>(b * h));
    for (int64_t i = 0; i < b; ++i) {
        std::copy(br.data(), br.data() + h, xr.data() + i * h);
        std::copy(bz.data(), bz.data() + h, xz.data() + i * h);
        std::copy(bn.data(), bn.data() + h, xn.data() + i * h);
    }
    detail::matmul_acc(x.data(), wr.data(), xr.data(), b, d, h);
    detail::matmul_acc(x.data(), wz.data(), xz.data(), b, d, h);
    detail::matmul_acc(x.data(), wn.data(), xn.data(), b, d, h);

    // Saved activations for BPTT.
    auto rs = std::make_shared<std::vector<double>>(static_cast<size_t>(b * h));
    auto zs = std::make_shared<std::vector<double>>(static_cast<size_t>(b * h));
    auto ns = std::make_shared<std::vector<double>>(static_cast<size_t>(b * h));
    auto ms = std::make_shared<std::vector<double>>(static_cast<size_t>(b * h));  // h_{t-1} Un

    Tensor out = Tensor::zeros({b, h});
    std::vector<double> hprev(h0.data(), h0.data() + h);
    std::vector<double> mbuf(static_cast<size_t>(h));
    for (int64_t t = 0; t < b; ++t) {
        double* r = rs->data() + t * h;
        double* z = zs->data() + t * h;
        double* n = ns->data() + t * h;
        double* m = ms->data() + t * h;
        std::copy(xr.data() + t * h, xr.data() + (t + 1) * h, r);
        std::copy(xz.data() + t * h, xz.data() + (t + 1) * h, z);
        detail::matvec_acc(hprev.data(), ur.data(), r, h, h);
        detail::matvec_acc(hprev.data(), uz.data(), z, h, h);
        std::fill(m, m + h, 0.0);
        detail::matvec_acc(hprev.data(), un.data(), m, h, h);
        double* hrow = out.data() + t * h;
        for (int64_t j = 0; j < h; ++j) {
            r[j] = 1.0 / (1.0 + std::exp(-r[j]));
            z[j] = 1.0 / (1.0 + std::exp(-z[j]));
            n[j] = std::tanh(xn[static_cast<size_t>(t * h + j)] + r[j] * m[j]);
            hrow[j] = (1.0 - z[j]) * n[j] + z[j] * hprev[j];
        }
        std::copy(hrow, hrow + h, hprev.data());
    }

    const Tensor* ins[] = {&x, &h0, &wr, &wz, &wn, &ur, &uz, &un, &br, &bz, &bn};
    bool rec = GradTape::current() != nullptr;
    if (rec) {
        bool any = false;
        for (const Tensor* t : ins) any = any || t->requires_grad();
        rec = any;
    }
    if (rec) {
        out.set_requires_grad(true);
        auto xi = x.impl(), h0i = h0.impl(), oi = out.impl();
        auto wri = wr.impl(), wzi = wz.impl(), wni = wn.impl();
        auto uri = ur.impl(), uzi = uz.impl(), uni = un.impl();
        auto bri = br.impl(), bzi = bz.impl(), bni = bn.impl();
        GradTape::current()->record([=] {
            if (oi->grad.empty()) return;
            const bool gx = xi->requires_grad;
            const bool gw = wri->requires_grad || wzi->requires_grad || wni->requires_grad ||
                            uri->requires_grad || uzi->requires_grad || uni->requires_grad ||
                            bri->requires_grad || bzi->requires_grad || bni->requires_grad;
            if (gx) Tensor::ensure_grad(xi.get());
            if (gw) {
                for (TensorImpl* p : {wri.get(), wzi.get(), wni.get(), uri.get(), uzi.get(),
                                      uni.get(), bri.get(), bzi.get(), bni.get()}) {
                    Tensor::ensure_grad(p);
                }
            }
            std::vector<double> carry(static_cast<size_t>(h), 0.0);
            std::vector<double> dh(static_cast<size_t>(h)), dr(static_cast<size_t>(h)),
                dz(static_cast<size_t>(h)), dan(static_cast<size_t>(h)),
                dm(static_cast<size_t>(h));
            for (int64_t t = b - 1; t >= 0; --t) {
                const double* r = rs->data() + t * h;
                const double* z = zs->data() + t * h;
                const double* n = ns->data() + t * h;
                const double* m = ms->data() + t * h;
                const double* hp = t == 0 ? h0i->data.data() : oi->data.data() + (t - 1) * h;
                for (int64_t j = 0; j < h; ++j) {
                    dh[j] = oi->grad[t * h + j] + carry[j];
                    const double dzv = dh[j] * (hp[j] - n[j]) * z[j] * (1.0 - z[j]);
                    const double danv = dh[j] * (1.0 - z[j]) * (1.0 - n[j] * n[j]);
                    dz[j] = dzv;
                    dan[j] = danv;
                    dr[j] = danv * m[j] * r[j] * (1.0 - r[j]);
                    dm[j] = danv * r[j];
                    carry[j] = dh[j] * z[j];
                }
                detail::matvec_t_acc(dr.data(), uri->data.data(), carry.data(), h, h);
                detail::matvec_t_acc(dz.data(), uzi->data.data(), carry.data(), h, h);
                detail::matvec_t_acc(dm.data(), uni->data.data(), carry.data(), h, h);
                if (gx) {
                    double* dxrow = xi->grad.data() + t * d;
                    detail::matvec_t_acc(dr.data(), wri->data.data(), dxrow, d, h);
                    detail::matvec_t_acc(dz.data(), wzi->data.data(), dxrow, d, h);
                    detail::matvec_t_acc(dan.data(), wni->data.data(), dxrow, d, h);
                }
                if (gw) {
                    const double* xrow = xi->data.data() + t * d;
                    detail::outer_acc(xrow, dr.data(), wri->grad.data(), d, h);
                    detail::outer_acc(xrow, dz.data(), wzi->grad.data(), d, h);
                    detail::outer_acc(xrow, dan.data(), wni->grad.data(), d, h);
                    detail::outer_acc(hp, dr.data(), uri->grad.data(), h, h);
                    detail::outer_acc(hp, dz.data(), uzi->grad.data(), h, h);
                    detail::outer_acc(hp, dm.data(), uni->grad.data(), h, h);
                    for (int64_t j = 0; j < h; ++j) {
                        bri->grad[j] += dr[j];
                        bzi->grad[j] += dz[j];
                        bni->grad[j] += dan[j];
                    }
                }
            }
            if (h0i->requires_grad) {
                Tensor::ensure_grad(h0i.get());
                for (int64_t j = 0; j < h; ++j) h0i->grad[j] += carry[j];
            }
        });
    }
    return out;
}

} // namespace ops
} // namespace singvoc
