// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/tape.h"

#include "core/common.h"
#include "core/fft.h"
#include "core/kernels.h"

#include <cmath>

namespace ts3 {

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

TapeNode * Tape::make(Tensor value, bool needs_grad) {
    nodes_.emplace_back();
    TapeNode & n = nodes_.back();
    n.value      = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) {
        n.grad = Tensor::zeros(n.value.shape);
    }
    return &n;
}

void Tape::acc(TapeNode * n, const double * g, size_t count) {
    n->touched = true;
    double * dst = n->grad.ptr();
    for (size_t i = 0; i < count; ++i) {
        dst[i] += g[i];
    }
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    return Var(this, make(std::move(value), requires_grad));
}

Var Tape::param(Parameter & p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) {
        return Var(this, it->second);
    }
    TapeNode * n = make(p.value, true);
    n->param     = &p;
    param_nodes_[&p] = n;
    return Var(this, n);
}

Var Tape::constant(Tensor value) {
    return Var(this, make(std::move(value), false));
}

Var Tape::constant_fill(const std::vector<int64_t> & shape, double fill) {
    Tensor t(shape);
    t.fill(fill);
    return constant(std::move(t));
}

Var Tape::add(Var a, Var b) {
    check(a.val().same_shape(b.val()), ErrCode::invalid_arg, "add: shape mismatch");
    Tensor       y = a.val();
    const size_t n = y.data.size();
    for (size_t i = 0; i < n; ++i) {
        y.data[i] += b.val().data[i];
    }
    const bool needs = a.node()->needs_grad || b.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *an = a.node(), *bn = b.node();
        out->backward = [out, an, bn, n]() {
            if (an->needs_grad) {
                acc(an, out->grad.ptr(), n);
            }
            if (bn->needs_grad) {
                acc(bn, out->grad.ptr(), n);
            }
        };
    }
    return Var(this, out);
}

Var Tape::sub(Var a, Var b) {
    check(a.val().same_shape(b.val()), ErrCode::invalid_arg, "sub: shape mismatch");
    Tensor       y = a.val();
    const size_t n = y.data.size();
    for (size_t i = 0; i < n; ++i) {
        y.data[i] -= b.val().data[i];
    }
    const bool needs = a.node()->needs_grad || b.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *an = a.node(), *bn = b.node();
        out->backward = [out, an, bn, n]() {
            if (an->needs_grad) {
                acc(an, out->grad.ptr(), n);
            }
            if (bn->needs_grad) {
                bn->touched = true;
                double * dst = bn->grad.ptr();
                const double * g = out->grad.ptr();
                for (size_t i = 0; i < n; ++i) {
                    dst[i] -= g[i];
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::mul(Var a, Var b) {
    check(a.val().same_shape(b.val()), ErrCode::invalid_arg, "mul: shape mismatch");
    Tensor       y = a.val();
    const size_t n = y.data.size();
    for (size_t i = 0; i < n; ++i) {
        y.data[i] *= b.val().data[i];
    }
    const bool needs = a.node()->needs_grad || b.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *an = a.node(), *bn = b.node();
        out->backward = [out, an, bn, n]() {
            const double * g = out->grad.ptr();
            if (an->needs_grad) {
                an->touched = true;
                double *       da = an->grad.ptr();
                const double * bv = bn->value.ptr();
                for (size_t i = 0; i < n; ++i) {
                    da[i] += g[i] * bv[i];
                }
            }
            if (bn->needs_grad) {
                bn->touched = true;
                double *       db = bn->grad.ptr();
                const double * av = an->value.ptr();
                for (size_t i = 0; i < n; ++i) {
                    db[i] += g[i] * av[i];
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::scale(Var a, double s) {
    Tensor y = a.val();
    for (double & v : y.data) {
        v *= s;
    }
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, s, n]() {
            an->touched = true;
            double *       da = an->grad.ptr();
            const double * g  = out->grad.ptr();
            for (size_t i = 0; i < n; ++i) {
                da[i] += s * g[i];
            }
        };
    }
    return Var(this, out);
}

Var Tape::add_scalar(Var a, double s) {
    Tensor y = a.val();
    for (double & v : y.data) {
        v += s;
    }
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, n]() { acc(an, out->grad.ptr(), n); };
    }
    return Var(this, out);
}

Var Tape::mean_all(Var a) {
    const size_t n    = a.val().data.size();
    const double mean = kern::sum(a.val().ptr(), n) / static_cast<double>(n);
    const bool   needs = a.node()->needs_grad;
    TapeNode *   out   = make(Tensor::scalar(mean), needs);
    if (needs) {
        TapeNode * an = a.node();
        out->backward = [out, an, n]() {
            an->touched    = true;
            const double g = out->grad.at(0) / static_cast<double>(n);
            double * da    = an->grad.ptr();
            for (size_t i = 0; i < n; ++i) {
                da[i] += g;
            }
        };
    }
    return Var(this, out);
}

Var Tape::l1_loss(Var a, Var b) {
    check(a.val().same_shape(b.val()), ErrCode::invalid_arg, "l1_loss: shape mismatch");
    const size_t n   = a.val().data.size();
    double       sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sum += std::abs(a.val().data[i] - b.val().data[i]);
    }
    const bool needs = a.node()->needs_grad || b.node()->needs_grad;
    TapeNode * out   = make(Tensor::scalar(sum / static_cast<double>(n)), needs);
    if (needs) {
        TapeNode *an = a.node(), *bn = b.node();
        out->backward = [out, an, bn, n]() {
            const double g = out->grad.at(0) / static_cast<double>(n);
            for (size_t i = 0; i < n; ++i) {
                const double d = an->value.data[i] - bn->value.data[i];
                const double s = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
                if (an->needs_grad) {
                    an->touched = true;
                    an->grad.data[i] += s;
                }
                if (bn->needs_grad) {
                    bn->touched = true;
                    bn->grad.data[i] -= s;
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::mse_loss(Var a, Var b) {
    check(a.val().same_shape(b.val()), ErrCode::invalid_arg, "mse_loss: shape mismatch");
    const size_t n = a.val().data.size();
    const double sum = kern::sq_dist(a.val().ptr(), b.val().ptr(), n);
    const bool needs = a.node()->needs_grad || b.node()->needs_grad;
    TapeNode * out   = make(Tensor::scalar(sum / static_cast<double>(n)), needs);
    if (needs) {
        TapeNode *an = a.node(), *bn = b.node();
        out->backward = [out, an, bn, n]() {
            const double g = 2.0 * out->grad.at(0) / static_cast<double>(n);
            for (size_t i = 0; i < n; ++i) {
                const double d = g * (an->value.data[i] - bn->value.data[i]);
                if (an->needs_grad) {
                    an->touched = true;
                    an->grad.data[i] += d;
                }
                if (bn->needs_grad) {
                    bn->touched = true;
                    bn->grad.data[i] -= d;
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::log_shift(Var a, double eps) {
    Tensor y = a.val();
    for (double & v : y.data) {
        check(eps + v > 0.0, ErrCode::runtime, "log_shift: nonpositive argument");
        v = std::log(eps + v);
    }
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, eps, n]() {
            an->touched = true;
            for (size_t i = 0; i < n; ++i) {
                an->grad.data[i] += out->grad.data[i] / (eps + an->value.data[i]);
            }
        };
    }
    return Var(this, out);
}

Var Tape::silu(Var a) {
    Tensor y = a.val();
    for (double & v : y.data) {
        v = v * sigmoid(v);
    }
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, n]() {
            an->touched = true;
            for (size_t i = 0; i < n; ++i) {
                const double x = an->value.data[i];
                const double s = sigmoid(x);
                an->grad.data[i] += out->grad.data[i] * s * (1.0 + x * (1.0 - s));
            }
        };
    }
    return Var(this, out);
}

Var Tape::leaky_relu(Var a, double slope) {
    Tensor y = a.val();
    for (double & v : y.data) {
        if (v < 0.0) {
            v *= slope;
        }
    }
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, slope, n]() {
            an->touched = true;
            for (size_t i = 0; i < n; ++i) {
                const double m = an->value.data[i] >= 0.0 ? 1.0 : slope;
                an->grad.data[i] += out->grad.data[i] * m;
            }
        };
    }
    return Var(this, out);
}

Var Tape::reshape(Var a, std::vector<int64_t> shape) {
    check(Tensor::count(shape) == a.val().numel(), ErrCode::invalid_arg, "reshape: element count mismatch");
    Tensor y(std::move(shape), a.val().data);
    const bool needs = a.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *   an = a.node();
        const size_t n  = an->value.data.size();
        out->backward   = [out, an, n]() { acc(an, out->grad.ptr(), n); };
    }
    return Var(this, out);
}

Var Tape::linear(Var x, Var w, Var b) {
    check(x.val().ndim() == 2 && w.val().ndim() == 2, ErrCode::invalid_arg, "linear: expects 2-D x and w");
    const int64_t rows = x.val().dim(0);
    const int64_t in   = x.val().dim(1);
    const int64_t outd = w.val().dim(0);
    check(w.val().dim(1) == in, ErrCode::invalid_arg, "linear: w columns != x features");
    const bool has_bias = b.defined();
    if (has_bias) {
        check(b.val().numel() == outd, ErrCode::invalid_arg, "linear: bias size mismatch");
    }

    Tensor y({rows, outd});
    for (int64_t r = 0; r < rows; ++r) {
        kern::matvec(w.val().ptr(), x.val().row(r), y.row(r), static_cast<size_t>(outd), static_cast<size_t>(in));
        if (has_bias) {
            for (int64_t o = 0; o < outd; ++o) {
                y.row(r)[o] += b.val().at(o);
            }
        }
    }

    const bool needs = x.node()->needs_grad || w.node()->needs_grad || (has_bias && b.node()->needs_grad);
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * xn = x.node();
        TapeNode * wn = w.node();
        TapeNode * bn = has_bias ? b.node() : nullptr;
        out->backward = [out, xn, wn, bn, rows, in, outd]() {
            for (int64_t r = 0; r < rows; ++r) {
                const double * g = out->grad.row(r);
                if (xn->needs_grad) {
                    xn->touched = true;
                    kern::matvec_t_acc(wn->value.ptr(), g, xn->grad.row(r), static_cast<size_t>(outd),
                                       static_cast<size_t>(in));
                }
                if (wn->needs_grad) {
                    wn->touched = true;
                    for (int64_t o = 0; o < outd; ++o) {
                        kern::axpy(g[o], xn->value.row(r), wn->grad.row(o), static_cast<size_t>(in));
                    }
                }
                if (bn != nullptr && bn->needs_grad) {
                    bn->touched = true;
                    for (int64_t o = 0; o < outd; ++o) {
                        bn->grad.at(o) += g[o];
                    }
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
    check(x.val().ndim() == 2, ErrCode::invalid_arg, "layer_norm: expects 2-D input");
    const int64_t rows = x.val().dim(0);
    const int64_t d    = x.val().dim(1);
    check(gamma.val().numel() == d && beta.val().numel() == d, ErrCode::invalid_arg, "layer_norm: affine size mismatch");

    Tensor              y({rows, d});
    std::vector<double> inv_std(static_cast<size_t>(rows));
    std::vector<double> means(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
        const double * xp = x.val().row(r);
        const double   mu = kern::sum(xp, static_cast<size_t>(d)) / static_cast<double>(d);
        const double   var = kern::sum_sq_dev(xp, static_cast<size_t>(d), mu) / static_cast<double>(d);
        const double   is  = 1.0 / std::sqrt(var + eps);
        means[static_cast<size_t>(r)]   = mu;
        inv_std[static_cast<size_t>(r)] = is;
        double * yp = y.row(r);
        for (int64_t i = 0; i < d; ++i) {
            yp[i] = gamma.val().at(i) * ((xp[i] - mu) * is) + beta.val().at(i);
        }
    }

    const bool needs = x.node()->needs_grad || gamma.node()->needs_grad || beta.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * xn = x.node();
        TapeNode * gn = gamma.node();
        TapeNode * bn = beta.node();
        out->backward = [out, xn, gn, bn, rows, d, means = std::move(means), inv_std = std::move(inv_std)]() {
            std::vector<double> xhat(static_cast<size_t>(d));
            std::vector<double> dxhat(static_cast<size_t>(d));
            for (int64_t r = 0; r < rows; ++r) {
                const double * xp = xn->value.row(r);
                const double * g  = out->grad.row(r);
                const double   mu = means[static_cast<size_t>(r)];
                const double   is = inv_std[static_cast<size_t>(r)];
                for (int64_t i = 0; i < d; ++i) {
                    xhat[static_cast<size_t>(i)] = (xp[i] - mu) * is;
                }
                if (gn->needs_grad) {
                    gn->touched = true;
                    for (int64_t i = 0; i < d; ++i) {
                        gn->grad.at(i) += g[i] * xhat[static_cast<size_t>(i)];
                    }
                }
                if (bn->needs_grad) {
                    bn->touched = true;
                    for (int64_t i = 0; i < d; ++i) {
                        bn->grad.at(i) += g[i];
                    }
                }
                if (xn->needs_grad) {
                    xn->touched = true;
                    for (int64_t i = 0; i < d; ++i) {
                        dxhat[static_cast<size_t>(i)] = g[i] * gn->value.at(i);
                    }
                    const double m1 = kern::sum(dxhat.data(), static_cast<size_t>(d)) / static_cast<double>(d);
                    double       m2 = 0.0;
                    for (int64_t i = 0; i < d; ++i) {
                        m2 += dxhat[static_cast<size_t>(i)] * xhat[static_cast<size_t>(i)];
                    }
                    m2 /= static_cast<double>(d);
                    double * dx = xn->grad.row(r);
                    for (int64_t i = 0; i < d; ++i) {
                        dx[i] += is * (dxhat[static_cast<size_t>(i)] - m1 - xhat[static_cast<size_t>(i)] * m2);
                    }
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::windowed_attention(Var q, Var k, Var v, int64_t n_heads, int64_t window, double rope_base, int64_t pos0) {
    check(q.val().ndim() == 2 && q.val().same_shape(k.val()) && q.val().same_shape(v.val()), ErrCode::invalid_arg,
          "windowed_attention: q, k, v must share a 2-D shape");
    const int64_t n = q.val().dim(0);
    const int64_t d = q.val().dim(1);
    check(n_heads > 0 && d % n_heads == 0, ErrCode::invalid_arg, "windowed_attention: heads must divide model dim");
    check(window > 0, ErrCode::invalid_arg, "windowed_attention: window must be positive");
    const int64_t hd      = d / n_heads;
    const double  qk_norm = 1.0 / std::sqrt(static_cast<double>(hd));

    // rotated copies of q and k; rotation depends on absolute frame index
    Tensor rq = q.val();
    Tensor rk = k.val();
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t h = 0; h < n_heads; ++h) {
            kern::rope(rq.row(i) + h * hd, static_cast<size_t>(hd), rope_base, pos0 + i, false);
            kern::rope(rk.row(i) + h * hd, static_cast<size_t>(hd), rope_base, pos0 + i, false);
        }
    }

    // flat softmax weights: per head, per query, c_i = i - j0 + 1 entries
    std::vector<size_t> qoff(static_cast<size_t>(n) + 1, 0);
    for (int64_t i = 0; i < n; ++i) {
        const int64_t j0 = std::max<int64_t>(0, i - window + 1);
        qoff[static_cast<size_t>(i) + 1] = qoff[static_cast<size_t>(i)] + static_cast<size_t>(i - j0 + 1);
    }
    const size_t        span = qoff[static_cast<size_t>(n)];
    std::vector<double> weights(static_cast<size_t>(n_heads) * span);

    Tensor y({n, d});
    for (int64_t h = 0; h < n_heads; ++h) {
        for (int64_t i = 0; i < n; ++i) {
            const int64_t j0 = std::max<int64_t>(0, i - window + 1);
            const int64_t c  = i - j0 + 1;
            double * w = weights.data() + static_cast<size_t>(h) * span + qoff[static_cast<size_t>(i)];
            for (int64_t j = j0; j <= i; ++j) {
                w[j - j0] = kern::dot(rq.row(i) + h * hd, rk.row(j) + h * hd, static_cast<size_t>(hd)) * qk_norm;
            }
            kern::softmax_inplace(w, static_cast<size_t>(c));
            double * yp = y.row(i) + h * hd;
            for (int64_t j = j0; j <= i; ++j) {
                kern::axpy(w[j - j0], v.val().row(j) + h * hd, yp, static_cast<size_t>(hd));
            }
        }
    }

    const bool needs = q.node()->needs_grad || k.node()->needs_grad || v.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *qn = q.node(), *kn = k.node(), *vn = v.node();
        out->backward = [out, qn, kn, vn, n, d, n_heads, hd, window, qk_norm, rope_base, pos0,
                         rq = std::move(rq), rk = std::move(rk), qoff = std::move(qoff), span,
                         weights = std::move(weights)]() {
            Tensor              drq({n, d});
            Tensor              drk({n, d});
            std::vector<double> dw;
            for (int64_t h = 0; h < n_heads; ++h) {
                for (int64_t i = 0; i < n; ++i) {
                    const int64_t  j0 = std::max<int64_t>(0, i - window + 1);
                    const int64_t  c  = i - j0 + 1;
                    const double * w  = weights.data() + static_cast<size_t>(h) * span + qoff[static_cast<size_t>(i)];
                    const double * g  = out->grad.row(i) + h * hd;
                    dw.assign(static_cast<size_t>(c), 0.0);
                    for (int64_t j = j0; j <= i; ++j) {
                        dw[static_cast<size_t>(j - j0)] =
                            kern::dot(g, vn->value.row(j) + h * hd, static_cast<size_t>(hd));
                        if (vn->needs_grad) {
                            vn->touched = true;
                            kern::axpy(w[j - j0], g, vn->grad.row(j) + h * hd, static_cast<size_t>(hd));
                        }
                    }
                    // softmax jacobian: ds_j = w_j * (dw_j - sum_l w_l dw_l)
                    double wdw = 0.0;
                    for (int64_t j = 0; j < c; ++j) {
                        wdw += w[j] * dw[static_cast<size_t>(j)];
                    }
                    for (int64_t j = j0; j <= i; ++j) {
                        const double ds = w[j - j0] * (dw[static_cast<size_t>(j - j0)] - wdw) * qk_norm;
                        kern::axpy(ds, rk.row(j) + h * hd, drq.row(i) + h * hd, static_cast<size_t>(hd));
                        kern::axpy(ds, rq.row(i) + h * hd, drk.row(j) + h * hd, static_cast<size_t>(hd));
                    }
                }
            }
            // rotations are orthogonal: backward applies the inverse rotation
            for (int64_t i = 0; i < n; ++i) {
                for (int64_t h = 0; h < n_heads; ++h) {
                    kern::rope(drq.row(i) + h * hd, static_cast<size_t>(hd), rope_base, pos0 + i, true);
                    kern::rope(drk.row(i) + h * hd, static_cast<size_t>(hd), rope_base, pos0 + i, true);
                }
            }
            if (qn->needs_grad) {
                acc(qn, drq.ptr(), drq.data.size());
            }
            if (kn->needs_grad) {
                acc(kn, drk.ptr(), drk.data.size());
            }
        };
    }
    return Var(this, out);
}

Var Tape::gather_rows(Var table, const std::vector<int32_t> & idx) {
    check(table.val().ndim() == 2, ErrCode::invalid_arg, "gather_rows: table must be 2-D");
    const int64_t rows = table.val().dim(0);
    const int64_t cols = table.val().dim(1);
    const int64_t n    = static_cast<int64_t>(idx.size());
    Tensor        y({n, cols});
    for (int64_t i = 0; i < n; ++i) {
        check(idx[static_cast<size_t>(i)] >= 0 && idx[static_cast<size_t>(i)] < rows, ErrCode::invalid_arg,
              "gather_rows: index out of range");
        const double * src = table.val().row(idx[static_cast<size_t>(i)]);
        std::copy(src, src + cols, y.row(i));
    }
    const bool needs = table.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * tn = table.node();
        out->backward = [out, tn, idx, n, cols]() {
            tn->touched = true;
            for (int64_t i = 0; i < n; ++i) {
                kern::axpy(1.0, out->grad.row(i), tn->grad.row(idx[static_cast<size_t>(i)]),
                           static_cast<size_t>(cols));
            }
        };
    }
    return Var(this, out);
}

Var Tape::straight_through(Var z, Var e) {
    check(z.val().same_shape(e.val()), ErrCode::invalid_arg, "straight_through: shape mismatch");
    const bool needs = z.node()->needs_grad;
    TapeNode * out   = make(e.val(), needs);
    if (needs) {
        TapeNode *   zn = z.node();
        const size_t n  = zn->value.data.size();
        out->backward   = [out, zn, n]() { acc(zn, out->grad.ptr(), n); };
    }
    return Var(this, out);
}

Var Tape::weight_norm(Var v, Var g) {
    check(v.val().ndim() >= 2, ErrCode::invalid_arg, "weight_norm: direction tensor must have >= 2 dims");
    const int64_t outd = v.val().dim(0);
    check(g.val().numel() == outd, ErrCode::invalid_arg, "weight_norm: gain size mismatch");
    const int64_t r = v.val().numel() / outd;

    std::vector<double> norms(static_cast<size_t>(outd));
    Tensor              y(v.val().shape);
    for (int64_t o = 0; o < outd; ++o) {
        const double * vp = v.val().ptr() + o * r;
        const double   nn = std::sqrt(kern::dot(vp, vp, static_cast<size_t>(r)));
        check(nn > 0.0, ErrCode::runtime, "weight_norm: zero direction row");
        norms[static_cast<size_t>(o)] = nn;
        const double s = g.val().at(o) / nn;
        double * yp    = y.ptr() + o * r;
        for (int64_t i = 0; i < r; ++i) {
            yp[i] = s * vp[i];
        }
    }

    const bool needs = v.node()->needs_grad || g.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode *vn = v.node(), *gn = g.node();
        out->backward = [out, vn, gn, outd, r, norms = std::move(norms)]() {
            for (int64_t o = 0; o < outd; ++o) {
                const double * vp  = vn->value.ptr() + o * r;
                const double * gw  = out->grad.ptr() + o * r;
                const double   nn  = norms[static_cast<size_t>(o)];
                const double   vdg = kern::dot(vp, gw, static_cast<size_t>(r));
                if (gn->needs_grad) {
                    gn->touched = true;
                    gn->grad.at(o) += vdg / nn;
                }
                if (vn->needs_grad) {
                    vn->touched   = true;
                    const double s = gn->value.at(o) / nn;
                    const double t = s * vdg / (nn * nn);
                    double * dv    = vn->grad.ptr() + o * r;
                    for (int64_t i = 0; i < r; ++i) {
                        dv[i] += s * gw[i] - t * vp[i];
                    }
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::conv2d(Var x, Var w, Var b, const Conv2dSpec & spec) {
    check(x.val().ndim() == 3 && w.val().ndim() == 4, ErrCode::invalid_arg, "conv2d: expects x [C,H,W], w [O,C,kh,kw]");
    const int64_t cin = x.val().dim(0);
    const int64_t h   = x.val().dim(1);
    const int64_t wd  = x.val().dim(2);
    const int64_t cout = w.val().dim(0);
    check(w.val().dim(1) == cin, ErrCode::invalid_arg, "conv2d: channel mismatch");
    const int64_t kh = w.val().dim(2);
    const int64_t kw = w.val().dim(3);
    const bool has_bias = b.defined();
    if (has_bias) {
        check(b.val().numel() == cout, ErrCode::invalid_arg, "conv2d: bias size mismatch");
    }

    const int64_t ho = (h + 2 * spec.pad_h - spec.dil_h * (kh - 1) - 1) / spec.stride_h + 1;
    const int64_t wo = (wd + 2 * spec.pad_w - spec.dil_w * (kw - 1) - 1) / spec.stride_w + 1;
    check(ho > 0 && wo > 0, ErrCode::invalid_arg, "conv2d: output would be empty");

    Tensor y({cout, ho, wo});
    for (int64_t co = 0; co < cout; ++co) {
        for (int64_t oy = 0; oy < ho; ++oy) {
            for (int64_t ox = 0; ox < wo; ++ox) {
                double acc_v = has_bias ? b.val().at(co) : 0.0;
                for (int64_t ci = 0; ci < cin; ++ci) {
                    for (int64_t ky = 0; ky < kh; ++ky) {
                        const int64_t iy = oy * spec.stride_h - spec.pad_h + ky * spec.dil_h;
                        if (iy < 0 || iy >= h) {
                            continue;
                        }
                        for (int64_t kx = 0; kx < kw; ++kx) {
                            const int64_t ix = ox * spec.stride_w - spec.pad_w + kx * spec.dil_w;
                            if (ix < 0 || ix >= wd) {
                                continue;
                            }
                            acc_v += x.val().at((ci * h + iy) * wd + ix) * w.val().at(((co * cin + ci) * kh + ky) * kw + kx);
                        }
                    }
                }
                y.at((co * ho + oy) * wo + ox) = acc_v;
            }
        }
    }

    const bool needs = x.node()->needs_grad || w.node()->needs_grad || (has_bias && b.node()->needs_grad);
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * xn = x.node();
        TapeNode * wn = w.node();
        TapeNode * bn = has_bias ? b.node() : nullptr;
        out->backward = [out, xn, wn, bn, spec, cin, h, wd, cout, kh, kw, ho, wo]() {
            for (int64_t co = 0; co < cout; ++co) {
                for (int64_t oy = 0; oy < ho; ++oy) {
                    for (int64_t ox = 0; ox < wo; ++ox) {
                        const double g = out->grad.at((co * ho + oy) * wo + ox);
                        if (bn != nullptr && bn->needs_grad) {
                            bn->touched = true;
                            bn->grad.at(co) += g;
                        }
                        for (int64_t ci = 0; ci < cin; ++ci) {
                            for (int64_t ky = 0; ky < kh; ++ky) {
                                const int64_t iy = oy * spec.stride_h - spec.pad_h + ky * spec.dil_h;
                                if (iy < 0 || iy >= h) {
                                    continue;
                                }
                                for (int64_t kx = 0; kx < kw; ++kx) {
                                    const int64_t ix = ox * spec.stride_w - spec.pad_w + kx * spec.dil_w;
                                    if (ix < 0 || ix >= wd) {
                                        continue;
                                    }
                                    const int64_t xi = (ci * h + iy) * wd + ix;
                                    const int64_t wi = ((co * cin + ci) * kh + ky) * kw + kx;
                                    if (xn->needs_grad) {
                                        xn->touched = true;
                                        xn->grad.at(xi) += g * wn->value.at(wi);
                                    }
                                    if (wn->needs_grad) {
                                        wn->touched = true;
                                        wn->grad.at(wi) += g * xn->value.at(xi);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::period_fold(Var x, int64_t period) {
    check(x.val().ndim() == 1, ErrCode::invalid_arg, "period_fold: expects 1-D input");
    check(period > 0, ErrCode::invalid_arg, "period_fold: period must be positive");
    const int64_t t    = x.val().numel();
    const int64_t rows = (t + period - 1) / period;
    Tensor        y({1, rows, period});
    for (int64_t i = 0; i < t; ++i) {
        y.at(i) = x.val().at(i);
    }
    const bool needs = x.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * xn = x.node();
        out->backward = [out, xn, t]() {
            xn->touched = true;
            for (int64_t i = 0; i < t; ++i) {
                xn->grad.at(i) += out->grad.at(i);
            }
        };
    }
    return Var(this, out);
}

Var Tape::stft_ri(Var x, int64_t fft_size, int64_t hop) {
    check(x.val().ndim() == 1, ErrCode::invalid_arg, "stft_ri: expects 1-D input");
    check(dsp::is_pow2(static_cast<size_t>(fft_size)), ErrCode::invalid_arg, "stft_ri: fft size must be a power of two");
    check(hop > 0, ErrCode::invalid_arg, "stft_ri: hop must be positive");
    const int64_t t = x.val().numel();
    check(t >= fft_size, ErrCode::invalid_arg, "stft_ri: input shorter than one frame");
    const int64_t frames = 1 + (t - fft_size) / hop;
    const int64_t bins   = fft_size / 2 + 1;

    std::vector<double> window(static_cast<size_t>(fft_size));
    for (int64_t i = 0; i < fft_size; ++i) {
        window[static_cast<size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(fft_size));
    }

    Tensor              y({2, frames, bins});
    std::vector<double> re(static_cast<size_t>(fft_size));
    std::vector<double> im(static_cast<size_t>(fft_size));
    for (int64_t f = 0; f < frames; ++f) {
        const double * xp = x.val().ptr() + f * hop;
        for (int64_t i = 0; i < fft_size; ++i) {
            re[static_cast<size_t>(i)] = xp[i] * window[static_cast<size_t>(i)];
            im[static_cast<size_t>(i)] = 0.0;
        }
        dsp::fft_inplace(re.data(), im.data(), static_cast<size_t>(fft_size), false);
        for (int64_t k = 0; k < bins; ++k) {
            y.at((0 * frames + f) * bins + k) = re[static_cast<size_t>(k)];
            y.at((1 * frames + f) * bins + k) = im[static_cast<size_t>(k)];
        }
    }

    const bool needs = x.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * xn = x.node();
        out->backward = [out, xn, fft_size, hop, frames, bins, window = std::move(window)]() {
            xn->touched = true;
            std::vector<double> re(static_cast<size_t>(fft_size));
            std::vector<double> im(static_cast<size_t>(fft_size));
            for (int64_t f = 0; f < frames; ++f) {
                // adjoint of the analysis transform: inverse-direction FFT of
                // the bin gradients (zero above nyquist), real part, windowed
                std::fill(re.begin(), re.end(), 0.0);
                std::fill(im.begin(), im.end(), 0.0);
                for (int64_t k = 0; k < bins; ++k) {
                    re[static_cast<size_t>(k)] = out->grad.at((0 * frames + f) * bins + k);
                    im[static_cast<size_t>(k)] = out->grad.at((1 * frames + f) * bins + k);
                }
                dsp::fft_inplace(re.data(), im.data(), static_cast<size_t>(fft_size), true);
                double * dx = xn->grad.ptr() + f * hop;
                for (int64_t i = 0; i < fft_size; ++i) {
                    dx[i] += window[static_cast<size_t>(i)] * re[static_cast<size_t>(i)];
                }
            }
        };
    }
    return Var(this, out);
}

Var Tape::magnitude(Var ri) {
    check(ri.val().ndim() == 3 && ri.val().dim(0) == 2, ErrCode::invalid_arg, "magnitude: expects [2, F, B] input");
    const int64_t n = ri.val().numel() / 2;
    Tensor        y({ri.val().dim(1), ri.val().dim(2)});
    for (int64_t i = 0; i < n; ++i) {
        const double re = ri.val().at(i);
        const double im = ri.val().at(n + i);
        y.at(i)         = std::sqrt(re * re + im * im);
    }
    const bool needs = ri.node()->needs_grad;
    TapeNode * out   = make(std::move(y), needs);
    if (needs) {
        TapeNode * rn = ri.node();
        out->backward = [out, rn, n]() {
            rn->touched = true;
            for (int64_t i = 0; i < n; ++i) {
                const double m = out->value.at(i);
                if (m <= 0.0) {
                    continue;  // subgradient 0 at the origin
                }
                const double g = out->grad.at(i) / m;
                rn->grad.at(i) += g * rn->value.at(i);
                rn->grad.at(n + i) += g * rn->value.at(n + i);
            }
        };
    }
    return Var(this, out);
}

void Tape::backward(Var loss) {
    check(loss.node() != nullptr, ErrCode::invalid_arg, "backward: undefined loss");
    check(loss.val().numel() == 1, ErrCode::invalid_arg, "backward: loss must be scalar");
    check(loss.node()->needs_grad, ErrCode::invalid_arg, "backward: loss does not depend on any gradient source");
    loss.node()->grad.at(0) = 1.0;
    loss.node()->touched    = true;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->touched && it->backward) {
            it->backward();
        }
    }
    for (auto & [p, node] : param_nodes_) {
        if (node->touched) {
            const size_t n = p->grad.data.size();
            for (size_t i = 0; i < n; ++i) {
                p->grad.data[i] += node->grad.data[i];
            }
        }
    }
}

}  // namespace ts3
