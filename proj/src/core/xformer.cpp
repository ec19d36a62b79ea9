// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/xformer.h"

#include "core/common.h"
#include "core/kernels.h"

#include <cmath>

namespace ts3 {

namespace {

void linear_row(const Parameter * w, const Parameter * b, const double * x, double * y) {
    const int64_t out = w->value.dim(0);
    const int64_t in  = w->value.dim(1);
    kern::matvec(w->value.ptr(), x, y, static_cast<size_t>(out), static_cast<size_t>(in));
    if (b != nullptr) {
        for (int64_t o = 0; o < out; ++o) {
            y[o] += b->value.at(o);
        }
    }
}

void layer_norm_row(const double * x, const Parameter * g, const Parameter * b, double * y, int64_t d) {
    const double mu  = kern::sum(x, static_cast<size_t>(d)) / static_cast<double>(d);
    const double var = kern::sum_sq_dev(x, static_cast<size_t>(d), mu) / static_cast<double>(d);
    const double is  = 1.0 / std::sqrt(var + kLnEps);
    for (int64_t i = 0; i < d; ++i) {
        y[i] = g->value.at(i) * ((x[i] - mu) * is) + b->value.at(i);
    }
}

// same expression as the tape op so the taped forward matches the raw paths
double silu_scalar(double x) {
    return x * (1.0 / (1.0 + std::exp(-x)));
}

}  // namespace

void TransformerConfig::validate() const {
    check(num_layers >= 1, ErrCode::config, "transformer: num_layers must be >= 1");
    check(embed_dim >= 1, ErrCode::config, "transformer: embed_dim must be >= 1");
    check(num_heads >= 1, ErrCode::config, "transformer: num_heads must be >= 1");
    check(ffn_dim >= 1, ErrCode::config, "transformer: ffn_dim must be >= 1");
    check(window >= 1, ErrCode::config, "transformer: window must be >= 1");
    check(embed_dim % num_heads == 0, ErrCode::config, "transformer: embed_dim must be divisible by num_heads");
}

std::vector<uint8_t> attention_mask(int64_t num_frames, int64_t window) {
    check(num_frames >= 1 && window >= 1, ErrCode::invalid_arg, "attention_mask: arguments must be >= 1");
    std::vector<uint8_t> m(static_cast<size_t>(num_frames * num_frames), 0);
    for (int64_t i = 0; i < num_frames; ++i) {
        const int64_t j0 = std::max<int64_t>(0, i - window + 1);
        for (int64_t j = j0; j <= i; ++j) {
            m[static_cast<size_t>(i * num_frames + j)] = 1;
        }
    }
    return m;
}

Transformer::Transformer(const TransformerConfig & cfg, const std::string & prefix, ParamStore & ps, Rng & rng)
    : cfg_(cfg) {
    cfg_.validate();
    const int64_t d = cfg_.embed_dim;
    const double  bd = 1.0 / std::sqrt(static_cast<double>(d));
    const double  bf = 1.0 / std::sqrt(static_cast<double>(cfg_.ffn_dim));
    for (int64_t l = 0; l < cfg_.num_layers; ++l) {
        const std::string base = prefix + ".l" + std::to_string(l) + ".";
        LayerWeights      w;
        w.ln1_g = &ps.create(base + "ln1_g", {d});
        w.ln1_g->value.fill(1.0);
        w.ln1_b = &ps.create(base + "ln1_b", {d});
        w.wq    = &ps.create_uniform(base + "wq", {d, d}, rng, bd);
        w.bq    = &ps.create_uniform(base + "bq", {d}, rng, bd);
        w.wk    = &ps.create_uniform(base + "wk", {d, d}, rng, bd);
        w.bk    = &ps.create_uniform(base + "bk", {d}, rng, bd);
        w.wv    = &ps.create_uniform(base + "wv", {d, d}, rng, bd);
        w.bv    = &ps.create_uniform(base + "bv", {d}, rng, bd);
        w.wo    = &ps.create_uniform(base + "wo", {d, d}, rng, bd);
        w.bo    = &ps.create_uniform(base + "bo", {d}, rng, bd);
        w.ln2_g = &ps.create(base + "ln2_g", {d});
        w.ln2_g->value.fill(1.0);
        w.ln2_b = &ps.create(base + "ln2_b", {d});
        w.w1    = &ps.create_uniform(base + "w1", {cfg_.ffn_dim, d}, rng, bd);
        w.b1    = &ps.create_uniform(base + "b1", {cfg_.ffn_dim}, rng, bd);
        w.w2    = &ps.create_uniform(base + "w2", {d, cfg_.ffn_dim}, rng, bf);
        w.b2    = &ps.create_uniform(base + "b2", {d}, rng, bf);
        layers_.push_back(w);
    }
}

int64_t Transformer::param_count(const TransformerConfig & cfg) {
    const int64_t d = cfg.embed_dim;
    const int64_t f = cfg.ffn_dim;
    const int64_t per_layer = 4 * d            // two affine layer norms
                              + 4 * (d * d + d)  // q, k, v, o projections
                              + (f * d + f)      // ffn in
                              + (d * f + d);     // ffn out
    return cfg.num_layers * per_layer;
}

std::vector<Parameter *> Transformer::parameters() const {
    std::vector<Parameter *> out;
    for (const LayerWeights & w : layers_) {
        for (Parameter * p : {w.ln1_g, w.ln1_b, w.wq, w.bq, w.wk, w.bk, w.wv, w.bv, w.wo, w.bo, w.ln2_g, w.ln2_b,
                              w.w1, w.b1, w.w2, w.b2}) {
            out.push_back(p);
        }
    }
    return out;
}

void Transformer::layer_offline(const LayerWeights & lw, Tensor & x) const {
    const int64_t n  = x.dim(0);
    const int64_t d  = cfg_.embed_dim;
    const int64_t hd = cfg_.head_dim();
    const double  sc = 1.0 / std::sqrt(static_cast<double>(hd));

    Tensor h({n, d}), q({n, d}), k({n, d}), v({n, d});
    for (int64_t i = 0; i < n; ++i) {
        layer_norm_row(x.row(i), lw.ln1_g, lw.ln1_b, h.row(i), d);
    }
    for (int64_t i = 0; i < n; ++i) {
        linear_row(lw.wq, lw.bq, h.row(i), q.row(i));
        linear_row(lw.wk, lw.bk, h.row(i), k.row(i));
        linear_row(lw.wv, lw.bv, h.row(i), v.row(i));
        for (int64_t hh = 0; hh < cfg_.num_heads; ++hh) {
            kern::rope(q.row(i) + hh * hd, static_cast<size_t>(hd), kRopeBase, i, false);
            kern::rope(k.row(i) + hh * hd, static_cast<size_t>(hd), kRopeBase, i, false);
        }
    }

    Tensor              attn({n, d});
    std::vector<double> scores(static_cast<size_t>(std::min(cfg_.window, n)));
    for (int64_t hh = 0; hh < cfg_.num_heads; ++hh) {
        const int64_t off = hh * hd;
        for (int64_t i = 0; i < n; ++i) {
            const int64_t j0 = std::max<int64_t>(0, i - cfg_.window + 1);
            const int64_t c  = i - j0 + 1;
            for (int64_t j = j0; j <= i; ++j) {
                scores[static_cast<size_t>(j - j0)] =
                    kern::dot(q.row(i) + off, k.row(j) + off, static_cast<size_t>(hd)) * sc;
            }
            kern::softmax_inplace(scores.data(), static_cast<size_t>(c));
            for (int64_t j = j0; j <= i; ++j) {
                kern::axpy(scores[static_cast<size_t>(j - j0)], v.row(j) + off, attn.row(i) + off,
                           static_cast<size_t>(hd));
            }
        }
    }

    std::vector<double> tmp(static_cast<size_t>(d));
    std::vector<double> f1(static_cast<size_t>(cfg_.ffn_dim));
    for (int64_t i = 0; i < n; ++i) {
        linear_row(lw.wo, lw.bo, attn.row(i), tmp.data());
        for (int64_t j = 0; j < d; ++j) {
            x.row(i)[j] += tmp[static_cast<size_t>(j)];
        }
    }
    for (int64_t i = 0; i < n; ++i) {
        layer_norm_row(x.row(i), lw.ln2_g, lw.ln2_b, h.row(i), d);
        linear_row(lw.w1, lw.b1, h.row(i), f1.data());
        for (double & fv : f1) {
            fv = silu_scalar(fv);
        }
        linear_row(lw.w2, lw.b2, f1.data(), tmp.data());
        for (int64_t j = 0; j < d; ++j) {
            x.row(i)[j] += tmp[static_cast<size_t>(j)];
        }
    }
}

Tensor Transformer::forward_offline(const Tensor & x_in) const {
    check(x_in.ndim() == 2 && x_in.dim(1) == cfg_.embed_dim, ErrCode::invalid_arg,
          "transformer: input must be [N, embed_dim]");
    Tensor x = x_in;
    for (const LayerWeights & lw : layers_) {
        layer_offline(lw, x);
    }
    return x;
}

StreamState Transformer::make_state() const {
    StreamState st;
    const int64_t cap = cfg_.window - 1;
    st.layers.resize(static_cast<size_t>(cfg_.num_layers));
    for (LayerKV & kv : st.layers) {
        if (cap > 0) {
            kv.k = Tensor({cap, cfg_.embed_dim});
            kv.v = Tensor({cap, cfg_.embed_dim});
        }
    }
    const size_t d = static_cast<size_t>(cfg_.embed_dim);
    st.x.resize(d);
    st.h.resize(d);
    st.q.resize(d);
    st.k.resize(d);
    st.v.resize(d);
    st.attn.resize(d);
    st.tmp.resize(d);
    st.f1.resize(static_cast<size_t>(cfg_.ffn_dim));
    st.scores.resize(static_cast<size_t>(cfg_.window));
    return st;
}

void Transformer::step(StreamState & st, const double * in, double * out) const {
    check(st.layers.size() == static_cast<size_t>(cfg_.num_layers), ErrCode::state,
          "transformer step: state does not match this configuration");
    const int64_t d   = cfg_.embed_dim;
    const int64_t hd  = cfg_.head_dim();
    const int64_t cap = cfg_.window - 1;
    const int64_t pos = st.next_frame;
    const double  sc  = 1.0 / std::sqrt(static_cast<double>(hd));
    check(st.x.size() == static_cast<size_t>(d), ErrCode::state,
          "transformer step: state scratch does not match this configuration");

    double * x = st.x.data();
    std::copy(in, in + d, x);

    for (size_t l = 0; l < layers_.size(); ++l) {
        const LayerWeights & lw = layers_[l];
        LayerKV &            kv = st.layers[l];

        layer_norm_row(x, lw.ln1_g, lw.ln1_b, st.h.data(), d);
        linear_row(lw.wq, lw.bq, st.h.data(), st.q.data());
        linear_row(lw.wk, lw.bk, st.h.data(), st.k.data());
        linear_row(lw.wv, lw.bv, st.h.data(), st.v.data());
        for (int64_t hh = 0; hh < cfg_.num_heads; ++hh) {
            kern::rope(st.q.data() + hh * hd, static_cast<size_t>(hd), kRopeBase, pos, false);
            kern::rope(st.k.data() + hh * hd, static_cast<size_t>(hd), kRopeBase, pos, false);
        }

        std::fill(st.attn.begin(), st.attn.end(), 0.0);
        for (int64_t hh = 0; hh < cfg_.num_heads; ++hh) {
            const int64_t off = hh * hd;
            // cached frames oldest to newest, then the current frame: the
            // same left-to-right order the offline path uses
            int64_t c = 0;
            for (int64_t e = 0; e < kv.count; ++e) {
                const int64_t row = (kv.head + e) % cap;
                st.scores[static_cast<size_t>(c++)] =
                    kern::dot(st.q.data() + off, kv.k.row(row) + off, static_cast<size_t>(hd)) * sc;
            }
            st.scores[static_cast<size_t>(c++)] =
                kern::dot(st.q.data() + off, st.k.data() + off, static_cast<size_t>(hd)) * sc;
            kern::softmax_inplace(st.scores.data(), static_cast<size_t>(c));
            c = 0;
            for (int64_t e = 0; e < kv.count; ++e) {
                const int64_t row = (kv.head + e) % cap;
                kern::axpy(st.scores[static_cast<size_t>(c++)], kv.v.row(row) + off, st.attn.data() + off,
                           static_cast<size_t>(hd));
            }
            kern::axpy(st.scores[static_cast<size_t>(c++)], st.v.data() + off, st.attn.data() + off,
                       static_cast<size_t>(hd));
        }

        if (cap > 0) {
            int64_t row;
            if (kv.count < cap) {
                row = (kv.head + kv.count) % cap;
                kv.count += 1;
            } else {
                row     = kv.head;
                kv.head = (kv.head + 1) % cap;
            }
            std::copy(st.k.begin(), st.k.end(), kv.k.row(row));
            std::copy(st.v.begin(), st.v.end(), kv.v.row(row));
        }

        linear_row(lw.wo, lw.bo, st.attn.data(), st.tmp.data());
        for (int64_t j = 0; j < d; ++j) {
            x[j] += st.tmp[static_cast<size_t>(j)];
        }

        layer_norm_row(x, lw.ln2_g, lw.ln2_b, st.h.data(), d);
        linear_row(lw.w1, lw.b1, st.h.data(), st.f1.data());
        for (double & fv : st.f1) {
            fv = silu_scalar(fv);
        }
        linear_row(lw.w2, lw.b2, st.f1.data(), st.tmp.data());
        for (int64_t j = 0; j < d; ++j) {
            x[j] += st.tmp[static_cast<size_t>(j)];
        }
    }

    st.next_frame += 1;
    std::copy(x, x + d, out);
}

Var Transformer::forward(Tape & t, Var x, int64_t pos0) const {
    for (const LayerWeights & lw : layers_) {
        Var h = t.layer_norm(x, t.param(*lw.ln1_g), t.param(*lw.ln1_b), kLnEps);
        Var q = t.linear(h, t.param(*lw.wq), t.param(*lw.bq));
        Var k = t.linear(h, t.param(*lw.wk), t.param(*lw.bk));
        Var v = t.linear(h, t.param(*lw.wv), t.param(*lw.bv));
        Var a = t.windowed_attention(q, k, v, cfg_.num_heads, cfg_.window, kRopeBase, pos0);
        x     = t.add(x, t.linear(a, t.param(*lw.wo), t.param(*lw.bo)));

        Var h2 = t.layer_norm(x, t.param(*lw.ln2_g), t.param(*lw.ln2_b), kLnEps);
        Var f  = t.silu(t.linear(h2, t.param(*lw.w1), t.param(*lw.b1)));
        x      = t.add(x, t.linear(f, t.param(*lw.w2), t.param(*lw.b2)));
    }
    return x;
}

}  // namespace ts3
