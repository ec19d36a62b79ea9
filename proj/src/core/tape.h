// Copyright 2026 ts3codec authors
// Reverse-mode autodiff on a per-step tape of float64 tensors.
//
// A Tape owns every intermediate value of one forward pass. Operations append
// nodes and record closures that push gradients back to their inputs. The
// tape is single use: build a loss, call backward(), read Parameter::grad,
// then discard the tape.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/params.h"
#include "core/tensor.h"

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

namespace ts3 {

class Tape;

struct TapeNode {
    Tensor                value;
    Tensor                grad;     // allocated only when needs_grad
    bool                  needs_grad = false;
    bool                  touched    = false;  // grad received a contribution
    Parameter *           param      = nullptr;
    std::function<void()> backward;
};

// Cheap handle into a Tape. Valid for the lifetime of the tape it came from.
class Var {
public:
    Var() = default;
    Var(Tape * tape, TapeNode * node) : tape_(tape), node_(node) {}

    const Tensor & val() const { return node_->value; }
    const Tensor & grad() const { return node_->grad; }
    TapeNode *     node() const { return node_; }
    bool           defined() const { return node_ != nullptr; }

private:
    Tape *     tape_ = nullptr;
    TapeNode * node_ = nullptr;
};

struct Conv2dSpec {
    int64_t stride_h = 1;
    int64_t stride_w = 1;
    int64_t pad_h    = 0;
    int64_t pad_w    = 0;
    int64_t dil_h    = 1;
    int64_t dil_w    = 1;
};

class Tape {
public:
    // ---- sources ----
    Var leaf(Tensor value, bool requires_grad = false);
    Var param(Parameter & p);  // one node per Parameter, cached
    Var constant(Tensor value);
    Var constant_fill(const std::vector<int64_t> & shape, double fill);

    // ---- elementwise / reductions ----
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var mean_all(Var a);
    Var l1_loss(Var a, Var b);   // mean |a - b|
    Var mse_loss(Var a, Var b);  // mean (a - b)^2
    Var log_shift(Var a, double eps);
    Var silu(Var a);
    Var leaky_relu(Var a, double slope);
    Var reshape(Var a, std::vector<int64_t> shape);

    // ---- linear algebra / model blocks ----
    // x: [N, in], w: [out, in], b: [out] or undefined Var for bias-free
    Var linear(Var x, Var w, Var b);
    // per-row normalization over the last axis of a [N, D] tensor
    Var layer_norm(Var x, Var gamma, Var beta, double eps);
    // causal sliding-window multi-head attention with rotary embeddings.
    // q, k, v: [N, D]; each query i attends to frames [max(0, i-window+1), i].
    // pos0 is the absolute index of frame 0 (nonzero in streaming contexts).
    Var windowed_attention(Var q, Var k, Var v, int64_t n_heads, int64_t window, double rope_base, int64_t pos0);

    // ---- quantizer ----
    // y[i, :] = table[idx[i], :]; backward scatter-adds into the table rows
    Var gather_rows(Var table, const std::vector<int32_t> & idx);
    // forward takes the value of e, backward routes the full gradient to z
    Var straight_through(Var z, Var e);

    // ---- discriminator blocks ----
    // v: [out, ...], g: [out]; w_row = g[o] * v_row / ||v_row||
    Var weight_norm(Var v, Var g);
    // x: [Cin, H, W], w: [Cout, Cin, kh, kw], b: [Cout] or undefined
    Var conv2d(Var x, Var w, Var b, const Conv2dSpec & spec);
    // x: [T] -> [1, ceil(T/p), p], zero padded on the right
    Var period_fold(Var x, int64_t period);

    // ---- spectral ----
    // x: [T] -> [2, n_frames, fft/2+1] (real, imag), periodic Hann window,
    // no center padding. Requires T >= fft_size.
    Var stft_ri(Var x, int64_t fft_size, int64_t hop);
    // [2, F, B] -> [F, B], sqrt(re^2 + im^2)
    Var magnitude(Var ri);

    // Seeds d(loss)/d(loss) = 1, sweeps the tape in reverse creation order,
    // then accumulates every touched parameter node into Parameter::grad.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

private:
    TapeNode * make(Tensor value, bool needs_grad);
    static void acc(TapeNode * n, const double * g, size_t count);

    std::deque<TapeNode>                         nodes_;
    std::unordered_map<Parameter *, TapeNode *>  param_nodes_;
};

}  // namespace ts3
