// Copyright 2026 ts3codec authors
// Causal sliding-window transformer stack with three equivalent paths: a
// full-sequence offline forward, a single-frame streaming step with a KV
// ring cache, and a taped forward for training. Offline and streaming runs
// produce bit-identical outputs because every reduction goes through the
// shared noinline kernels in the same order.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/params.h"
#include "core/rng.h"
#include "core/tape.h"
#include "core/tensor.h"

#include <cstdint>
#include <string>
#include <vector>

namespace ts3 {

// rotary embedding base and layer-norm epsilon shared by all paths
constexpr double kRopeBase = 10000.0;
constexpr double kLnEps    = 1e-5;

struct TransformerConfig {
    int64_t num_layers = 0;
    int64_t embed_dim  = 0;
    int64_t num_heads  = 0;
    int64_t ffn_dim    = 0;
    // attention span in frames, including the current frame; window == 1
    // degrades to framewise processing
    int64_t window = 0;

    void    validate() const;
    int64_t head_dim() const { return embed_dim / num_heads; }
};

// Boolean N x N mask, row-major: entry (i, j) is 1 iff frame i may attend to
// frame j, i.e. max(0, i - window + 1) <= j <= i.
std::vector<uint8_t> attention_mask(int64_t num_frames, int64_t window);

// Rotated keys and values for the most recent window-1 frames of one layer.
// head_ is the ring slot of the oldest entry; iteration is always oldest to
// newest so streaming sums match the offline left-to-right order.
struct LayerKV {
    Tensor  k;  // [window-1, embed_dim]
    Tensor  v;
    int64_t count = 0;
    int64_t head  = 0;
};

struct StreamState {
    std::vector<LayerKV> layers;
    int64_t              next_frame = 0;  // absolute index of the next input
    // per-step scratch, kept here so step() does not allocate
    std::vector<double> x, h, q, k, v, attn, tmp, f1, scores;
};

struct LayerWeights {
    Parameter *ln1_g, *ln1_b;
    Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    Parameter *ln2_g, *ln2_b;
    Parameter *w1, *b1, *w2, *b2;
};

class Transformer {
public:
    // Registers weights named "<prefix>.l<i>.<name>" in ps. Linear maps use
    // uniform(-1/sqrt(in), 1/sqrt(in)) init; layer norms start at identity.
    Transformer(const TransformerConfig & cfg, const std::string & prefix, ParamStore & ps, Rng & rng);

    const TransformerConfig & config() const { return cfg_; }

    // x: [N, D] with frame 0 at absolute position 0; returns [N, D]
    Tensor forward_offline(const Tensor & x) const;

    StreamState make_state() const;

    // in/out: D-vectors; emits exactly what forward_offline computes for
    // this frame position given the same prefix
    void step(StreamState & state, const double * in, double * out) const;

    // training path; x: [N, D] Var whose frame 0 sits at absolute pos0
    Var forward(Tape & t, Var x, int64_t pos0 = 0) const;

    std::vector<Parameter *> parameters() const;

    // parameter count from shapes alone; never allocates weights
    static int64_t param_count(const TransformerConfig & cfg);

private:
    void layer_offline(const LayerWeights & lw, Tensor & x) const;

    TransformerConfig         cfg_;
    std::vector<LayerWeights> layers_;
};

}  // namespace ts3
