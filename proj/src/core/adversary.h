// Copyright 2026 ts3codec authors
// Training-time discriminators: a multi-period discriminator over folded
// waveforms and a multi-scale STFT discriminator over complex spectrograms.
// Both emit logit maps plus intermediate features for feature matching.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/params.h"
#include "core/tape.h"

#include <cstdint>
#include <vector>

namespace ts3 {

struct DiscriminatorConfig {
    // waveform fold periods, one sub-discriminator each
    std::vector<int64_t> mpd_periods = {2, 3, 5, 7, 11};
    // output widths of the strided (5,1)/(3,1) stages; a same-width stride-1
    // stage and a 1-channel logit head follow
    std::vector<int64_t> mpd_channels = {32, 128, 512, 1024};
    // STFT window per sub-discriminator, hop = window/4
    std::vector<int64_t> msstft_windows = {2048, 1024, 512, 256, 128};
    // constant channel width of the STFT stacks
    int64_t msstft_filters = 32;

    void validate() const;
};

// One sub-discriminator's result: a real-valued logit map and the ordered
// post-activation features of every layer before the logit head.
struct SubOutput {
    Var              logits;
    std::vector<Var> features;
};

struct DiscriminatorOutput {
    std::vector<SubOutput> subs;

    std::vector<Var>              logit_list() const;
    std::vector<std::vector<Var>> feature_lists() const;
};

class Adversary {
public:
    Adversary(const DiscriminatorConfig & cfg, uint64_t seed);

    const DiscriminatorConfig & config() const { return cfg_; }
    ParamStore &                params() { return ps_; }
    const ParamStore &          params() const { return ps_; }
    std::vector<Parameter *>    parameters() const;

    // own_params=true tapes the weights as trainable parameters (the
    // discriminator update); false wraps them as constants so generator
    // gradients flow through frozen weights (the generator update).
    DiscriminatorOutput mpd_forward(Tape & t, Var wave, bool own_params) const;
    DiscriminatorOutput msstft_forward(Tape & t, Var wave, bool own_params) const;
    // both families concatenated: MPD periods first, then STFT scales
    DiscriminatorOutput forward(Tape & t, Var wave, bool own_params) const;

private:
    struct ConvWeights {
        Parameter *v = nullptr, *g = nullptr, *b = nullptr;
    };
    struct SubNet {
        std::vector<ConvWeights> convs;
        ConvWeights              post;
    };

    ConvWeights make_conv(const std::string & name, int64_t cout, int64_t cin, int64_t kh, int64_t kw, Rng & rng);
    Var run_conv(Tape & t, Var x, const ConvWeights & cw, const Conv2dSpec & spec, bool own_params) const;

    DiscriminatorConfig cfg_;
    ParamStore          ps_;
    std::vector<SubNet> mpd_subs_;
    std::vector<SubNet> stft_subs_;
};

}  // namespace ts3
