// Copyright 2026 ts3codec authors
// Training objectives: multiscale mel reconstruction, least-squares GAN
// terms, feature matching, the two stop-gradient VQ terms, and their
// weighted combination.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/tape.h"

#include <cstdint>
#include <string>
#include <vector>

namespace ts3 {

struct LossWeights {
    double reconstruction = 15.0;
    double gan            = 1.0;
    double feature        = 1.0;
    double vq             = 32.0;  // overridden per codebook size
    double commitment     = 0.25;
};

// {8192 -> 4, 65536 -> 32, 131072 -> 64}; other sizes follow the same
// size/2048 proportionality.
double vq_weight_for(int64_t codebook_size);

// One spectral resolution of the mel reconstruction loss.
struct MelScale {
    int64_t fft_size;
    int64_t hop;     // fft_size / 4
    int64_t n_mels;  // min(80, 10 << i)
};
const std::vector<MelScale> & mel_scales();

// Sum over scales of mean |log(1e-5 + mel(x)) - log(1e-5 + mel(y))|.
// Both waveforms must have the same length, at least the largest fft size.
Var multiscale_mel_loss(Tape & t, Var x, Var y, double sample_rate = 16000.0);

// Value-only variant for metrics and logging.
double multiscale_mel_value(const std::vector<double> & x, const std::vector<double> & y,
                            double sample_rate = 16000.0);

// d = mean((real-1)^2) + mean(fake^2), g = mean((fake-1)^2), each averaged
// over the sub-discriminators. The vectors hold one logit tensor per sub.
struct GanPair {
    Var d_loss;
    Var g_loss;
};
GanPair lsgan_losses(Tape & t, const std::vector<Var> & real_logits, const std::vector<Var> & fake_logits);

// Mean |fake - real| averaged over layers and sub-discriminators
// (features[sub][layer]). Real-branch values are wrapped as constants, so no
// gradient ever reaches the real path.
Var feature_matching_loss(Tape & t, const std::vector<std::vector<Var>> & real,
                          const std::vector<std::vector<Var>> & fake);

// codebook_loss = L1(stopgrad(pre), post): gradients reach the codebook only.
// commitment_loss = L1(pre, stopgrad(post)): gradients reach the encoder
// only. The two values are numerically equal.
struct VqPair {
    Var codebook_loss;
    Var commitment_loss;
};
VqPair vq_losses(Tape & t, Var pre_quant, Var post_quant);

// generator = w.reconstruction*mel + w.gan*gan_g + w.feature*feature
//           + w.vq*codebook + w.commitment*commitment; discriminator = gan_d.
struct LossTerms {
    Var mel, gan_g, gan_d, feature, codebook, commitment;
};
struct TotalPair {
    Var generator_total;
    Var discriminator_total;
};
TotalPair total_losses(Tape & t, const LossTerms & terms, const LossWeights & w);

// Plain-number record of one training step for the line-delimited log.
struct LossReport {
    int64_t step = 0;
    double  mel = 0.0, gan_g = 0.0, gan_d = 0.0, feature = 0.0, vq = 0.0, commitment = 0.0;
    double  generator_total = 0.0, discriminator_total = 0.0;
    double  lr = 0.0;

    // recomputes the totals from the terms and the weights
    void        finalize(const LossWeights & w);
    std::string to_json_line() const;
};

}  // namespace ts3
