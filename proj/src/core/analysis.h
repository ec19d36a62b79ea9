// Copyright 2026 ts3codec authors
// Complexity accounting and external-model-free quality metrics: per-second
// MAC counts under a pinned convention, mel cepstral distortion, and codebook
// usage statistics.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/model.h"

#include <cstdint>
#include <string>
#include <vector>

namespace ts3 {

// Multiply-accumulate counts for exactly one second of audio: one MAC per
// scalar multiply in every matrix product. Attention counts its projections
// plus the score and context products over the causal window; layer norms,
// softmax, and the codebook nearest-neighbor search are excluded.
struct MacsReport {
    int64_t encoder_stem      = 0;
    int64_t encoder_attention = 0;
    int64_t encoder_ffn       = 0;
    int64_t vq_projections    = 0;
    int64_t decoder_attention = 0;
    int64_t decoder_ffn       = 0;
    int64_t decoder_stem      = 0;
    int64_t total             = 0;

    std::string convention;       // identifier of the counting rules above
    double      published = 0.0;  // externally reported figure, 0 if none
};

MacsReport macs(const CodecConfig & cfg);

// Printable per-component table; shows the externally reported figure
// side-by-side when one exists (counting conventions differ, so the two
// numbers are displayed together rather than reconciled).
std::string macs_table(const MacsReport & r);

// Mel cepstral distortion in dB: frame-wise Euclidean distance over MFCC
// coefficients C1..C13 (25 ms window, 10 ms hop), scaled by 10*sqrt(2)/ln 10
// and averaged over frames. Inputs must have equal length and cover at least
// one analysis window.
double mcd(const std::vector<double> & x, const std::vector<double> & y, double sample_rate = 16000.0);

struct CodebookStats {
    int64_t distinct    = 0;
    double  utilization = 0.0;  // distinct / codebook_size
    double  perplexity  = 0.0;  // exp(entropy of the empirical distribution)
};

CodebookStats codebook_stats(const std::vector<int32_t> & tokens, int64_t codebook_size);

}  // namespace ts3
