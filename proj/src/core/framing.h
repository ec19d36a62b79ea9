// Copyright 2026 ts3codec authors
// Waveform <-> frame-matrix conversion. Frames are non-overlapping windows of
// frame_size samples with no analysis window applied.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/tensor.h"

#include <cstdint>
#include <vector>

namespace ts3 {

// Frame matrix of shape F x N: column n holds samples [n*F, (n+1)*F). Stored
// column-major, which makes the buffer identical to a row-major [N, F] tensor
// whose row n is frame n; data is that tensor.
struct FrameMatrix {
    Tensor  data;  // [num_frames, frame_size]
    int64_t frame_size = 0;
    int64_t num_frames = 0;

    double *       frame(int64_t n) { return data.row(n); }
    const double * frame(int64_t n) const { return data.row(n); }
};

// Appends zeros so the length is the smallest multiple of frame_size that is
// >= the input length. Empty input pads to one full frame.
std::vector<double> pad_to_multiple(const std::vector<double> & wave, int64_t frame_size);

// Splits a padded waveform into frames. The length must already be divisible
// by frame_size; the error message names the padding a caller should apply.
FrameMatrix frame(const std::vector<double> & wave, int64_t frame_size);

// Exact inverse of frame().
std::vector<double> unframe(const FrameMatrix & frames);

}  // namespace ts3
