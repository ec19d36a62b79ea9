// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/framing.h"

#include "core/common.h"

#include <algorithm>

namespace ts3 {

std::vector<double> pad_to_multiple(const std::vector<double> & wave, int64_t frame_size) {
    check(frame_size > 0, ErrCode::invalid_arg, "pad_to_multiple: frame_size must be positive");
    const int64_t len    = static_cast<int64_t>(wave.size());
    const int64_t frames = std::max<int64_t>(1, (len + frame_size - 1) / frame_size);
    std::vector<double> out = wave;
    out.resize(static_cast<size_t>(frames * frame_size), 0.0);
    return out;
}

FrameMatrix frame(const std::vector<double> & wave, int64_t frame_size) {
    check(frame_size > 0, ErrCode::invalid_arg, "frame: frame_size must be positive");
    const int64_t len = static_cast<int64_t>(wave.size());
    if (len == 0 || len % frame_size != 0) {
        fail(ErrCode::invalid_arg, "frame: length " + std::to_string(len) + " is not a positive multiple of " +
                                       std::to_string(frame_size) + "; pad with " +
                                       std::to_string((frame_size - len % frame_size) % frame_size +
                                                      (len == 0 ? frame_size : 0)) +
                                       " zeros first");
    }
    FrameMatrix m;
    m.frame_size = frame_size;
    m.num_frames = len / frame_size;
    m.data       = Tensor({m.num_frames, frame_size}, wave);
    return m;
}

std::vector<double> unframe(const FrameMatrix & frames) {
    return frames.data.data;
}

}  // namespace ts3
