// Copyright 2026 ts3codec authors
// Low-level numeric kernels. Every reduction the codec forward path depends
// on goes through these noinline functions so the offline and streaming
// paths execute the exact same machine code and stay bit-identical.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace ts3::kern {

#define TS3_NOINLINE __attribute__((noinline))

// sum_{i} a[i] * b[i], accumulated in ascending index order
TS3_NOINLINE double dot(const double * a, const double * b, size_t n);

// sum_{i} x[i]
TS3_NOINLINE double sum(const double * x, size_t n);

// sum_{i} (x[i] - c)^2
TS3_NOINLINE double sum_sq_dev(const double * x, size_t n, double c);

// squared euclidean distance
TS3_NOINLINE double sq_dist(const double * a, const double * b, size_t n);

// y[i] += a * x[i]
TS3_NOINLINE void axpy(double a, const double * x, double * y, size_t n);

// y = W x   (W row-major out x in)
TS3_NOINLINE void matvec(const double * w, const double * x, double * y, size_t out, size_t in);

// y += W^T g  (used for input gradients of linear layers)
TS3_NOINLINE void matvec_t_acc(const double * w, const double * g, double * y, size_t out, size_t in);

// numerically stable in-place softmax over n entries
TS3_NOINLINE void softmax_inplace(double * s, size_t n);

// Rotary position embedding applied in place to one head vector. Pairs
// (v[2i], v[2i+1]) are rotated by pos * base^(-2i/head_dim). Rotation is
// orthogonal, so inverse = true applies the exact transpose, which is also
// the backward map for gradients.
TS3_NOINLINE void rope(double * v, size_t head_dim, double base, int64_t pos, bool inverse);

}  // namespace ts3::kern
