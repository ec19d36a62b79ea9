// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/kernels.h"

#include <cmath>

namespace ts3::kern {

double dot(const double * a, const double * b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double sum(const double * x, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += x[i];
    }
    return acc;
}

double sum_sq_dev(const double * x, size_t n, double c) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = x[i] - c;
        acc += d * d;
    }
    return acc;
}

double sq_dist(const double * a, const double * b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double a, const double * x, double * y, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void matvec(const double * w, const double * x, double * y, size_t out, size_t in) {
    for (size_t o = 0; o < out; ++o) {
        y[o] = dot(w + o * in, x, in);
    }
}

void matvec_t_acc(const double * w, const double * g, double * y, size_t out, size_t in) {
    for (size_t o = 0; o < out; ++o) {
        axpy(g[o], w + o * in, y, in);
    }
}

void rope(double * v, size_t head_dim, double base, int64_t pos, bool inverse) {
    const double p = static_cast<double>(pos);
    for (size_t i = 0; i + 1 < head_dim; i += 2) {
        const double freq  = std::pow(base, -static_cast<double>(i) / static_cast<double>(head_dim));
        double       theta = p * freq;
        if (inverse) {
            theta = -theta;
        }
        const double c  = std::cos(theta);
        const double s  = std::sin(theta);
        const double x0 = v[i];
        const double x1 = v[i + 1];
        v[i]     = x0 * c - x1 * s;
        v[i + 1] = x0 * s + x1 * c;
    }
}

void softmax_inplace(double * s, size_t n) {
    double m = s[0];
    for (size_t i = 1; i < n; ++i) {
        if (s[i] > m) {
            m = s[i];
        }
    }
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
        s[i] = std::exp(s[i] - m);
        z += s[i];
    }
    const double inv = 1.0 / z;
    for (size_t i = 0; i < n; ++i) {
        s[i] *= inv;
    }
}

}  // namespace ts3::kern
