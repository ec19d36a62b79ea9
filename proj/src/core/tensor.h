// Copyright 2026 ts3codec authors
// Dense row-major float64 tensor. All model math runs in double so the
// finite-difference gradient checks have headroom.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/common.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace ts3 {

struct Tensor {
    std::vector<int64_t> shape;
    std::vector<double>  data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)), data(static_cast<size_t>(count(shape)), 0.0) {}
    Tensor(std::vector<int64_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        check(count(shape) == static_cast<int64_t>(data.size()), ErrCode::invalid_arg,
              "tensor shape does not match data size");
    }

    static int64_t count(const std::vector<int64_t> & s) {
        int64_t n = 1;
        for (int64_t d : s) {
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }

    static Tensor scalar(double v) {
        Tensor t({1});
        t.data[0] = v;
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int     ndim() const { return static_cast<int>(shape.size()); }

    int64_t dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    double *       ptr() { return data.data(); }
    const double * ptr() const { return data.data(); }

    // Row pointer for 2-D tensors (shape [rows, cols]).
    double * row(int64_t r) { return data.data() + r * shape[1]; }
    const double * row(int64_t r) const { return data.data() + r * shape[1]; }

    double & at(int64_t i) { return data[static_cast<size_t>(i)]; }
    double   at(int64_t i) const { return data[static_cast<size_t>(i)]; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor & o) const { return shape == o.shape; }

    bool all_finite() const;

    std::string shape_str() const;
};

}  // namespace ts3
