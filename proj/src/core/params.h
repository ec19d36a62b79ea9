// Copyright 2026 ts3codec authors
// Named learnable parameters, their gradient buffers, and the AdamW update.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "core/rng.h"
#include "core/tensor.h"

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ts3 {

struct Parameter {
    std::string name;
    Tensor      value;
    Tensor      grad;    // same shape, zeroed between steps
    Tensor      adam_m;  // allocated by the optimizer on first use
    Tensor      adam_v;

    void zero_grad() { grad.fill(0.0); }
};

// Owns parameters in creation order. Deque storage keeps Parameter pointers
// stable as modules register themselves.
class ParamStore {
public:
    Parameter & create(const std::string & name, std::vector<int64_t> shape);

    // uniform(-bound, bound) init, the convention used for all linear maps
    Parameter & create_uniform(const std::string & name, std::vector<int64_t> shape, Rng & rng, double bound);

    Parameter *       find(const std::string & name);
    const Parameter * find(const std::string & name) const;

    std::deque<Parameter> &       all() { return params_; }
    const std::deque<Parameter> & all() const { return params_; }

    int64_t total_count() const;

    void zero_grads();

private:
    std::deque<Parameter>                        params_;
    std::unordered_map<std::string, Parameter *> by_name_;
};

// Decoupled-weight-decay Adam. Weight decay defaults to zero and the update
// is skipped entirely at lr == 0 so a zero-rate step leaves weights and
// moments bit-identical while still advancing the step counter.
class AdamW {
public:
    AdamW(double beta1, double beta2, double eps = 1e-8, double weight_decay = 0.0)
        : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

    void step(std::vector<Parameter *> & params, double lr);

    int64_t t() const { return t_; }
    void    set_t(int64_t t) { t_ = t; }

    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }

private:
    double  beta1_;
    double  beta2_;
    double  eps_;
    double  weight_decay_;
    int64_t t_ = 0;
};

// Global L2 norm clip over a parameter group; no-op when max_norm <= 0.
void clip_grad_norm(std::vector<Parameter *> & params, double max_norm);

}  // namespace ts3
