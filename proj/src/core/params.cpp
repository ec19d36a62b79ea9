// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/params.h"

#include "core/common.h"
#include "core/kernels.h"

#include <cmath>

namespace ts3 {

Parameter & ParamStore::create(const std::string & name, std::vector<int64_t> shape) {
    check(by_name_.find(name) == by_name_.end(), ErrCode::invalid_arg, "duplicate parameter name: " + name);
    params_.emplace_back();
    Parameter & p = params_.back();
    p.name        = name;
    p.value       = Tensor::zeros(shape);
    p.grad        = Tensor::zeros(shape);
    by_name_[name] = &p;
    return p;
}

Parameter & ParamStore::create_uniform(const std::string & name, std::vector<int64_t> shape, Rng & rng, double bound) {
    Parameter & p = create(name, std::move(shape));
    for (double & v : p.value.data) {
        v = rng.uniform(-bound, bound);
    }
    return p;
}

Parameter * ParamStore::find(const std::string & name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

const Parameter * ParamStore::find(const std::string & name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

int64_t ParamStore::total_count() const {
    int64_t n = 0;
    for (const Parameter & p : params_) {
        n += p.value.numel();
    }
    return n;
}

void ParamStore::zero_grads() {
    for (Parameter & p : params_) {
        p.zero_grad();
    }
}

void AdamW::step(std::vector<Parameter *> & params, double lr) {
    t_ += 1;
    if (lr == 0.0) {
        return;
    }
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Parameter * p : params) {
        if (p->adam_m.numel() == 0) {
            p->adam_m = Tensor::zeros(p->value.shape);
            p->adam_v = Tensor::zeros(p->value.shape);
        }
        const size_t n  = static_cast<size_t>(p->value.numel());
        double *     w  = p->value.data.data();
        const double * g = p->grad.data.data();
        double *     m  = p->adam_m.data.data();
        double *     v  = p->adam_v.data.data();
        for (size_t i = 0; i < n; ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            w[i] -= lr * (mh / (std::sqrt(vh) + eps_) + weight_decay_ * w[i]);
        }
    }
}

void clip_grad_norm(std::vector<Parameter *> & params, double max_norm) {
    if (max_norm <= 0.0) {
        return;
    }
    double total = 0.0;
    for (Parameter * p : params) {
        const double * g = p->grad.data.data();
        total += kern::dot(g, g, static_cast<size_t>(p->grad.numel()));
    }
    const double norm = std::sqrt(total);
    if (norm <= max_norm) {
        return;
    }
    const double scale = max_norm / norm;
    for (Parameter * p : params) {
        for (double & g : p->grad.data) {
            g *= scale;
        }
    }
}

}  // namespace ts3
