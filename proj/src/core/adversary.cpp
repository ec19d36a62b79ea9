// Copyright 2026 ts3codec authors
//
// Licensed under the Apache License, Version 2.0

#include "core/adversary.h"

#include "core/common.h"
#include "core/fft.h"
#include "core/kernels.h"
#include "core/rng.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace ts3 {

namespace {
constexpr double kMpdSlope    = 0.1;
constexpr double kMsstftSlope = 0.3;
}  // namespace

void DiscriminatorConfig::validate() const {
    check(!mpd_periods.empty(), ErrCode::config, "discriminator: mpd_periods must not be empty");
    for (int64_t p : mpd_periods) {
        check(p >= 1, ErrCode::config, "discriminator: periods must be >= 1");
    }
    check(!mpd_channels.empty(), ErrCode::config, "discriminator: mpd_channels must not be empty");
    for (int64_t c : mpd_channels) {
        check(c >= 1, ErrCode::config, "discriminator: channel widths must be >= 1");
    }
    check(!msstft_windows.empty(), ErrCode::config, "discriminator: msstft_windows must not be empty");
    for (int64_t w : msstft_windows) {
        check(w >= 16 && dsp::is_pow2(static_cast<size_t>(w)), ErrCode::config,
              "discriminator: STFT windows must be powers of two >= 16");
    }
    check(msstft_filters >= 1, ErrCode::config, "discriminator: msstft_filters must be >= 1");
}

std::vector<Var> DiscriminatorOutput::logit_list() const {
    std::vector<Var> out;
    out.reserve(subs.size());
    for (const SubOutput & s : subs) {
        out.push_back(s.logits);
    }
    return out;
}

std::vector<std::vector<Var>> DiscriminatorOutput::feature_lists() const {
    std::vector<std::vector<Var>> out;
    out.reserve(subs.size());
    for (const SubOutput & s : subs) {
        out.push_back(s.features);
    }
    return out;
}

Adversary::ConvWeights Adversary::make_conv(const std::string & name, int64_t cout, int64_t cin, int64_t kh,
                                            int64_t kw, Rng & rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cin * kh * kw));
    ConvWeights  cw;
    cw.v = &ps_.create_uniform(name + ".v", {cout, cin, kh, kw}, rng, bound);
    cw.g = &ps_.create(name + ".g", {cout});
    cw.b = &ps_.create_uniform(name + ".b", {cout}, rng, bound);
    // gains start at the row norms so the effective weight equals v
    const int64_t row = cin * kh * kw;
    for (int64_t o = 0; o < cout; ++o) {
        cw.g->value.at(o) = std::sqrt(kern::dot(cw.v->value.ptr() + o * row, cw.v->value.ptr() + o * row,
                                                static_cast<size_t>(row)));
    }
    return cw;
}

Adversary::Adversary(const DiscriminatorConfig & cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);

    for (int64_t p : cfg_.mpd_periods) {
        SubNet            net;
        const std::string base = "mpd.p" + std::to_string(p) + ".";
        int64_t           cin  = 1;
        int64_t           idx  = 0;
        for (int64_t cout : cfg_.mpd_channels) {
            net.convs.push_back(make_conv(base + "conv" + std::to_string(idx), cout, cin, 5, 1, rng));
            cin = cout;
            idx += 1;
        }
        net.convs.push_back(make_conv(base + "conv" + std::to_string(idx), cin, cin, 5, 1, rng));
        net.post = make_conv(base + "post", 1, cin, 3, 1, rng);
        mpd_subs_.push_back(std::move(net));
    }

    for (int64_t w : cfg_.msstft_windows) {
        SubNet            net;
        const std::string base = "msstft.w" + std::to_string(w) + ".";
        const int64_t     f    = cfg_.msstft_filters;
        net.convs.push_back(make_conv(base + "conv0", f, 2, 9, 3, rng));
        int64_t idx = 1;
        for (int64_t dil : {1, 2, 4}) {
            (void)dil;
            net.convs.push_back(make_conv(base + "conv" + std::to_string(idx), f, f, 9, 3, rng));
            idx += 1;
        }
        net.convs.push_back(make_conv(base + "conv4", f, f, 3, 3, rng));
        net.post = make_conv(base + "post", 1, f, 3, 3, rng);
        stft_subs_.push_back(std::move(net));
    }
}

std::vector<Parameter *> Adversary::parameters() const {
    std::vector<Parameter *> out;
    for (const Parameter & p : ps_.all()) {
        out.push_back(const_cast<Parameter *>(&p));
    }
    return out;
}

Var Adversary::run_conv(Tape & t, Var x, const ConvWeights & cw, const Conv2dSpec & spec, bool own_params) const {
    Var v = own_params ? t.param(*cw.v) : t.constant(cw.v->value);
    Var g = own_params ? t.param(*cw.g) : t.constant(cw.g->value);
    Var b = own_params ? t.param(*cw.b) : t.constant(cw.b->value);
    return t.conv2d(x, t.weight_norm(v, g), b, spec);
}

DiscriminatorOutput Adversary::mpd_forward(Tape & t, Var wave, bool own_params) const {
    check(wave.val().ndim() == 1, ErrCode::invalid_arg, "discriminator: expects a 1-D waveform");
    check(wave.val().all_finite(), ErrCode::invalid_arg, "discriminator: non-finite waveform");

    DiscriminatorOutput out;
    for (size_t s = 0; s < mpd_subs_.size(); ++s) {
        const SubNet & net = mpd_subs_[s];
        SubOutput      sub;
        Var            x = t.period_fold(wave, cfg_.mpd_periods[s]);
        for (size_t i = 0; i < net.convs.size(); ++i) {
            Conv2dSpec spec;
            spec.pad_h = 2;
            // the added same-width stage walks at stride 1
            spec.stride_h = i + 1 < net.convs.size() ? 3 : 1;
            x             = t.leaky_relu(run_conv(t, x, net.convs[i], spec, own_params), kMpdSlope);
            sub.features.push_back(x);
        }
        Conv2dSpec post;
        post.pad_h = 1;
        sub.logits = run_conv(t, x, net.post, post, own_params);
        out.subs.push_back(std::move(sub));
    }
    return out;
}

DiscriminatorOutput Adversary::msstft_forward(Tape & t, Var wave, bool own_params) const {
    check(wave.val().ndim() == 1, ErrCode::invalid_arg, "discriminator: expects a 1-D waveform");
    check(wave.val().all_finite(), ErrCode::invalid_arg, "discriminator: non-finite waveform");
    const int64_t largest = *std::max_element(cfg_.msstft_windows.begin(), cfg_.msstft_windows.end());
    check(wave.val().numel() >= largest, ErrCode::invalid_arg,
          "discriminator: waveform of " + std::to_string(wave.val().numel()) +
              " samples is shorter than the largest STFT window (" + std::to_string(largest) + " samples)");

    DiscriminatorOutput out;
    for (size_t s = 0; s < stft_subs_.size(); ++s) {
        const SubNet & net = stft_subs_[s];
        const int64_t  w   = cfg_.msstft_windows[s];
        SubOutput      sub;
        Var            x = t.stft_ri(wave, w, w / 4);  // [2, frames, bins]

        Conv2dSpec first;
        first.pad_h = 4;
        first.pad_w = 1;
        x = t.leaky_relu(run_conv(t, x, net.convs[0], first, own_params), kMsstftSlope);
        sub.features.push_back(x);

        int64_t dil = 1;
        for (size_t i = 1; i + 1 < net.convs.size(); ++i) {
            Conv2dSpec spec;
            spec.stride_h = 2;
            spec.dil_h    = dil;
            spec.pad_h    = 4 * dil;
            spec.pad_w    = 1;
            x             = t.leaky_relu(run_conv(t, x, net.convs[i], spec, own_params), kMsstftSlope);
            sub.features.push_back(x);
            dil *= 2;
        }

        Conv2dSpec last;
        last.pad_h = 1;
        last.pad_w = 1;
        x = t.leaky_relu(run_conv(t, x, net.convs.back(), last, own_params), kMsstftSlope);
        sub.features.push_back(x);

        Conv2dSpec post;
        post.pad_h = 1;
        post.pad_w = 1;
        sub.logits = run_conv(t, x, net.post, post, own_params);
        out.subs.push_back(std::move(sub));
    }
    return out;
}

DiscriminatorOutput Adversary::forward(Tape & t, Var wave, bool own_params) const {
    DiscriminatorOutput out = mpd_forward(t, wave, own_params);
    DiscriminatorOutput ms  = msstft_forward(t, wave, own_params);
    for (SubOutput & s : ms.subs) {
        out.subs.push_back(std::move(s));
    }
    return out;
}

}  // namespace ts3
