// Copyright 2026 ts3codec authors
// Discriminator tests: fold arithmetic, shape regression, determinism,
// finiteness, tone-vs-noise separation, frozen-weight forwards, and a
// full-stack gradient check on a miniature configuration.
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "core/adversary.h"
#include "core/losses.h"
#include "core/rng.h"
#include "gradcheck.h"

#include <cmath>
#include <string>
#include <vector>

using namespace ts3;

namespace {

DiscriminatorConfig desk_config() {
    DiscriminatorConfig c;
    c.mpd_periods    = {2, 3};
    c.mpd_channels   = {4, 8};
    c.msstft_windows = {128, 64};
    c.msstft_filters = 4;
    return c;
}

std::vector<double> noise(size_t n, uint64_t seed, double amp = 0.9) {
    Rng                 rng(seed);
    std::vector<double> w(n);
    for (double & v : w) {
        v = rng.uniform(-amp, amp);
    }
    return w;
}

std::vector<double> tone(size_t n, double hz, double amp) {
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
        w[i] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / 16000.0);
    }
    return w;
}

void check_shape(const Var & v, const std::vector<int64_t> & expect) {
    CHECK(v.val().shape == expect);
}

}  // namespace

TEST_CASE("period fold arithmetic drives the MPD input shapes") {
    // 10 samples fold to 5 columns-of-2, and to 4 rows-of-3 with zero padding
    Tape t;
    Var  x  = t.leaf(Tensor({10}, noise(10, 1)));
    Var  f2 = t.period_fold(x, 2);
    CHECK(f2.val().shape == std::vector<int64_t>{1, 5, 2});
    Var f3 = t.period_fold(x, 3);
    CHECK(f3.val().shape == std::vector<int64_t>{1, 4, 3});
    CHECK(f3.val().at(10) == 0.0);
    CHECK(f3.val().at(11) == 0.0);
}

TEST_CASE("fixed input length gives the fixed feature and logit shapes") {
    const Adversary   adv(desk_config(), 7);
    Tape              t;
    Var               wave = t.leaf(Tensor({1000}, noise(1000, 2)));
    const auto        out  = adv.forward(t, wave, false);
    REQUIRE(out.subs.size() == 4);  // periods {2, 3} then windows {128, 64}

    // MPD period 2: fold 500 rows, strides 3, 3, then 1
    REQUIRE(out.subs[0].features.size() == 3);
    check_shape(out.subs[0].features[0], {4, 167, 2});
    check_shape(out.subs[0].features[1], {8, 56, 2});
    check_shape(out.subs[0].features[2], {8, 56, 2});
    check_shape(out.subs[0].logits, {1, 56, 2});

    // MPD period 3: fold 334 rows
    REQUIRE(out.subs[1].features.size() == 3);
    check_shape(out.subs[1].features[0], {4, 112, 3});
    check_shape(out.subs[1].features[1], {8, 38, 3});
    check_shape(out.subs[1].features[2], {8, 38, 3});
    check_shape(out.subs[1].logits, {1, 38, 3});

    // STFT window 128, hop 32: 28 frames, 65 bins
    REQUIRE(out.subs[2].features.size() == 5);
    check_shape(out.subs[2].features[0], {4, 28, 65});
    check_shape(out.subs[2].features[1], {4, 14, 65});
    check_shape(out.subs[2].features[2], {4, 7, 65});
    check_shape(out.subs[2].features[3], {4, 4, 65});
    check_shape(out.subs[2].features[4], {4, 4, 65});
    check_shape(out.subs[2].logits, {1, 4, 65});

    // STFT window 64, hop 16: 59 frames, 33 bins
    REQUIRE(out.subs[3].features.size() == 5);
    check_shape(out.subs[3].features[0], {4, 59, 33});
    check_shape(out.subs[3].features[1], {4, 30, 33});
    check_shape(out.subs[3].features[2], {4, 15, 33});
    check_shape(out.subs[3].features[3], {4, 8, 33});
    check_shape(out.subs[3].features[4], {4, 8, 33});
    check_shape(out.subs[3].logits, {1, 8, 33});
}

TEST_CASE("outputs are finite and deterministic") {
    const Adversary adv(desk_config(), 11);
    const auto      wave = noise(700, 3, 1.0);  // full-scale input

    Tape t1;
    auto a = adv.forward(t1, t1.leaf(Tensor({700}, wave)), false);
    for (const SubOutput & s : a.subs) {
        CHECK(s.logits.val().all_finite());
        REQUIRE(!s.features.empty());
        for (const Var & f : s.features) {
            CHECK(f.val().all_finite());
        }
    }

    SUBCASE("same instance, same input: identical logits") {
        Tape t2;
        auto b = adv.forward(t2, t2.leaf(Tensor({700}, wave)), false);
        for (size_t s = 0; s < a.subs.size(); ++s) {
            CHECK(a.subs[s].logits.val().data == b.subs[s].logits.val().data);
        }
    }
    SUBCASE("same seed builds identical weights, different seeds do not") {
        const Adversary twin(desk_config(), 11);
        const Adversary other(desk_config(), 12);
        const auto      mine   = adv.parameters();
        const auto      twins  = twin.parameters();
        const auto      others = other.parameters();
        REQUIRE(mine.size() == twins.size());
        bool any_diff = false;
        for (size_t i = 0; i < mine.size(); ++i) {
            CHECK(mine[i]->value.data == twins[i]->value.data);
            any_diff = any_diff || mine[i]->value.data != others[i]->value.data;
        }
        CHECK(any_diff);
    }
    SUBCASE("silence is handled without randomness") {
        Tape t2;
        Tape t3;
        Var  z2 = t2.leaf(Tensor({700}, std::vector<double>(700, 0.0)));
        Var  z3 = t3.leaf(Tensor({700}, std::vector<double>(700, 0.0)));
        auto b  = adv.forward(t2, z2, false);
        auto c  = adv.forward(t3, z3, false);
        for (size_t s = 0; s < b.subs.size(); ++s) {
            CHECK(b.subs[s].logits.val().data == c.subs[s].logits.val().data);
        }
    }
}

TEST_CASE("identical real and fake inputs give zero feature matching") {
    const Adversary adv(desk_config(), 13);
    Tape            t;
    Var             wave = t.leaf(Tensor({900}, noise(900, 4)));
    const auto      real = adv.forward(t, wave, false);
    const auto      fake = adv.forward(t, wave, false);
    CHECK(feature_matching_loss(t, real.feature_lists(), fake.feature_lists()).val().at(0) == 0.0);
}

TEST_CASE("a tone and white noise separate under a random discriminator") {
    const Adversary adv(desk_config(), 17);
    Tape            t;
    const auto      a = adv.forward(t, t.leaf(Tensor({1600}, tone(1600, 1000.0, 0.8))), false);
    const auto      b = adv.forward(t, t.leaf(Tensor({1600}, noise(1600, 5, 0.8))), false);
    for (size_t s = 0; s < a.subs.size(); ++s) {
        CHECK(a.subs[s].logits.val().data != b.subs[s].logits.val().data);
    }
}

TEST_CASE("short waveforms are rejected with the minimum length") {
    const Adversary adv(desk_config(), 19);
    Tape            t;
    Var             wave = t.leaf(Tensor({100}, noise(100, 6)));
    try {
        adv.msstft_forward(t, wave, false);
        FAIL("expected an error");
    } catch (const Error & e) {
        CHECK(std::string(e.what()).find("128") != std::string::npos);
    }
}

TEST_CASE("non-finite waveforms are rejected") {
    const Adversary adv(desk_config(), 23);
    Tape            t;
    auto            w = noise(400, 7);
    w[100]            = std::numeric_limits<double>::quiet_NaN();
    Var wave          = t.leaf(Tensor({400}, w));
    CHECK_THROWS_AS(adv.mpd_forward(t, wave, false), Error);
}

TEST_CASE("frozen forwards leave discriminator weights untouched") {
    Adversary adv(desk_config(), 29);
    adv.params().zero_grads();

    // a grad-bearing waveform stands in for the generator output
    ParamStore  ps;
    Parameter & wave_p = ps.create("wave", {600});
    {
        const auto w = noise(600, 8);
        for (int64_t i = 0; i < 600; ++i) {
            wave_p.value.at(i) = w[static_cast<size_t>(i)];
        }
    }

    Tape t;
    Var  wave = t.param(wave_p);

    SUBCASE("own_params=false routes gradients to the waveform only") {
        auto out = adv.forward(t, wave, false);
        Var  loss;
        for (const Var & l : out.logit_list()) {
            Var m = t.mean_all(t.mul(l, l));
            loss  = loss.defined() ? t.add(loss, m) : m;
        }
        t.backward(loss);
        for (Parameter * p : adv.parameters()) {
            for (int64_t i = 0; i < p->grad.numel(); ++i) {
                CHECK(p->grad.at(i) == 0.0);
            }
        }
        bool wave_touched = false;
        for (int64_t i = 0; i < 600; ++i) {
            wave_touched = wave_touched || wave_p.grad.at(i) != 0.0;
        }
        CHECK(wave_touched);
    }
    SUBCASE("own_params=true reaches the weights") {
        auto out = adv.forward(t, wave, true);
        Var  loss;
        for (const Var & l : out.logit_list()) {
            Var m = t.mean_all(t.mul(l, l));
            loss  = loss.defined() ? t.add(loss, m) : m;
        }
        t.backward(loss);
        bool any = false;
        for (Parameter * p : adv.parameters()) {
            for (int64_t i = 0; i < p->grad.numel(); ++i) {
                any = any || p->grad.at(i) != 0.0;
            }
        }
        CHECK(any);
    }
}

TEST_CASE("full-stack discriminator gradients match finite differences") {
    DiscriminatorConfig cfg;
    cfg.mpd_periods    = {2};
    cfg.mpd_channels   = {2};
    cfg.msstft_windows = {16};
    cfg.msstft_filters = 2;
    Adversary adv(cfg, 31);

    const auto wave   = noise(48, 9, 0.8);
    auto       params = adv.parameters();

    const auto res = testutil::grad_check(
        params,
        [&](Tape & t) {
            Var  w   = t.leaf(Tensor({48}, wave));
            auto out = adv.forward(t, w, true);
            Var  loss;
            for (const Var & l : out.logit_list()) {
                Var m = t.mean_all(t.mul(l, l));
                loss  = loss.defined() ? t.add(loss, m) : m;
            }
            return loss;
        },
        1e-6, 7);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_err < 1e-4);
}
