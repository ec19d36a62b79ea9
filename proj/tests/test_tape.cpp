// Copyright 2026 ts3codec authors
// Gradient and value tests for every autodiff operation.
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "core/params.h"
#include "core/rng.h"
#include "core/tape.h"
#include "gradcheck.h"

#include <cmath>

using namespace ts3;
using testutil::grad_check;

namespace {

Parameter & make_param(ParamStore & ps, const std::string & name, std::vector<int64_t> shape, Rng & rng,
                       double lo = -1.0, double hi = 1.0) {
    Parameter & p = ps.create(name, std::move(shape));
    for (double & v : p.value.data) {
        v = rng.uniform(lo, hi);
    }
    return p;
}

}  // namespace

TEST_CASE("elementwise op gradients") {
    Rng        rng(1);
    ParamStore ps;
    Parameter &a = make_param(ps, "a", {3, 4}, rng);
    Parameter &b = make_param(ps, "b", {3, 4}, rng);

    SUBCASE("add, sub, mul, scale chain") {
        auto build = [&](Tape & t) {
            Var va = t.param(a);
            Var vb = t.param(b);
            Var s  = t.add(t.mul(va, vb), t.scale(t.sub(va, vb), 0.7));
            return t.mean_all(t.mul(s, s));
        };
        auto r = grad_check({&a, &b}, build);
        CHECK(r.max_rel_err < 1e-6);
        CHECK(r.checked == 24);
    }

    SUBCASE("add_scalar and mse to constant") {
        auto build = [&](Tape & t) {
            Var va = t.param(a);
            return t.mse_loss(t.add_scalar(va, 0.3), t.constant_fill({3, 4}, 0.5));
        };
        CHECK(grad_check({&a}, build).max_rel_err < 1e-6);
    }

    SUBCASE("l1 loss") {
        auto build = [&](Tape & t) { return t.l1_loss(t.param(a), t.param(b)); };
        CHECK(grad_check({&a, &b}, build).max_rel_err < 1e-6);
    }
}

TEST_CASE("nonlinearity gradients") {
    Rng        rng(2);
    ParamStore ps;
    Parameter &a = make_param(ps, "a", {2, 5}, rng);

    SUBCASE("silu") {
        auto build = [&](Tape & t) { return t.mean_all(t.silu(t.scale(t.param(a), 3.0))); };
        CHECK(grad_check({&a}, build).max_rel_err < 1e-6);
    }

    SUBCASE("leaky_relu") {
        auto build = [&](Tape & t) {
            Var y = t.leaky_relu(t.param(a), 0.1);
            return t.mse_loss(y, t.constant_fill({2, 5}, 0.0));
        };
        CHECK(grad_check({&a}, build).max_rel_err < 1e-5);
    }

    SUBCASE("log_shift") {
        Parameter & pos = make_param(ps, "pos", {2, 3}, rng, 0.5, 2.0);
        auto build = [&](Tape & t) { return t.mean_all(t.log_shift(t.param(pos), 1e-5)); };
        CHECK(grad_check({&pos}, build).max_rel_err < 1e-6);
    }
}

TEST_CASE("linear layer values and gradients") {
    Rng        rng(3);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {3, 4}, rng);
    Parameter &w = make_param(ps, "w", {2, 4}, rng);
    Parameter &b = make_param(ps, "b", {2}, rng);

    SUBCASE("value matches manual product") {
        Tape t;
        Var  y = t.linear(t.param(x), t.param(w), t.param(b));
        REQUIRE(y.val().shape == std::vector<int64_t>({3, 2}));
        for (int64_t r = 0; r < 3; ++r) {
            for (int64_t o = 0; o < 2; ++o) {
                double want = b.value.at(o);
                for (int64_t k = 0; k < 4; ++k) {
                    want += x.value.row(r)[k] * w.value.row(o)[k];
                }
                CHECK(y.val().row(r)[o] == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }

    SUBCASE("gradients with bias") {
        auto build = [&](Tape & t) {
            return t.mse_loss(t.linear(t.param(x), t.param(w), t.param(b)), t.constant_fill({3, 2}, 0.1));
        };
        CHECK(grad_check({&x, &w, &b}, build).max_rel_err < 1e-6);
    }

    SUBCASE("gradients bias-free") {
        auto build = [&](Tape & t) {
            return t.mean_all(t.silu(t.linear(t.param(x), t.param(w), Var())));
        };
        CHECK(grad_check({&x, &w}, build).max_rel_err < 1e-6);
    }
}

TEST_CASE("layer_norm normalizes rows and has exact gradients") {
    Rng        rng(4);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {4, 6}, rng, -2.0, 2.0);
    Parameter &g = make_param(ps, "g", {6}, rng, 0.5, 1.5);
    Parameter &b = make_param(ps, "b", {6}, rng);

    SUBCASE("unit affine gives zero mean unit variance rows") {
        Tape      t;
        Parameter one = {"one", Tensor({6}), Tensor({6}), {}, {}};
        one.value.fill(1.0);
        Parameter zero = {"zero", Tensor({6}), Tensor({6}), {}, {}};
        Var y = t.layer_norm(t.param(x), t.param(one), t.param(zero), 1e-6);
        for (int64_t r = 0; r < 4; ++r) {
            double m = 0, v = 0;
            for (int64_t i = 0; i < 6; ++i) {
                m += y.val().row(r)[i];
            }
            m /= 6;
            for (int64_t i = 0; i < 6; ++i) {
                const double d = y.val().row(r)[i] - m;
                v += d * d;
            }
            v /= 6;
            CHECK(m == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
        }
    }

    SUBCASE("gradients") {
        auto build = [&](Tape & t) {
            Var y = t.layer_norm(t.param(x), t.param(g), t.param(b), 1e-6);
            return t.mse_loss(y, t.constant_fill({4, 6}, 0.2));
        };
        CHECK(grad_check({&x, &g, &b}, build).max_rel_err < 1e-5);
    }
}

TEST_CASE("windowed attention") {
    Rng        rng(5);
    ParamStore ps;
    const int64_t n = 5, d = 8, heads = 2, window = 3;
    Parameter &q = make_param(ps, "q", {n, d}, rng);
    Parameter &k = make_param(ps, "k", {n, d}, rng);
    Parameter &v = make_param(ps, "v", {n, d}, rng);

    SUBCASE("gradients through q, k, v") {
        auto build = [&](Tape & t) {
            Var y = t.windowed_attention(t.param(q), t.param(k), t.param(v), heads, window, 10000.0, 0);
            return t.mse_loss(y, t.constant_fill({n, d}, 0.05));
        };
        CHECK(grad_check({&q, &k, &v}, build).max_rel_err < 1e-5);
    }

    SUBCASE("gradients with nonzero position offset") {
        auto build = [&](Tape & t) {
            Var y = t.windowed_attention(t.param(q), t.param(k), t.param(v), heads, window, 10000.0, 123);
            return t.mean_all(y);
        };
        CHECK(grad_check({&q, &k, &v}, build).max_rel_err < 1e-5);
    }

    SUBCASE("causal: changing a later row leaves earlier outputs untouched") {
        Tape t0;
        Var  y0 = t0.windowed_attention(t0.param(q), t0.param(k), t0.param(v), heads, window, 10000.0, 0);
        Tensor before = y0.val();

        const double saved = k.value.row(4)[0];
        k.value.row(4)[0] += 10.0;
        Tape t1;
        Var  y1 = t1.windowed_attention(t1.param(q), t1.param(k), t1.param(v), heads, window, 10000.0, 0);
        k.value.row(4)[0] = saved;

        for (int64_t i = 0; i < 4; ++i) {
            for (int64_t j = 0; j < d; ++j) {
                CHECK(y1.val().row(i)[j] == before.row(i)[j]);  // bit exact
            }
        }
        bool changed = false;
        for (int64_t j = 0; j < d; ++j) {
            changed = changed || y1.val().row(4)[j] != before.row(4)[j];
        }
        CHECK(changed);
    }

    SUBCASE("window: frames older than window-1 do not contribute") {
        Tape t0;
        Var  y0 = t0.windowed_attention(t0.param(q), t0.param(k), t0.param(v), heads, window, 10000.0, 0);
        Tensor before = y0.val();

        // frame 4 attends to {2, 3, 4}; frame 0 is outside its window
        const double saved_k = k.value.row(0)[1];
        const double saved_v = v.value.row(0)[1];
        k.value.row(0)[1] += 5.0;
        v.value.row(0)[1] -= 5.0;
        Tape t1;
        Var  y1 = t1.windowed_attention(t1.param(q), t1.param(k), t1.param(v), heads, window, 10000.0, 0);
        k.value.row(0)[1] = saved_k;
        v.value.row(0)[1] = saved_v;

        for (int64_t j = 0; j < d; ++j) {
            CHECK(y1.val().row(4)[j] == before.row(4)[j]);
            CHECK(y1.val().row(3)[j] == before.row(3)[j]);
        }
        bool changed = false;
        for (int64_t j = 0; j < d; ++j) {
            changed = changed || y1.val().row(0)[j] != before.row(0)[j];
        }
        CHECK(changed);
    }

    SUBCASE("scores depend on relative position only") {
        Tape t;
        Var  y0 = t.windowed_attention(t.param(q), t.param(k), t.param(v), heads, window, 10000.0, 0);
        Var  y1 = t.windowed_attention(t.param(q), t.param(k), t.param(v), heads, window, 10000.0, 512);
        for (int64_t i = 0; i < n * d; ++i) {
            CHECK(y0.val().at(i) == doctest::Approx(y1.val().at(i)).epsilon(1e-9));
        }
    }
}

TEST_CASE("gather_rows scatter-adds gradients for repeated indices") {
    Rng        rng(6);
    ParamStore ps;
    Parameter &table = make_param(ps, "table", {4, 3}, rng);

    const std::vector<int32_t> idx = {2, 0, 2, 2, 1};
    auto build = [&](Tape & t) {
        Var rowsv = t.gather_rows(t.param(table), idx);
        return t.mse_loss(rowsv, t.constant_fill({5, 3}, 0.0));
    };
    CHECK(grad_check({&table}, build).max_rel_err < 1e-6);

    // row 3 is never selected: its gradient must be exactly zero
    table.zero_grad();
    Tape t;
    Var  loss = build(t);
    t.backward(loss);
    for (int64_t i = 0; i < 3; ++i) {
        CHECK(table.grad.row(3)[i] == 0.0);
        CHECK(table.grad.row(2)[i] != 0.0);
    }
}

TEST_CASE("straight_through passes values from e and gradients to z") {
    Rng        rng(7);
    ParamStore ps;
    Parameter &z = make_param(ps, "z", {3, 2}, rng);
    Parameter &e = make_param(ps, "e", {3, 2}, rng);

    Tape t;
    Var  vz = t.param(z);
    Var  ve = t.param(e);
    Var  st = t.straight_through(vz, ve);
    for (int64_t i = 0; i < 6; ++i) {
        CHECK(st.val().at(i) == e.value.at(i));
    }
    Var loss = t.mse_loss(st, t.constant_fill({3, 2}, 0.0));
    z.zero_grad();
    e.zero_grad();
    t.backward(loss);
    for (int64_t i = 0; i < 6; ++i) {
        CHECK(e.grad.at(i) == 0.0);  // exactly zero, not approximately
        CHECK(z.grad.at(i) == doctest::Approx(2.0 * e.value.at(i) / 6.0).epsilon(1e-12));
    }
}

TEST_CASE("constants receive no gradient") {
    Rng        rng(8);
    ParamStore ps;
    Parameter &a = make_param(ps, "a", {2, 2}, rng);

    Tape   t;
    Tensor cval({2, 2}, {1.0, 2.0, 3.0, 4.0});
    Var    c    = t.constant(cval);
    Var    loss = t.mean_all(t.mul(t.param(a), c));
    a.zero_grad();
    t.backward(loss);
    for (int64_t i = 0; i < 4; ++i) {
        CHECK(a.grad.at(i) == doctest::Approx(cval.at(i) / 4.0).epsilon(1e-12));
    }
    CHECK_FALSE(c.node()->needs_grad);
}

TEST_CASE("weight_norm") {
    Rng        rng(9);
    ParamStore ps;
    Parameter &v = make_param(ps, "v", {3, 4}, rng, 0.2, 1.0);
    Parameter &g = make_param(ps, "g", {3}, rng, 0.5, 2.0);

    SUBCASE("row norms equal the gains") {
        Tape t;
        Var  w = t.weight_norm(t.param(v), t.param(g));
        for (int64_t o = 0; o < 3; ++o) {
            double n2 = 0;
            for (int64_t i = 0; i < 4; ++i) {
                n2 += w.val().row(o)[i] * w.val().row(o)[i];
            }
            CHECK(std::sqrt(n2) == doctest::Approx(std::abs(g.value.at(o))).epsilon(1e-12));
        }
    }

    SUBCASE("gradients") {
        auto build = [&](Tape & t) {
            Var w = t.weight_norm(t.param(v), t.param(g));
            return t.mse_loss(w, t.constant_fill({3, 4}, 0.3));
        };
        CHECK(grad_check({&v, &g}, build).max_rel_err < 1e-5);
    }
}

TEST_CASE("conv2d") {
    Rng        rng(10);
    ParamStore ps;

    SUBCASE("1x1 kernel equals a pointwise linear map") {
        Parameter &x = make_param(ps, "x", {2, 3, 3}, rng);
        Parameter &w = make_param(ps, "w", {1, 2, 1, 1}, rng);
        Tape t;
        Var  y = t.conv2d(t.param(x), t.param(w), Var(), {});
        REQUIRE(y.val().shape == std::vector<int64_t>({1, 3, 3}));
        for (int64_t i = 0; i < 9; ++i) {
            const double want = x.value.at(i) * w.value.at(0) + x.value.at(9 + i) * w.value.at(1);
            CHECK(y.val().at(i) == doctest::Approx(want).epsilon(1e-12));
        }
    }

    SUBCASE("known 1-channel case with padding") {
        // x = [[1, 2], [3, 4]], w = [[1, 1], [1, 1]], pad 1: y[0][0] = 1
        Parameter &x = make_param(ps, "x2", {1, 2, 2}, rng);
        x.value.data = {1, 2, 3, 4};
        Parameter &w = make_param(ps, "w2", {1, 1, 2, 2}, rng);
        w.value.fill(1.0);
        Tape       t;
        Conv2dSpec spec;
        spec.pad_h = 1;
        spec.pad_w = 1;
        Var y = t.conv2d(t.param(x), t.param(w), Var(), spec);
        REQUIRE(y.val().shape == std::vector<int64_t>({1, 3, 3}));
        CHECK(y.val().at(0) == 1.0);   // top-left corner sees only x[0][0]
        CHECK(y.val().at(4) == 10.0);  // center sees all four
        CHECK(y.val().at(8) == 4.0);   // bottom-right corner sees only x[1][1]
    }

    SUBCASE("gradients with stride, padding, dilation and bias") {
        Parameter &x = make_param(ps, "x3", {2, 5, 6}, rng);
        Parameter &w = make_param(ps, "w3", {3, 2, 2, 3}, rng);
        Parameter &b = make_param(ps, "b3", {3}, rng);
        Conv2dSpec spec;
        spec.stride_h = 2;
        spec.stride_w = 1;
        spec.pad_h    = 1;
        spec.pad_w    = 2;
        spec.dil_h    = 1;
        spec.dil_w    = 2;
        auto build = [&](Tape & t) {
            Var y = t.conv2d(t.param(x), t.param(w), t.param(b), spec);
            return t.mean_all(t.leaky_relu(y, 0.2));
        };
        CHECK(grad_check({&x, &w, &b}, build).max_rel_err < 1e-5);
    }
}

TEST_CASE("period_fold pads with zeros and routes gradients back") {
    Rng        rng(11);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {7}, rng);

    Tape t;
    Var  y = t.period_fold(t.param(x), 3);
    REQUIRE(y.val().shape == std::vector<int64_t>({1, 3, 3}));
    for (int64_t i = 0; i < 7; ++i) {
        CHECK(y.val().at(i) == x.value.at(i));
    }
    CHECK(y.val().at(7) == 0.0);
    CHECK(y.val().at(8) == 0.0);

    auto build = [&](Tape & t2) {
        return t2.mse_loss(t2.period_fold(t2.param(x), 3), t2.constant_fill({1, 3, 3}, 0.1));
    };
    CHECK(grad_check({&x}, build).max_rel_err < 1e-6);
}

TEST_CASE("stft_ri matches a direct windowed DFT") {
    Rng        rng(12);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {40}, rng);

    const int64_t fft = 16, hop = 8;
    Tape t;
    Var  y = t.stft_ri(t.param(x), fft, hop);
    const int64_t frames = 1 + (40 - fft) / hop;
    const int64_t bins   = fft / 2 + 1;
    REQUIRE(y.val().shape == std::vector<int64_t>({2, frames, bins}));

    for (int64_t f = 0; f < frames; ++f) {
        for (int64_t k = 0; k < bins; ++k) {
            double er = 0, ei = 0;
            for (int64_t i = 0; i < fft; ++i) {
                const double wv = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / static_cast<double>(fft));
                const double a  = -2.0 * M_PI * static_cast<double>(k * i) / static_cast<double>(fft);
                er += x.value.at(f * hop + i) * wv * std::cos(a);
                ei += x.value.at(f * hop + i) * wv * std::sin(a);
            }
            CHECK(y.val().at((0 * frames + f) * bins + k) == doctest::Approx(er).epsilon(1e-9));
            CHECK(y.val().at((1 * frames + f) * bins + k) == doctest::Approx(ei).epsilon(1e-9));
        }
    }

    auto build = [&](Tape & t2) {
        Var s = t2.stft_ri(t2.param(x), fft, hop);
        return t2.mse_loss(s, t2.constant_fill({2, frames, bins}, 0.05));
    };
    CHECK(grad_check({&x}, build).max_rel_err < 1e-5);
}

TEST_CASE("magnitude gradients and spectral loss chain") {
    Rng        rng(13);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {32}, rng, 0.1, 1.0);

    auto build = [&](Tape & t) {
        Var s   = t.stft_ri(t.param(x), 16, 4);
        Var mag = t.magnitude(s);
        Var lg  = t.log_shift(mag, 1e-5);
        return t.mean_all(lg);
    };
    CHECK(grad_check({&x}, build).max_rel_err < 1e-4);
}

TEST_CASE("reshape keeps data and gradients aligned") {
    Rng        rng(14);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {2, 6}, rng);

    auto build = [&](Tape & t) {
        Var y = t.reshape(t.param(x), {3, 4});
        return t.mse_loss(y, t.constant_fill({3, 4}, 0.25));
    };
    CHECK(grad_check({&x}, build).max_rel_err < 1e-6);
}

TEST_CASE("untouched branches contribute no gradient") {
    Rng        rng(15);
    ParamStore ps;
    Parameter &a = make_param(ps, "a", {2, 2}, rng);
    Parameter &b = make_param(ps, "b", {2, 2}, rng);

    Tape t;
    Var  used   = t.mean_all(t.silu(t.param(a)));
    Var  unused = t.mean_all(t.silu(t.param(b)));
    (void) unused;
    a.zero_grad();
    b.zero_grad();
    t.backward(used);
    bool a_has = false;
    for (double g : a.grad.data) {
        a_has = a_has || g != 0.0;
    }
    CHECK(a_has);
    for (double g : b.grad.data) {
        CHECK(g == 0.0);
    }
}

TEST_CASE("two identical builds produce bit-identical losses") {
    Rng        rng(16);
    ParamStore ps;
    Parameter &x = make_param(ps, "x", {4, 8}, rng);
    Parameter &w = make_param(ps, "w", {8, 8}, rng);

    auto run = [&]() {
        Tape t;
        Var  q = t.linear(t.param(x), t.param(w), Var());
        Var  y = t.windowed_attention(q, q, q, 2, 4, 10000.0, 0);
        return t.mse_loss(y, t.constant_fill({4, 8}, 0.0)).val().at(0);
    };
    CHECK(run() == run());
}
