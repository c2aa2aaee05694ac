#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "edgepress/nn.hpp"
#include "test_util.hpp"

using namespace edgepress;
using testutil::conv_oracle;
using testutil::random_tensor;

TEST_CASE("conv2d identity kernel passes input through") {
    Tensor in = random_tensor(1, 1, 4, 4, 42, 0.0, 1.0);
    ConvLayer layer(1, 1, 1);
    layer.weights.at(0, 0, 1, 1) = 1.0;
    Tensor out = conv2d_forward(in, layer);
    REQUIRE(out.same_shape(in));
    for (std::size_t i = 0; i < in.numel(); ++i) {
        CHECK(out.data[i] == in.data[i]);
    }
}

TEST_CASE("conv2d on zero input yields per-channel bias") {
    Tensor in(2, 3, 5, 6);
    ConvLayer layer(4, 3, 1);
    Tensor wsrc = random_tensor(4, 3, 3, 3, 7);
    layer.weights = wsrc;
    layer.bias = {0.5, -1.25, 0.0, 3.0};
    Tensor out = conv2d_forward(in, layer);
    for (int bi = 0; bi < out.b; ++bi)
        for (int oc = 0; oc < out.c; ++oc)
            for (int y = 0; y < out.h; ++y)
                for (int x = 0; x < out.w; ++x)
                    CHECK(out.at(bi, oc, y, x) == layer.bias[oc]);
}

TEST_CASE("conv2d matches brute-force oracle") {
    SUBCASE("stride 2, 1x2x8x8 -> 1x4x4x4") {
        Tensor in = random_tensor(1, 2, 8, 8, 11);
        ConvLayer layer(4, 2, 2);
        Rng rng(3);
        he_init(layer, rng);
        for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);
        Tensor got = conv2d_forward(in, layer);
        REQUIRE(got.b == 1);
        REQUIRE(got.c == 4);
        REQUIRE(got.h == 4);
        REQUIRE(got.w == 4);
        Tensor want = conv_oracle(in, layer);
        for (std::size_t i = 0; i < got.numel(); ++i) {
            CHECK(std::fabs(got.data[i] - want.data[i]) < 1e-12);
        }
    }
    SUBCASE("assorted shapes and strides up to 2x4x8x8") {
        int seed = 100;
        for (int s : {1, 2}) {
            for (auto [b, c, h, w] : {std::tuple{1, 1, 1, 1}, {1, 1, 5, 7},
                                      {2, 3, 8, 8}, {2, 4, 8, 8}, {1, 2, 3, 8}}) {
                Tensor in = random_tensor(b, c, h, w, seed++);
                ConvLayer layer(3, c, s);
                Rng rng(seed++);
                he_init(layer, rng);
                for (double& bv : layer.bias) bv = rng.uniform(-1.0, 1.0);
                Tensor got = conv2d_forward(in, layer);
                Tensor want = conv_oracle(in, layer);
                REQUIRE(got.same_shape(want));
                double worst = 0.0;
                for (std::size_t i = 0; i < got.numel(); ++i) {
                    worst = std::max(worst, std::fabs(got.data[i] - want.data[i]));
                }
                CHECK(worst < 1e-12);
            }
        }
    }
}

TEST_CASE("conv2d rejects channel mismatch") {
    Tensor in(1, 2, 4, 4);
    ConvLayer layer(1, 3, 1);
    CHECK_THROWS_AS(conv2d_forward(in, layer), std::invalid_argument);
}

TEST_CASE("conv2d_backward zero grad_out yields zero gradients") {
    Tensor in = random_tensor(1, 2, 5, 5, 9);
    ConvLayer layer(3, 2, 1);
    Rng rng(1);
    he_init(layer, rng);
    Tensor go(1, 3, 5, 5);
    ConvGrads grads(layer);
    Tensor gi = conv2d_backward(in, layer, go, grads);
    for (double v : gi.data) CHECK(v == 0.0);
    for (double v : grads.weights.data) CHECK(v == 0.0);
    for (double v : grads.bias) CHECK(v == 0.0);
}

TEST_CASE("conv2d_backward identity kernel: grad_input equals grad_out in the interior") {
    ConvLayer layer(1, 1, 1);
    layer.weights.at(0, 0, 1, 1) = 1.0;
    Tensor in = random_tensor(1, 1, 6, 6, 21);
    Tensor go = random_tensor(1, 1, 6, 6, 22);
    ConvGrads grads(layer);
    Tensor gi = conv2d_backward(in, layer, go, grads);
    for (int y = 1; y < 5; ++y)
        for (int x = 1; x < 5; ++x)
            CHECK(gi.at(0, 0, y, x) == go.at(0, 0, y, x));
}

TEST_CASE("conv2d_backward matches finite differences") {
    // random small layer per the gradient-check protocol: 1x1x5x5 input,
    // 2 filters; every weight/bias/input gradient checked.
    Tensor in = random_tensor(1, 1, 5, 5, 33);
    for (int s : {1, 2}) {
        ConvLayer layer(2, 1, s);
        Rng rng(5 + s);
        he_init(layer, rng);
        for (double& b : layer.bias) b = rng.uniform(-0.3, 0.3);
        const Tensor probe = random_tensor(1, 2, (5 + s - 1) / s, (5 + s - 1) / s, 77);

        auto loss = [&]() {
            Tensor out = conv2d_forward(in, layer);
            double acc = 0.0;
            for (std::size_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
            return acc;
        };
        ConvGrads grads(layer);
        Tensor gi = conv2d_backward(in, layer, probe, grads);

        CHECK(testutil::max_rel_err(layer.weights.data, grads.weights.data, loss) < 1e-4);
        CHECK(testutil::max_rel_err(layer.bias, grads.bias, loss) < 1e-4);
        CHECK(testutil::max_rel_err(in.data, gi.data, loss) < 1e-4);
    }
}

TEST_CASE("relu forward and backward") {
    Tensor x(1, 1, 1, 3);
    x.data = {-1.0, 0.0, 2.0};
    Tensor y = relu_forward(x);
    CHECK(y.data[0] == 0.0);
    CHECK(y.data[1] == 0.0);
    CHECK(y.data[2] == 2.0);

    Tensor go(1, 1, 1, 3);
    go.data = {5.0, 5.0, 5.0};
    Tensor gx = relu_backward(x, go);
    CHECK(gx.data[0] == 0.0);
    CHECK(gx.data[1] == 0.0);  // subgradient at 0 fixed to 0
    CHECK(gx.data[2] == 5.0);

    Tensor allneg = random_tensor(1, 2, 3, 3, 3, -2.0, -0.1);
    for (double v : relu_forward(allneg).data) CHECK(v == 0.0);

    Tensor allpos = random_tensor(1, 2, 3, 3, 4, 0.1, 2.0);
    Tensor fwd = relu_forward(allpos);
    for (std::size_t i = 0; i < fwd.numel(); ++i) CHECK(fwd.data[i] == allpos.data[i]);
    Tensor g2 = random_tensor(1, 2, 3, 3, 5);
    Tensor back = relu_backward(allpos, g2);
    for (std::size_t i = 0; i < back.numel(); ++i) CHECK(back.data[i] == g2.data[i]);
}

TEST_CASE("pixel_shuffle_x2 layout") {
    Tensor x(1, 4, 1, 1);
    x.data = {1.0, 2.0, 3.0, 4.0};  // (a,b,c,d)
    Tensor y = pixel_shuffle_x2(x);
    REQUIRE(y.c == 1);
    REQUIRE(y.h == 2);
    REQUIRE(y.w == 2);
    CHECK(y.at(0, 0, 0, 0) == 1.0);
    CHECK(y.at(0, 0, 0, 1) == 2.0);
    CHECK(y.at(0, 0, 1, 0) == 3.0);
    CHECK(y.at(0, 0, 1, 1) == 4.0);
}

TEST_CASE("pixel_shuffle_x2 inverse pair and constants") {
    Tensor x = random_tensor(1, 8, 3, 5, 6);
    Tensor back = pixel_unshuffle_x2(pixel_shuffle_x2(x));
    REQUIRE(back.same_shape(x));
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(back.data[i] == x.data[i]);

    Tensor c(2, 4, 3, 3);
    c.fill(0.73);
    for (double v : pixel_shuffle_x2(c).data) CHECK(v == 0.73);

    Tensor bad(1, 3, 2, 2);
    CHECK_THROWS_AS(pixel_shuffle_x2(bad), std::invalid_argument);
}

TEST_CASE("adam zero gradient leaves params unchanged") {
    std::vector<double> p = {1.0, -2.0, 0.5};
    std::vector<double> g = {0.0, 0.0, 0.0};
    AdamMoments mom;
    adam_step(p, g, mom, 0, AdamConfig{});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(p[2] == 0.5);
}

TEST_CASE("adam single step matches closed form") {
    // fresh state, g = 1: mhat = 1, vhat = 1, so p -= lr / (1 + eps)
    AdamConfig cfg;
    std::vector<double> p = {1.0};
    std::vector<double> g = {1.0};
    AdamMoments mom;
    adam_step(p, g, mom, 0, cfg);
    const double expected = 1.0 - cfg.lr * 1.0 / (1.0 + cfg.eps);
    CHECK(std::fabs(p[0] - expected) < 1e-12);
    CHECK(std::fabs(p[0] - 0.999) < 1e-6);
}

TEST_CASE("adam two identical steps decrease monotonically") {
    // closed-form two-step oracle with constant gradient
    AdamConfig cfg;
    const double g0 = 0.7;
    std::vector<double> p = {2.0};
    std::vector<double> g = {g0};
    AdamMoments mom;
    adam_step(p, g, mom, 0, cfg);
    const double p1 = p[0];
    adam_step(p, g, mom, 1, cfg);
    const double p2 = p[0];
    CHECK(p1 < 2.0);
    CHECK(p2 < p1);

    // independent two-step recurrence
    double m = 0.0, v = 0.0, q = 2.0;
    for (int t = 1; t <= 2; ++t) {
        m = cfg.beta1 * m + (1 - cfg.beta1) * g0;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g0 * g0;
        const double mhat = m / (1 - std::pow(cfg.beta1, t));
        const double vhat = v / (1 - std::pow(cfg.beta2, t));
        q -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    CHECK(std::fabs(p2 - q) < 1e-15);
}

TEST_CASE("he_init determinism, zero bias, bound") {
    ConvLayer a(4, 64, 1), b(4, 64, 1);
    Rng r1(1234), r2(1234);
    a.bias.assign(a.bias.size(), 9.0);
    he_init(a, r1);
    he_init(b, r2);
    for (std::size_t i = 0; i < a.weights.numel(); ++i) {
        CHECK(a.weights.data[i] == b.weights.data[i]);
    }
    for (double v : a.bias) CHECK(v == 0.0);

    const double bound = std::sqrt(6.0 / (9.0 * 64.0));
    for (double v : a.weights.data) {
        CHECK(std::fabs(v) <= bound);
    }
}

TEST_CASE("engine determinism and finiteness") {
    Tensor in = random_tensor(2, 4, 8, 8, 55, 0.0, 1.0);
    ConvLayer layer(4, 4, 2);
    Rng rng(99);
    he_init(layer, rng);
    Tensor o1 = conv2d_forward(in, layer);
    Tensor o2 = conv2d_forward(in, layer);
    for (std::size_t i = 0; i < o1.numel(); ++i) CHECK(o1.data[i] == o2.data[i]);
    CHECK(testutil::all_finite(o1));
    CHECK(testutil::all_finite(relu_forward(o1)));
    CHECK(testutil::all_finite(pixel_shuffle_x2(o1)));
}
