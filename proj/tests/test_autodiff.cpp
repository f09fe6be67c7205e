// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "deshade/autodiff.hpp"
#include "deshade/nn.hpp"

using namespace deshade;

namespace {

Tensor<double> random_tensor(Shape s, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Tensor<double> t(s);
    for (auto& v : t.data) v = d(rng);
    return t;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

// Central finite differences against analytic gradients for every element
// of every leaf. make_loss rebuilds the graph from current leaf values.
template <class MakeLoss>
void fd_check(std::vector<Var<double>> leaves, MakeLoss make_loss,
              double tol = 1e-5, double h = 1e-6) {
    auto loss = make_loss();
    for (auto& l : leaves) l->zero_grad();
    backward(loss);
    for (auto& leaf : leaves) {
        leaf->ensure_grad();
        for (std::size_t i = 0; i < leaf->value.data.size(); ++i) {
            const double orig = leaf->value.data[i];
            leaf->value.data[i] = orig + h;
            const double up = make_loss()->scalar();
            leaf->value.data[i] = orig - h;
            const double dn = make_loss()->scalar();
            leaf->value.data[i] = orig;
            const double fd = (up - dn) / (2 * h);
            const double an = leaf->grad.data[i];
            INFO("leaf ", leaf->name, " idx ", i, " fd ", fd, " analytic ", an);
            CHECK(rel_err(fd, an) < tol);
        }
    }
}

}  // namespace

TEST_CASE("conv2d gradients (stride, dilation, padding)") {
    std::mt19937_64 rng(7);
    for (auto [stride, dil, pad] : {std::tuple{1, 1, 1}, {2, 1, 1}, {1, 2, 2}}) {
        auto x = make_var(random_tensor({5, 6, 2, 1}, rng), true, "x");
        auto w = make_var(random_tensor({3, 3, 2, 3}, rng), true, "w");
        auto b = make_var(random_tensor({1, 1, 3, 1}, rng), true, "b");
        fd_check({x, w, b}, [&] {
            return ops::mean_abs_diff(
                ops::sigmoid(ops::conv2d(x, w, b, stride, dil, pad)),
                make_var(Tensor<double>(
                    ops::conv2d(x, w, b, stride, dil, pad)->value.shape, 0.3)));
        });
    }
}

TEST_CASE("conv2d output geometry") {
    std::mt19937_64 rng(3);
    auto x = make_var(random_tensor({8, 8, 1, 1}, rng));
    auto w = make_var(random_tensor({3, 3, 1, 1}, rng));
    auto b = make_var(Tensor<double>(1, 1, 1));
    // same-padding at dilation d keeps spatial dims
    for (int d : {1, 2, 4}) {
        auto y = ops::conv2d(x, w, b, 1, d, d);
        CHECK(y->value.shape.h == 8);
        CHECK(y->value.shape.w == 8);
    }
    // stride 2, k4, pad 1 halves the extent
    auto w4 = make_var(random_tensor({4, 4, 1, 1}, rng));
    auto y = ops::conv2d(x, w4, b, 2, 1, 1);
    CHECK(y->value.shape.h == 4);
}

TEST_CASE("dilated convolution shifts an impulse by the dilation") {
    for (int d : {1, 2, 4}) {
        Tensor<double> xt(16, 16, 1);
        xt.at(8, 8, 0) = 1.0;
        Tensor<double> wt(Shape{3, 3, 1, 1});
        wt.at(0, 0, 0, 0) = 1.0;  // single corner tap
        auto y = ops::conv2d(make_var(xt), make_var(wt),
                             make_var(Tensor<double>(1, 1, 1)), 1, d, d);
        for (int yy = 0; yy < 16; ++yy)
            for (int xx = 0; xx < 16; ++xx) {
                const bool hit = (yy == 8 + d && xx == 8 + d);
                CHECK(y->value.at(yy, xx, 0) == (hit ? 1.0 : 0.0));
            }
    }
}

TEST_CASE("instance_norm gradients and zero-mean property") {
    std::mt19937_64 rng(11);
    auto x = make_var(random_tensor({4, 5, 3, 1}, rng), true, "x");
    auto g = make_var(Tensor<double>(1, 1, 3, 1.0), true, "gamma");
    auto be = make_var(Tensor<double>(1, 1, 3, 0.0), true, "beta");
    auto y = ops::instance_norm(x, g, be);
    for (int c = 0; c < 3; ++c) {
        double mean = 0;
        for (int i = 0; i < 20; ++i) mean += y->value.data[i * 3 + c];
        CHECK(std::abs(mean / 20) < 1e-12);
    }
    fd_check({x, g, be}, [&] {
        return ops::mean_abs_diff(
            ops::sigmoid(ops::instance_norm(x, g, be)),
            make_var(Tensor<double>(x->value.shape, 0.4)));
    }, 1e-4);
}

TEST_CASE("activation and resampling gradients") {
    std::mt19937_64 rng(13);
    auto x = make_var(random_tensor({6, 6, 2, 1}, rng), true, "x");
    fd_check({x}, [&] {
        auto y = ops::leaky_relu(x, 0.2);
        y = ops::avg_pool(y, 2);
        y = ops::bilinear_resize(y, 6, 6);
        y = ops::sigmoid(y);
        return ops::mean_abs_diff(y, make_var(Tensor<double>(y->value.shape, 0.2)));
    }, 1e-4);
}

TEST_CASE("avg_pool computes block means") {
    // 4x4 checkerboard: every 2x2 block mean is 0.5
    Tensor<double> t(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) t.at(y, x, 0) = (y + x) % 2;
    auto p = ops::avg_pool(make_var(t), 2);
    for (auto v : p->value.data) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("gate, channel_scale, concat, global pool gradients") {
    std::mt19937_64 rng(17);
    auto x = make_var(random_tensor({4, 4, 3, 1}, rng), true, "x");
    auto a1 = make_var(random_tensor({4, 4, 1, 1}, rng), true, "att1");
    auto a3 = make_var(random_tensor({4, 4, 3, 1}, rng), true, "att3");
    auto s = make_var(random_tensor({1, 1, 3, 1}, rng), true, "scale");
    fd_check({x, a1, a3, s}, [&] {
        auto y = ops::gate(ops::gate(x, a1), a3);
        y = ops::channel_scale(y, ops::sigmoid(s));
        auto z = ops::concat_channels<double>({y, x});
        auto gp = ops::global_avg_pool(z);
        return ops::mean_abs_diff(gp, make_var(Tensor<double>(gp->value.shape, 0.1)));
    }, 1e-4);
}

TEST_CASE("bce_mean matches hand-computed values and gradients") {
    Tensor<double> pred(1, 2, 1);
    pred.data = {0.9, 0.2};
    Tensor<double> target(1, 2, 1);
    target.data = {1.0, 0.0};
    auto p = make_var(pred, true, "p");
    auto loss = ops::bce_mean(p, target);
    CHECK(loss->scalar() == doctest::Approx(0.164252033486018).epsilon(1e-10));
    fd_check({p}, [&] { return ops::bce_mean(p, target); }, 1e-6);
}

TEST_CASE("bce_logits_const values and gradients") {
    Tensor<double> z(1, 2, 1);  // logits 0 -> -log 0.5 per side
    auto zn = make_var(z, true, "z");
    CHECK(ops::bce_logits_const(zn, 1.0)->scalar() ==
          doctest::Approx(std::log(2.0)));
    std::mt19937_64 rng(23);
    auto l = make_var(random_tensor({3, 3, 1, 1}, rng), true, "l");
    fd_check({l}, [&] { return ops::bce_logits_const(l, 1.0); }, 1e-6);
    fd_check({l}, [&] { return ops::bce_logits_const(l, 0.0); }, 1e-6);
}

TEST_CASE("weighted_sum is linear with the given weights") {
    auto a = make_var(Tensor<double>(1, 1, 1, 0.5), true, "a");
    auto b = make_var(Tensor<double>(1, 1, 1, 0.01), true, "b");
    auto c = make_var(Tensor<double>(1, 1, 1, 0.3), true, "c");
    auto s = ops::weighted_sum<double>({{c, 1.0}, {a, 20.0}, {b, 100.0}});
    CHECK(s->scalar() == doctest::Approx(11.3).epsilon(1e-12));
    backward(s);
    CHECK(a->grad.data[0] == doctest::Approx(20.0));
    CHECK(b->grad.data[0] == doctest::Approx(100.0));
    CHECK(c->grad.data[0] == doctest::Approx(1.0));
}

TEST_CASE("squeeze-and-excitation block gradients") {
    std::mt19937_64 rng(29);
    ParamStore<double> ps;
    SqueezeExcite<double> se(ps, "se", rng, 4);
    auto x = make_var(random_tensor({3, 3, 4, 1}, rng), true, "x");
    std::vector<Var<double>> leaves{x};
    for (auto& [k, v] : ps.params) leaves.push_back(v);
    fd_check(leaves, [&] {
        auto y = se(x);
        return ops::mean_abs_diff(ops::sigmoid(y),
                                  make_var(Tensor<double>(y->value.shape, 0.5)));
    }, 1e-4);
}
