// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "deshade/adversarial.hpp"

using namespace deshade;

namespace {

Tensor<float> random_image(int h, int w, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    Tensor<float> t(h, w, 3);
    for (auto& v : t.data) v = d(rng);
    return t;
}

}  // namespace

TEST_CASE("64x64 input maps to a 3x3 patch-logit grid") {
    std::mt19937_64 rng(1);
    PatchDiscriminator<float> disc(DiscConfig{6, 8}, 11);
    auto out = disc.discriminate(random_image(64, 64, rng),
                                 random_image(64, 64, rng));
    CHECK(out->value.shape.h == 3);
    CHECK(out->value.shape.w == 3);
    CHECK(out->value.shape.c == 1);
}

TEST_CASE("discriminator is deterministic across constructions") {
    std::mt19937_64 rng(2);
    auto cond = random_image(32, 32, rng);
    auto cand = random_image(32, 32, rng);
    PatchDiscriminator<float> a(DiscConfig{6, 8}, 5);
    PatchDiscriminator<float> b(DiscConfig{6, 8}, 5);
    auto oa = a.discriminate(cond, cand)->value;
    auto ob = b.discriminate(cond, cand)->value;
    REQUIRE(oa.data.size() == ob.data.size());
    for (std::size_t i = 0; i < oa.data.size(); ++i)
        CHECK(oa.data[i] == ob.data[i]);  // bitwise

    PatchDiscriminator<float> c(DiscConfig{6, 8}, 6);
    auto oc = c.discriminate(cond, cand)->value;
    bool any_diff = false;
    for (std::size_t i = 0; i < oa.data.size(); ++i)
        if (oa.data[i] != oc.data[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("channel-count mismatch is rejected") {
    PatchDiscriminator<float> disc(DiscConfig{6, 8}, 1);
    Tensor<float> rgb(32, 32, 3, 0.5f);
    Tensor<float> gray(32, 32, 1, 0.5f);
    CHECK_THROWS_AS(disc.discriminate(rgb, gray), std::runtime_error);
}

TEST_CASE("GAN terms at all-zero logits are ln2 and 2 ln2") {
    auto real = make_var(Tensor<float>(3, 3, 1, 0.0f));
    auto fake = make_var(Tensor<float>(3, 3, 1, 0.0f));
    auto t = gan_loss_terms(real, fake);
    CHECK(t.g_term->scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(t.d_term->scalar() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("generator term decreases as fake logits rise") {
    double prev = 1e9;
    for (float z : {-2.0f, -0.5f, 0.0f, 0.5f, 2.0f}) {
        auto fake = make_var(Tensor<float>(2, 2, 1, z));
        auto g = gan_loss_terms(make_var(Tensor<float>(2, 2, 1, 0.0f)), fake)
                     .g_term->scalar();
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("discriminator term rewards separating real from fake") {
    auto mk = [](float r, float f) {
        return gan_loss_terms(make_var(Tensor<float>(1, 1, 1, r)),
                              make_var(Tensor<float>(1, 1, 1, f)))
            .d_term->scalar();
    };
    CHECK(mk(3.0f, -3.0f) < mk(0.0f, 0.0f));   // confident & correct
    CHECK(mk(-3.0f, 3.0f) > mk(0.0f, 0.0f));   // confident & wrong
}

TEST_CASE("one Adam step on the d_term lowers the d_term") {
    std::mt19937_64 rng(3);
    PatchDiscriminator<float> disc(DiscConfig{6, 8}, 21);
    auto cond = random_image(32, 32, rng);
    auto real = random_image(32, 32, rng);
    auto fake = random_image(32, 32, rng);

    auto d_loss = [&] {
        auto t = gan_loss_terms(disc.discriminate(cond, real),
                                disc.discriminate(cond, fake));
        return t.d_term;
    };
    auto before = d_loss();
    disc.params.zero_grad();
    backward(before);
    Adam<float> opt(1e-3f, 0.9f, 0.999f);
    opt.step(disc.params);
    CHECK(d_loss()->scalar() < before->scalar());
}

TEST_CASE("patch map grows with input size at total stride 16") {
    // Four stride-2 stages downsample by 16; the final stride-1 4x4 conv
    // with pad 1 then shrinks by one: an n-pixel input gives n/16 - 1 cells.
    std::mt19937_64 rng(4);
    PatchDiscriminator<float> disc(DiscConfig{6, 8}, 9);
    for (int n : {64, 96, 128}) {
        auto o = disc.discriminate(random_image(n, n, rng),
                                   random_image(n, n, rng))->value;
        CHECK(o.shape.h == n / 16 - 1);
        CHECK(o.shape.w == n / 16 - 1);
    }
}

TEST_CASE("gradients reach every discriminator parameter") {
    std::mt19937_64 rng(5);
    PatchDiscriminator<float> disc(DiscConfig{6, 8}, 13);
    auto t = gan_loss_terms(
        disc.discriminate(random_image(32, 32, rng), random_image(32, 32, rng)),
        disc.discriminate(random_image(32, 32, rng), random_image(32, 32, rng)));
    disc.params.zero_grad();
    backward(t.d_term);
    for (auto& [name, p] : disc.params.params) {
        double norm = 0;
        for (auto g : p->grad.data) norm += std::abs(double(g));
        INFO("param ", name);
        CHECK(norm > 0.0);
    }
}
