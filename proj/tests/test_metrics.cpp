// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "deshade/metrics.hpp"

using namespace deshade;
using namespace deshade::metrics;

namespace {

Image random_image(int h, int w, int c, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    Image t(h, w, c);
    for (auto& v : t.data) v = d(rng);
    return t;
}

Image random_mask(int h, int w, std::mt19937_64& rng, double p = 0.5) {
    std::bernoulli_distribution d(p);
    Image m(h, w, 1);
    for (auto& v : m.data) v = d(rng) ? 1.0f : 0.0f;
    return m;
}

}  // namespace

TEST_CASE("BER matches a brute-force pixel loop on random masks") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto pred = random_image(9, 13, 1, rng);
        auto gt = random_mask(9, 13, rng, 0.4);
        auto r = ber(pred, gt);

        std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 13; ++x) {
                const bool p = pred.at(y, x, 0) >= 0.5f;
                const bool g = gt.at(y, x, 0) >= 0.5f;
                tp += p && g;
                tn += !p && !g;
                fp += p && !g;
                fn += !p && g;
            }
        CHECK(r.tp == tp);
        CHECK(r.tn == tn);
        CHECK(r.fp == fp);
        CHECK(r.fn == fn);
        if (tp + fn > 0 && tn + fp > 0) {
            const double expect =
                100.0 * (1.0 - 0.5 * (double(tp) / (tp + fn) +
                                      double(tn) / (tn + fp)));
            CHECK(*r.ber == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("BER frozen example: half the shadow missed, no false alarms") {
    // gt: left half shadow; pred: only the top-left quarter detected
    Image gt(4, 4, 1, 0.0f);
    Image pred(4, 4, 1, 0.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 2; ++x) gt.at(y, x, 0) = 1.0f;
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) pred.at(y, x, 0) = 1.0f;
    auto r = ber(pred, gt);
    CHECK(*r.ber_s == doctest::Approx(50.0));
    CHECK(*r.ber_ns == doctest::Approx(0.0));
    CHECK(*r.ber == doctest::Approx(25.0));
}

TEST_CASE("BER on degenerate ground truth omits the empty side") {
    Image gt(4, 4, 1, 0.0f);  // no shadow at all
    Image pred(4, 4, 1, 0.0f);
    auto r = ber(pred, gt);
    CHECK_FALSE(r.ber.has_value());
    CHECK_FALSE(r.ber_s.has_value());
    REQUIRE(r.ber_ns.has_value());
    CHECK(*r.ber_ns == doctest::Approx(0.0));
}

TEST_CASE("perfect prediction gives zero BER") {
    std::mt19937_64 rng(2);
    auto gt = random_mask(8, 8, rng);
    auto r = ber(gt, gt);
    REQUIRE(r.ber.has_value());
    CHECK(*r.ber == doctest::Approx(0.0));
}

TEST_CASE("LAB error is zero for identical images and splits by region") {
    std::mt19937_64 rng(3);
    auto im = random_image(8, 8, 3, rng);
    Image mask(8, 8, 1, 0.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) mask.at(y, x, 0) = 1.0f;
    auto e = lab_region_error(im, im, mask);
    CHECK(e.n_s == 32);
    CHECK(e.n_ns == 32);
    CHECK(*e.s == doctest::Approx(0.0));
    CHECK(*e.ns == doctest::Approx(0.0));
    CHECK(*e.all == doctest::Approx(0.0));
}

TEST_CASE("LAB error aggregate is the pixel-weighted mix of both regions") {
    std::mt19937_64 rng(4);
    auto a = random_image(6, 10, 3, rng);
    auto b = random_image(6, 10, 3, rng);
    Image mask(6, 10, 1, 0.0f);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 3; ++x) mask.at(y, x, 0) = 1.0f;  // 18 of 60 pixels
    auto e = lab_region_error(a, b, mask);
    const double mixed = (*e.s * 18 + *e.ns * 42) / 60.0;
    CHECK(*e.all == doctest::Approx(mixed).epsilon(1e-12));
    CHECK(*e.s > 0.0);
}

TEST_CASE("LAB error: all-shadow mask leaves the non-shadow entry absent") {
    std::mt19937_64 rng(5);
    auto a = random_image(4, 4, 3, rng);
    auto b = random_image(4, 4, 3, rng);
    Image mask(4, 4, 1, 1.0f);
    auto e = lab_region_error(a, b, mask);
    CHECK(e.n_ns == 0);
    CHECK_FALSE(e.ns.has_value());
    CHECK(*e.s == doctest::Approx(*e.all));
}

TEST_CASE("strict RMS mode is at least the mean-absolute value") {
    std::mt19937_64 rng(6);
    auto a = random_image(8, 8, 3, rng);
    auto b = random_image(8, 8, 3, rng);
    Image mask(8, 8, 1, 1.0f);
    auto ma = lab_region_error(a, b, mask, LabErrorMode::mean_abs);
    auto rm = lab_region_error(a, b, mask, LabErrorMode::rms);
    CHECK(*rm.s >= *ma.s * 0.5);  // sanity: same scale
    CHECK(*rm.s > 0.0);
    // rms of a constant per-pixel error equals the mean-abs value
    Image base(2, 2, 3, 0.5f);
    Image shifted(2, 2, 3, 0.6f);
    Image m2(2, 2, 1, 1.0f);
    auto c1 = lab_region_error(base, shifted, m2, LabErrorMode::mean_abs);
    auto c2 = lab_region_error(base, shifted, m2, LabErrorMode::rms);
    CHECK(*c2.s >= *c1.s - 1e-9);  // Jensen: rms >= mean of abs
}

TEST_CASE("PSNR closed-form value and cap") {
    // uniform 0.1 difference: MSE = 0.01, PSNR = 20 dB
    Image a(8, 8, 3, 0.5f);
    Image b(8, 8, 3, 0.6f);
    Image mask(8, 8, 1, 1.0f);
    CHECK(psnr_region(a, b, mask) == doctest::Approx(20.0).epsilon(1e-5));
    CHECK(psnr_region(a, a, mask) == kPsnrCapDb);
    Image empty(8, 8, 1, 0.0f);
    CHECK_THROWS_AS(psnr_region(a, b, empty), std::runtime_error);
}

TEST_CASE("PSNR ignores pixels outside the mask") {
    Image a(4, 4, 3, 0.5f);
    Image b = a;
    // corrupt only the right half, mask only the left half
    for (int y = 0; y < 4; ++y)
        for (int x = 2; x < 4; ++x)
            for (int c = 0; c < 3; ++c) b.at(y, x, c) = 0.0f;
    Image mask(4, 4, 1, 0.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 2; ++x) mask.at(y, x, 0) = 1.0f;
    CHECK(psnr_region(a, b, mask) == kPsnrCapDb);
}

TEST_CASE("SSIM is 1 for identical images and below 1 otherwise") {
    std::mt19937_64 rng(7);
    auto a = random_image(16, 16, 3, rng);
    Image mask(16, 16, 1, 1.0f);
    CHECK(ssim_region(a, a, mask) == doctest::Approx(1.0).epsilon(1e-12));
    auto b = random_image(16, 16, 3, rng);
    const double s = ssim_region(a, b, mask);
    CHECK(s < 1.0);
    CHECK(s > -1.0);
}

TEST_CASE("separable SSIM filtering matches a direct renormalized 2-d window") {
    // independent oracle: full 11x11 2-d Gaussian window, weights clipped at
    // the border and renormalized, SSIM formula evaluated directly
    std::mt19937_64 rng(8);
    auto a = random_image(8, 8, 1, rng);
    auto b = random_image(8, 8, 1, rng);
    Image mask(8, 8, 1, 1.0f);
    const double got = ssim_region(a, b, mask);

    const int r = 5;
    const double sigma = 1.5;
    double expect = 0;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double wsum = 0, ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= 8 || xx < 0 || xx >= 8) continue;
                    const double w =
                        std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
                    const double va = a.at(yy, xx, 0), vb = b.at(yy, xx, 0);
                    wsum += w;
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            ma /= wsum; mb /= wsum; saa /= wsum; sbb /= wsum; sab /= wsum;
            const double va = saa - ma * ma, vb = sbb - mb * mb;
            const double cov = sab - ma * mb;
            const double c1 = 1e-4, c2 = 9e-4;
            expect += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                      ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    expect /= 64.0;
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("SSIM respects the evaluation mask") {
    std::mt19937_64 rng(9);
    auto a = random_image(12, 12, 3, rng);
    auto b = a;
    for (int c = 0; c < 3; ++c) b.at(0, 0, c) = 1.0f - b.at(0, 0, c);
    Image far(12, 12, 1, 0.0f);
    far.at(11, 11, 0) = 1.0f;  // outside the corrupted window
    CHECK(ssim_region(a, b, far) == doctest::Approx(1.0).epsilon(1e-9));
    Image empty(12, 12, 1, 0.0f);
    CHECK_THROWS_AS(ssim_region(a, b, empty), std::runtime_error);
}
