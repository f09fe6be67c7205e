// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "deshade/dhan.hpp"

using namespace deshade;

namespace {

Tensor<float> random_image(int h, int w, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    Tensor<float> t(h, w, 3);
    for (auto& v : t.data) v = d(rng);
    return t;
}

DhanConfig tiny_config(Variant v = Variant::DHAN) {
    DhanConfig cfg;
    cfg.depth = 2;
    cfg.base_channels = 8;
    cfg.variant = v;
    cfg.extractor = ExtractorConfig::tiny();
    return cfg;
}

}  // namespace

TEST_CASE("hypercolumn stacks RGB with all upsampled stages") {
    // full-width extractor: 3 + 64+128+256+512+512 = 1475 channels
    auto ex = StageExtractor<float>::random_init(ExtractorConfig{}, 3);
    std::mt19937_64 rng(1);
    auto hc = extract_hypercolumn(make_var(random_image(64, 64, rng)), ex);
    CHECK(hc->value.shape.h == 64);
    CHECK(hc->value.shape.w == 64);
    CHECK(hc->value.shape.c == 1475);

    // channel count does not depend on resolution
    auto hc2 = extract_hypercolumn(make_var(random_image(32, 48, rng)), ex);
    CHECK(hc2->value.shape.c == 1475);
    CHECK(hc2->value.shape.h == 32);
    CHECK(hc2->value.shape.w == 48);
}

TEST_CASE("forward preserves resolution, including odd sizes") {
    std::mt19937_64 rng(2);
    DhanModel<float> model(tiny_config(), 7);
    for (auto [h, w] : {std::pair{8, 8}, {33, 47}, {16, 40}}) {
        auto out = model.forward(random_image(h, w, rng));
        CHECK(out.pred->value.shape.h == h);
        CHECK(out.pred->value.shape.w == w);
        CHECK(out.pred->value.shape.c == 3);
        CHECK(out.mask->value.shape.h == h);
        CHECK(out.mask->value.shape.w == w);
        CHECK(out.mask->value.shape.c == 1);
    }
}

TEST_CASE("mask and attention maps live strictly inside (0,1)") {
    std::mt19937_64 rng(3);
    DhanModel<float> model(tiny_config(), 5);
    auto out = model.forward(random_image(16, 16, rng));
    for (auto v : out.mask->value.data) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
    CHECK(out.attentions.size() == 2);  // one per level
    for (auto& att : out.attentions)
        for (auto v : att->value.data) {
            CHECK(v > 0.0f);
            CHECK(v < 1.0f);
        }
}

TEST_CASE("parameter counts nest across the variants") {
    auto can = DhanModel<float>(tiny_config(Variant::CAN), 1);
    auto han = DhanModel<float>(tiny_config(Variant::HAN), 1);
    auto dhan = DhanModel<float>(tiny_config(Variant::DHAN), 1);
    CHECK(can.params.parameter_count() < han.params.parameter_count());
    CHECK(han.params.parameter_count() < dhan.params.parameter_count());

    for (auto& [name, p] : can.params.params) {
        CHECK(name.find(".agg") == std::string::npos);
        CHECK(name.find(".att") == std::string::npos);
    }
    bool han_has_att = false;
    for (auto& [name, p] : han.params.params)
        if (name.find(".att") != std::string::npos) han_has_att = true;
    CHECK_FALSE(han_has_att);
}

TEST_CASE("forcing unit attention reduces the dual network to single-tree") {
    std::mt19937_64 rng(4);
    auto img = random_image(16, 16, rng);

    DhanModel<float> dhan(tiny_config(Variant::DHAN), 9);
    DhanModel<float> han(tiny_config(Variant::HAN), 9);
    // share all overlapping weights (construction-order RNG interleave means
    // same-seed models do not already agree on values)
    for (auto& [name, p] : han.params.params)
        p->value = dhan.params.params.at(name)->value;

    ForwardOpts<float> ones;
    ones.force_attention_ones = true;
    auto od = dhan.forward(img, ones);
    auto oh = han.forward(img);
    REQUIRE(od.pred->value.data.size() == oh.pred->value.data.size());
    for (std::size_t i = 0; i < od.pred->value.data.size(); ++i)
        CHECK(od.pred->value.data[i] == oh.pred->value.data[i]);  // bitwise
    for (std::size_t i = 0; i < od.mask->value.data.size(); ++i)
        CHECK(od.mask->value.data[i] == oh.mask->value.data[i]);

    // with attention enabled the outputs must differ
    auto on = dhan.forward(img);
    bool any_diff = false;
    for (std::size_t i = 0; i < on.pred->value.data.size(); ++i)
        if (on.pred->value.data[i] != oh.pred->value.data[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("same seed builds bitwise-identical models") {
    std::mt19937_64 rng(5);
    auto img = random_image(12, 12, rng);
    DhanModel<float> a(tiny_config(), 33);
    DhanModel<float> b(tiny_config(), 33);
    auto oa = a.forward(img);
    auto ob = b.forward(img);
    for (std::size_t i = 0; i < oa.pred->value.data.size(); ++i)
        CHECK(oa.pred->value.data[i] == ob.pred->value.data[i]);
    for (std::size_t i = 0; i < oa.mask->value.data.size(); ++i)
        CHECK(oa.mask->value.data[i] == ob.mask->value.data[i]);
}

TEST_CASE("non-finite inputs are diagnosed with the failing stage") {
    DhanModel<float> model(tiny_config(), 2);
    Tensor<float> img(8, 8, 3, 0.5f);
    img.at(4, 4, 0) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_WITH_AS(model.forward(img), doctest::Contains("non-finite"),
                         std::runtime_error);
}

TEST_CASE("zeroed channel excitation flattens the attention spatially") {
    std::mt19937_64 rng(6);
    DhanModel<float> model(tiny_config(), 3);
    ForwardOpts<float> zeros;
    zeros.se_override = GateOverride::zeros;
    auto out = model.forward(random_image(16, 16, rng), zeros);
    // attention aggregation sees all-zero features, so only conv bias
    // remains and every mask pixel takes the same value
    const float first = out.mask->value.data[0];
    for (auto v : out.mask->value.data) CHECK(v == first);

    ForwardOpts<float> ones;
    ones.se_override = GateOverride::ones;
    auto o1 = model.forward(random_image(16, 16, rng), ones);
    auto o2 = model.forward(random_image(16, 16, rng));
    CHECK(o1.mask->value.data.size() == o2.mask->value.data.size());
}

TEST_CASE("pyramid scales larger than the input are skipped gracefully") {
    std::mt19937_64 rng(7);
    DhanModel<float> model(tiny_config(), 4);  // scales {2,4,8,16} vs 8x8
    auto out = model.forward(random_image(8, 8, rng));
    CHECK(out.pred->value.shape.h == 8);
    for (auto v : out.pred->value.data) CHECK(std::isfinite(v));
}

TEST_CASE("detection-only mode drops the prediction head") {
    auto cfg = tiny_config();
    cfg.mode = Mode::detection_only;
    DhanModel<float> model(cfg, 8);
    CHECK(model.params.params.find("dhan.head.pred.w") ==
          model.params.params.end());
    std::mt19937_64 rng(8);
    auto out = model.forward(random_image(16, 16, rng));
    CHECK(out.pred == nullptr);
    CHECK(out.mask->value.shape.c == 1);

    DhanModel<float> joint(tiny_config(), 8);
    CHECK(joint.params.parameter_count() > model.params.parameter_count());
}

TEST_CASE("config JSON round trip") {
    auto cfg = tiny_config(Variant::HAN);
    cfg.mode = Mode::detection_only;
    cfg.spp_scales = {2, 4};
    auto back = DhanConfig::from_json(cfg.to_json());
    CHECK(back.depth == cfg.depth);
    CHECK(back.base_channels == cfg.base_channels);
    CHECK(back.variant == cfg.variant);
    CHECK(back.mode == cfg.mode);
    CHECK(back.spp_scales == cfg.spp_scales);
    CHECK(back.extractor.stage_channels == cfg.extractor.stage_channels);
}
