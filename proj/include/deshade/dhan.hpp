// SPDX-License-Identifier: Apache-2.0
//
// Dual Hierarchical Aggregation Network: a growth-dilated backbone with no
// down-sampling on the main path, a tree of feature aggregation nodes gated
// by a matching tree of sigmoid attention aggregation nodes, a spatial
// pooling pyramid, and image/mask heads.
#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deshade/extractor.hpp"
#include "deshade/nn.hpp"

namespace deshade {

enum class Variant { CAN, HAN, DHAN };
enum class Mode { removal_joint, detection_only };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::CAN: return "can";
        case Variant::HAN: return "han";
        default: return "dhan";
    }
}
inline Variant variant_from_string(const std::string& s) {
    if (s == "can") return Variant::CAN;
    if (s == "han") return Variant::HAN;
    if (s == "dhan") return Variant::DHAN;
    throw std::runtime_error("unknown variant: " + s);
}

struct DhanConfig {
    int depth = 6;
    int base_channels = 64;
    Variant variant = Variant::DHAN;
    double leaky_slope = 0.2;
    std::vector<int> spp_scales{2, 4, 8, 16};
    int matte_channels = 3;
    Mode mode = Mode::removal_joint;
    ExtractorConfig extractor;

    void validate() const {
        require(depth >= 1, "DhanConfig: depth must be >= 1");
        require(base_channels >= 1, "DhanConfig: base_channels must be >= 1");
        require(extractor.stage_channels.size() == 5,
                "DhanConfig: extractor must expose 5 stages");
    }

    nlohmann::json to_json() const {
        return {{"depth", depth},
                {"base_channels", base_channels},
                {"variant", to_string(variant)},
                {"leaky_slope", leaky_slope},
                {"spp_scales", spp_scales},
                {"matte_channels", matte_channels},
                {"mode", mode == Mode::removal_joint ? "removal" : "detect"},
                {"extractor_channels", extractor.stage_channels}};
    }
    static DhanConfig from_json(const nlohmann::json& j) {
        DhanConfig c;
        c.depth = j.at("depth");
        c.base_channels = j.at("base_channels");
        c.variant = variant_from_string(j.at("variant"));
        c.leaky_slope = j.at("leaky_slope");
        c.spp_scales = j.at("spp_scales").get<std::vector<int>>();
        c.matte_channels = j.at("matte_channels");
        c.mode = j.at("mode") == "detect" ? Mode::detection_only
                                          : Mode::removal_joint;
        c.extractor.stage_channels =
            j.at("extractor_channels").get<std::vector<int>>();
        return c;
    }
};

template <class T>
struct ForwardOpts {
    GateOverride se_override = GateOverride::none;
    // Replaces every attention map with ones; with shared parameters this
    // makes the DHAN forward coincide with HAN.
    bool force_attention_ones = false;
};

// Upsample every extractor stage to the input resolution and concatenate
// with the raw RGB input. Channel count is 3 + sum of stage widths.
template <class T>
Var<T> extract_hypercolumn(const Var<T>& rgb, const StageExtractor<T>& extractor) {
    const int h = rgb->value.shape.h, w = rgb->value.shape.w;
    require(rgb->value.shape.c == 3, "extract_hypercolumn: input must be RGB");
    std::vector<Var<T>> parts{rgb};
    for (auto& tap : extractor.stages(rgb)) {
        if (tap->value.shape.h == h && tap->value.shape.w == w)
            parts.push_back(tap);
        else
            parts.push_back(ops::bilinear_resize(tap, h, w));
    }
    return ops::concat_channels(parts);
}

template <class T>
class DhanModel {
public:
    DhanConfig cfg;
    ParamStore<T> params;
    std::shared_ptr<StageExtractor<T>> extractor;
    unsigned seed = 0;

    DhanModel(DhanConfig config, unsigned seed_)
        : cfg(std::move(config)), seed(seed_) {
        cfg.validate();
        extractor = std::make_shared<StageExtractor<T>>(
            StageExtractor<T>::random_init(cfg.extractor, seed ^ 0x9e3779b9u));
        std::mt19937_64 rng(seed);
        const int base = cfg.base_channels;
        const T slope = static_cast<T>(cfg.leaky_slope);
        const int hyper = 3 + cfg.extractor.total_channels();

        input_block_ = DilatedBlock<T>(params, "dhan.input", rng, hyper, base, 1, slope);
        for (int n = 1; n <= cfg.depth; ++n) {
            const std::string lp = "dhan.level" + std::to_string(n);
            db1_.emplace_back(params, lp + ".db1", rng, base, base,
                              1 << (n - 1), slope);
            db2_.emplace_back(params, lp + ".db2", rng, base, base, 1 << n, slope);
            if (cfg.variant != Variant::CAN) {
                const int cin = (n + 1) * base;  // prior T outputs + L1 + L2
                agg_.emplace_back(params, lp + ".agg", rng, cin, base, false);
                if (cfg.variant == Variant::DHAN)
                    att_agg_.emplace_back(params, lp + ".att", rng, cin, base, true);
            }
        }
        const int spp_in = (1 + static_cast<int>(cfg.spp_scales.size())) * base;
        spp_proj_ = Conv2dLayer<T>(params, "dhan.spp.proj", rng, 1, 1, spp_in, base);
        if (cfg.mode != Mode::detection_only)
            pred_head_ = Conv2dLayer<T>(params, "dhan.head.pred", rng, 1, 1, base, 3);
        mask_head_ = Conv2dLayer<T>(params, "dhan.head.mask", rng, 1, 1, base, 1);
    }

    struct Outputs {
        Var<T> pred;  // unclamped prediction head (empty in detection mode)
        Var<T> mask;  // sigmoid mask head, values in (0,1)
        std::vector<Var<T>> attentions;
    };

    Outputs forward(const Tensor<T>& image, ForwardOpts<T> opts = {}) const {
        require(image.shape.c == 3, "dhan_forward: input must be RGB");
        require(image.shape.h >= 8 && image.shape.w >= 8,
                "dhan_forward: input must be at least 8x8");
        auto rgb = make_var<T>(image);
        auto hyper = extract_hypercolumn(rgb, *extractor);
        auto x = input_block_(hyper);
        check_finite(x, "input");

        std::vector<Var<T>> tree;      // T_1..T_n
        std::vector<Var<T>> att_tree;  // AT_1..AT_n
        Var<T> feat = x;
        Var<T> att;  // attention gating the next level's input
        for (int n = 1; n <= cfg.depth; ++n) {
            Var<T> gated = feat;
            if (cfg.variant == Variant::DHAN && att && !opts.force_attention_ones)
                gated = ops::gate(feat, att);
            auto l1 = db1_[n - 1](gated);
            auto l2 = db2_[n - 1](l1);
            if (cfg.variant == Variant::CAN) {
                feat = l2;
            } else {
                std::vector<Var<T>> agg_in = tree;
                agg_in.push_back(l1);
                agg_in.push_back(l2);
                feat = agg_[n - 1](agg_in, opts.se_override);
                tree.push_back(feat);
                if (cfg.variant == Variant::DHAN) {
                    std::vector<Var<T>> att_in = att_tree;
                    att_in.push_back(l1);
                    att_in.push_back(l2);
                    att = att_agg_[n - 1](att_in, opts.se_override);
                    att_tree.push_back(att);
                }
            }
            check_finite(feat, "level" + std::to_string(n));
        }

        Var<T> final_feat = feat;
        if (cfg.variant == Variant::DHAN && att && !opts.force_attention_ones)
            final_feat = ops::gate(feat, att);
        auto remix = spatial_pooling_pyramid(final_feat);
        check_finite(remix, "spp");

        Outputs out;
        out.attentions = att_tree;
        if (cfg.mode != Mode::detection_only) out.pred = pred_head_(remix);
        // mask from the final attention-tree features when the attention
        // tree exists, from the remixed features otherwise
        Var<T> mask_in = (cfg.variant == Variant::DHAN && att &&
                          !opts.force_attention_ones)
                             ? att
                             : remix;
        out.mask = ops::sigmoid(mask_head_(mask_in));
        return out;
    }

    // Average-pool branches at each scale, upsampled back and fused with
    // the input by a 1x1 conv. Branches larger than the input are skipped
    // (zero contribution) with a warning.
    Var<T> spatial_pooling_pyramid(const Var<T>& x) const {
        const int h = x->value.shape.h, w = x->value.shape.w;
        std::vector<Var<T>> parts{x};
        for (int s : cfg.spp_scales) {
            if (h < s || w < s) {
                log_warn("spp: skipping scale " + std::to_string(s) +
                         " for input " + x->value.shape.str());
                parts.push_back(make_var<T>(Tensor<T>(h, w, x->value.shape.c)));
                continue;
            }
            parts.push_back(ops::bilinear_resize(ops::avg_pool(x, s), h, w));
        }
        return spp_proj_(ops::concat_channels(parts));
    }

private:
    DilatedBlock<T> input_block_;
    std::vector<DilatedBlock<T>> db1_, db2_;
    std::vector<AggregationNode<T>> agg_, att_agg_;
    Conv2dLayer<T> spp_proj_, pred_head_, mask_head_;

    static void check_finite(const Var<T>& v, const std::string& where) {
        for (T x : v->value.data)
            if (!std::isfinite(x))
                throw std::runtime_error(
                    "dhan_forward: non-finite activation at " + where);
    }
};

template <class T>
DhanModel<T> build_dhan(const DhanConfig& cfg, unsigned seed) {
    return DhanModel<T>(cfg, seed);
}

}  // namespace deshade
