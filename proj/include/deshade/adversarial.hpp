// SPDX-License-Identifier: Apache-2.0
//
// Conditional patch discriminator shared by shadow removal and shadow
// synthesis, plus the GAN loss terms. The discriminator sees the condition
// image concatenated with the candidate on channels and emits a spatial
// patch-logit map.
#pragma once

#include <random>
#include <utility>

#include "deshade/nn.hpp"

namespace deshade {

struct DiscConfig {
    int in_channels = 6;  // condition + candidate
    int base_channels = 64;
};

// Five stages: four 4x4 stride-2 convs widening 64 -> 512 (normalization on
// all but the first), then a 4x4 stride-1 conv to one logit channel. A
// 64x64 input yields a 3x3 patch map under pad-1.
//
// Normalization is per-channel over the spatial extent; at batch size 1
// this is what train-mode batch normalization computes.
template <class T>
class PatchDiscriminator {
public:
    DiscConfig cfg;
    ParamStore<T> params;

    PatchDiscriminator(DiscConfig config, unsigned seed) : cfg(config) {
        std::mt19937_64 rng(seed);
        const int b = cfg.base_channels;
        const int widths[4] = {b, 2 * b, 4 * b, 8 * b};
        int cin = cfg.in_channels;
        for (int i = 0; i < 4; ++i) {
            const std::string p = "disc.stage" + std::to_string(i + 1);
            convs_[i] = Conv2dLayer<T>(params, p + ".conv", rng, 4, 4, cin,
                                       widths[i], 2, 1, 1);
            if (i > 0) norms_[i] = InstanceNormLayer<T>(params, p + ".bn", widths[i]);
            cin = widths[i];
        }
        logit_ = Conv2dLayer<T>(params, "disc.stage5.conv", rng, 4, 4, cin, 1,
                                1, 1, 1);
    }

    Var<T> discriminate(const Var<T>& condition, const Var<T>& candidate) const {
        require(condition->value.shape.h == candidate->value.shape.h &&
                    condition->value.shape.w == candidate->value.shape.w,
                "discriminate: condition/candidate dims mismatch");
        auto x = ops::concat_channels<T>({condition, candidate});
        require(x->value.shape.c == cfg.in_channels,
                "discriminate: expected " + std::to_string(cfg.in_channels) +
                    " stacked channels, got " + std::to_string(x->value.shape.c));
        for (int i = 0; i < 4; ++i) {
            x = convs_[i](x);
            if (i > 0) x = norms_[i](x);
            x = ops::relu(x);
        }
        return logit_(x);
    }

    Var<T> discriminate(const Tensor<T>& condition, const Tensor<T>& candidate) const {
        return discriminate(make_var<T>(condition), make_var<T>(candidate));
    }

private:
    Conv2dLayer<T> convs_[4];
    InstanceNormLayer<T> norms_[4];
    Conv2dLayer<T> logit_;
};

template <class T>
struct GanTerms {
    Var<T> g_term;  // pushes fake patches toward real
    Var<T> d_term;  // real -> 1 plus fake -> 0, summed over the two sides
};

// Saturating sigmoid cross entropy on patch logits, mean over patches per
// side. The printed log-difference form shares the same optimum; the
// cross-entropy form is the one implemented.
template <class T>
GanTerms<T> gan_loss_terms(const Var<T>& real_logits, const Var<T>& fake_logits) {
    GanTerms<T> t;
    t.g_term = ops::bce_logits_const(fake_logits, T(1));
    t.d_term = ops::weighted_sum<T>(
        {{ops::bce_logits_const(real_logits, T(1)), T(1)},
         {ops::bce_logits_const(fake_logits, T(0)), T(1)}});
    return t;
}

}  // namespace deshade
