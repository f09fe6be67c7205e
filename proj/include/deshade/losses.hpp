// SPDX-License-Identifier: Apache-2.0
//
// Supervised loss stack: multi-layer perceptual loss over extractor stages,
// BCE attention loss, and the combined generator objective. Prediction
// images are never clamped here so gradients stay intact.
#pragma once

#include <cmath>
#include <vector>

#include "deshade/extractor.hpp"

namespace deshade {

struct LossWeights {
    double lambda_perceptual = 20.0;  // weight on the perceptual term
    double alpha_attention = 100.0;   // weight on the attention BCE term
    std::vector<double> per_layer = std::vector<double>(6, 1.0);  // k = 0..5

    void validate() const {
        require(per_layer.size() == 6, "LossWeights: per_layer needs 6 entries");
        require(lambda_perceptual >= 0 && alpha_attention >= 0,
                "LossWeights: weights must be >= 0");
        for (double w : per_layer)
            require(w >= 0, "LossWeights: per-layer weights must be >= 0");
    }
};

// Sum over k=0..5 of per_layer[k] * mean-L1 distance between stage-k
// features of pred and target, where k=0 is the raw images.
template <class T>
Var<T> perceptual_loss(const Var<T>& pred, const Var<T>& target,
                       const StageExtractor<T>& extractor,
                       const LossWeights& weights) {
    weights.validate();
    require(pred->value.shape == target->value.shape,
            "perceptual_loss: shape mismatch " + pred->value.shape.str() +
                " vs " + target->value.shape.str());
    std::vector<std::pair<Var<T>, T>> terms;
    terms.emplace_back(ops::mean_abs_diff(pred, target),
                       static_cast<T>(weights.per_layer[0]));
    auto ps = extractor.stages(pred);
    auto ts = extractor.stages(target);
    for (std::size_t k = 0; k < ps.size(); ++k)
        terms.emplace_back(ops::mean_abs_diff(ps[k], ts[k]),
                           static_cast<T>(weights.per_layer[k + 1]));
    return ops::weighted_sum(terms);
}

// Mean binary cross entropy between the soft predicted mask and the binary
// ground truth; predictions are clamped to [1e-7, 1-1e-7].
template <class T>
Var<T> attention_bce(const Var<T>& pred_mask, const Tensor<T>& gt_mask) {
    require(pred_mask->value.shape == gt_mask.shape,
            "attention_bce: shape mismatch");
    return ops::bce_mean(pred_mask, gt_mask, T(1e-7));
}

template <class T>
struct ObjectiveParts {
    Var<T> total, adv, perceptual, bce;
};

// adv + lambda * perceptual + alpha * bce. Components are kept so the
// trainer can log them separately.
template <class T>
ObjectiveParts<T> generator_objective(const Var<T>& adv, const Var<T>& perceptual,
                                      const Var<T>& bce, const LossWeights& w) {
    auto check = [](const Var<T>& v, const char* name) {
        require(std::isfinite(static_cast<double>(v->scalar())),
                std::string("generator_objective: non-finite ") + name + " term");
    };
    check(adv, "adversarial");
    check(perceptual, "perceptual");
    check(bce, "attention");
    ObjectiveParts<T> parts;
    parts.adv = adv;
    parts.perceptual = perceptual;
    parts.bce = bce;
    parts.total = ops::weighted_sum<T>(
        {{adv, T(1)},
         {perceptual, static_cast<T>(w.lambda_perceptual)},
         {bce, static_cast<T>(w.alpha_attention)}});
    return parts;
}

}  // namespace deshade
