// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "deshade/nn.hpp"

namespace deshade {

// Five-stage convolutional feature extractor in the VGG convention: each
// stage is a pair of 3x3 conv+ReLU layers, the stage tap is the second
// conv's activation, and resolution halves between stages. Weights are
// frozen; they come either from a seeded random init (tests, desk-scale
// runs) or an external weights archive.
struct ExtractorConfig {
    std::vector<int> stage_channels{64, 128, 256, 512, 512};
    int convs_per_stage = 2;

    static ExtractorConfig tiny() {
        ExtractorConfig c;
        c.stage_channels = {4, 4, 8, 8, 8};
        return c;
    }

    int total_channels() const {
        return std::accumulate(stage_channels.begin(), stage_channels.end(), 0);
    }
};

template <class T>
struct StageExtractor {
    ExtractorConfig cfg;
    ParamStore<T> params;
    std::vector<std::vector<Conv2dLayer<T>>> stage_convs;

    static StageExtractor random_init(const ExtractorConfig& cfg, unsigned seed) {
        StageExtractor ex;
        ex.cfg = cfg;
        std::mt19937_64 rng(seed);
        int cin = 3;
        for (std::size_t s = 0; s < cfg.stage_channels.size(); ++s) {
            const int c = cfg.stage_channels[s];
            std::vector<Conv2dLayer<T>> convs;
            for (int i = 0; i < cfg.convs_per_stage; ++i) {
                const std::string name = "stage" + std::to_string(s + 1) +
                                         ".conv" + std::to_string(i + 1);
                convs.emplace_back(ex.params, name, rng, 3, 3, i == 0 ? cin : c,
                                   c, 1, 1, 1, /*requires_grad=*/false);
            }
            stage_convs_scale_down(convs);
            ex.stage_convs.push_back(std::move(convs));
            cin = c;
        }
        return ex;
    }

    // Per-stage feature maps at their native (progressively halved)
    // resolution. Input must be an RGB map.
    std::vector<Var<T>> stages(const Var<T>& rgb) const {
        require(rgb->value.shape.c == 3, "extractor expects a 3-channel input");
        std::vector<Var<T>> taps;
        Var<T> x = rgb;
        for (std::size_t s = 0; s < stage_convs.size(); ++s) {
            for (auto& conv : stage_convs[s]) x = ops::relu(conv(x));
            taps.push_back(x);
            // stop halving once a side reaches a single pixel so very small
            // inputs still produce all five taps
            if (s + 1 < stage_convs.size() && x->value.shape.h >= 2 &&
                x->value.shape.w >= 2)
                x = ops::avg_pool(x, 2);
        }
        return taps;
    }

private:
    // Random extractors run many conv+ReLU layers in sequence; damp the
    // gains so deep-stage activations stay in a sane range.
    static void stage_convs_scale_down(std::vector<Conv2dLayer<T>>& convs) {
        for (auto& conv : convs)
            for (auto& v : conv.w->value.data) v *= T(0.7);
    }
};

}  // namespace deshade
