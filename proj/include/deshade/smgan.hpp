// SPDX-License-Identifier: Apache-2.0
//
// Shadow Matting GAN: an encoder-decoder generator mapping a shadow-free
// image plus mask to a multiplicative darkening matte, and the compositing
// and matte-derivation primitives. shadow = matte * free, so synthesized
// shadows can only darken.
#pragma once

#include <random>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "deshade/nn.hpp"

namespace deshade {

// --- matting primitives ------------------------------------------------------

// Elementwise product, clamped to [0,1]. The matte may have one channel
// (broadcast) or match the image.
template <class T>
Tensor<T> composite(const Tensor<T>& matte, const Tensor<T>& free) {
    require(matte.shape.h == free.shape.h && matte.shape.w == free.shape.w,
            "composite: dims mismatch");
    require(matte.shape.c == free.shape.c || matte.shape.c == 1,
            "composite: matte not broadcastable");
    Tensor<T> out(free.shape);
    for (int y = 0; y < free.shape.h; ++y)
        for (int x = 0; x < free.shape.w; ++x)
            for (int c = 0; c < free.shape.c; ++c) {
                const T m = matte.at(y, x, matte.shape.c == 1 ? 0 : c);
                out.at(y, x, c) = std::clamp(m * free.at(y, x, c), T(0), T(1));
            }
    return out;
}

// matte = clamp(shadow / max(free, floor), 0, 1); the floor guards the
// division in near-black regions.
template <class T>
Tensor<T> derive_matte(const Tensor<T>& shadow, const Tensor<T>& free,
                       T floor = T(1e-3)) {
    require(shadow.shape == free.shape, "derive_matte: dims mismatch");
    require(floor > T(0), "derive_matte: floor must be > 0");
    Tensor<T> matte(shadow.shape);
    for (std::size_t i = 0; i < matte.data.size(); ++i)
        matte.data[i] = std::clamp(
            shadow.data[i] / std::max(free.data[i], floor), T(0), T(1));
    return matte;
}

// --- generator ---------------------------------------------------------------

struct SmganConfig {
    int base_channels = 64;
    int res_blocks = 4;
    int matte_channels = 3;

    nlohmann::json to_json() const {
        return {{"base_channels", base_channels},
                {"res_blocks", res_blocks},
                {"matte_channels", matte_channels}};
    }
    static SmganConfig from_json(const nlohmann::json& j) {
        SmganConfig c;
        c.base_channels = j.at("base_channels");
        c.res_blocks = j.at("res_blocks");
        c.matte_channels = j.at("matte_channels");
        return c;
    }
};

// Encoder (two stride-2 stages), residual trunk, decoder (resize + conv back
// to the recorded encoder resolutions so odd sizes round-trip exactly),
// sigmoid matte output. Input is RGB free image stacked with the 1-channel
// mask.
template <class T>
class MattingGenerator {
public:
    SmganConfig cfg;
    ParamStore<T> params;
    unsigned seed = 0;

    MattingGenerator(SmganConfig config, unsigned seed_)
        : cfg(config), seed(seed_) {
        require(cfg.base_channels >= 1 && cfg.res_blocks >= 0 &&
                    (cfg.matte_channels == 1 || cfg.matte_channels == 3),
                "SmganConfig: invalid");
        std::mt19937_64 rng(seed);
        const int b = cfg.base_channels;
        in_conv_ = Conv2dLayer<T>(params, "gen.in.conv", rng, 7, 7, 4, b, 1, 1, 3);
        in_norm_ = InstanceNormLayer<T>(params, "gen.in.norm", b);
        down1_ = Conv2dLayer<T>(params, "gen.down1.conv", rng, 3, 3, b, 2 * b, 2, 1, 1);
        down1_n_ = InstanceNormLayer<T>(params, "gen.down1.norm", 2 * b);
        down2_ = Conv2dLayer<T>(params, "gen.down2.conv", rng, 3, 3, 2 * b, 4 * b, 2, 1, 1);
        down2_n_ = InstanceNormLayer<T>(params, "gen.down2.norm", 4 * b);
        for (int i = 0; i < cfg.res_blocks; ++i) {
            const std::string p = "gen.res" + std::to_string(i + 1);
            res_c1_.emplace_back(params, p + ".conv1", rng, 3, 3, 4 * b, 4 * b, 1, 1, 1);
            res_n1_.emplace_back(params, p + ".norm1", 4 * b);
            res_c2_.emplace_back(params, p + ".conv2", rng, 3, 3, 4 * b, 4 * b, 1, 1, 1);
            res_n2_.emplace_back(params, p + ".norm2", 4 * b);
        }
        up1_ = Conv2dLayer<T>(params, "gen.up1.conv", rng, 3, 3, 4 * b, 2 * b, 1, 1, 1);
        up1_n_ = InstanceNormLayer<T>(params, "gen.up1.norm", 2 * b);
        up2_ = Conv2dLayer<T>(params, "gen.up2.conv", rng, 3, 3, 2 * b, b, 1, 1, 1);
        up2_n_ = InstanceNormLayer<T>(params, "gen.up2.norm", b);
        out_conv_ = Conv2dLayer<T>(params, "gen.out.conv", rng, 7, 7, b,
                                   cfg.matte_channels, 1, 1, 3);
    }

    // Matte prediction as a graph node (values in (0,1)).
    Var<T> forward(const Tensor<T>& free, const Tensor<T>& mask) const {
        require(free.shape.c == 3 && mask.shape.c == 1,
                "matting generator: expects RGB free image and 1-channel mask");
        require(free.shape.h == mask.shape.h && free.shape.w == mask.shape.w,
                "matting generator: free/mask dims mismatch");
        auto x = ops::concat_channels<T>({make_var<T>(free), make_var<T>(mask)});
        x = ops::relu(in_norm_(in_conv_(x)));
        const int h1 = x->value.shape.h, w1 = x->value.shape.w;
        x = ops::relu(down1_n_(down1_(x)));
        const int h2 = x->value.shape.h, w2 = x->value.shape.w;
        x = ops::relu(down2_n_(down2_(x)));
        for (int i = 0; i < cfg.res_blocks; ++i) {
            auto y = ops::relu(res_n1_[i](res_c1_[i](x)));
            y = res_n2_[i](res_c2_[i](y));
            x = ops::add(x, y);
        }
        x = ops::relu(up1_n_(up1_(ops::bilinear_resize(x, h2, w2))));
        x = ops::relu(up2_n_(up2_(ops::bilinear_resize(x, h1, w1))));
        return ops::sigmoid(out_conv_(x));
    }

    // (shadow_synth, matte) as plain tensors; shadow_synth = matte * free.
    std::pair<Tensor<T>, Tensor<T>> synthesize(const Tensor<T>& free,
                                               const Tensor<T>& mask) const {
        auto matte = forward(free, mask)->value;
        return {composite(matte, free), matte};
    }

private:
    Conv2dLayer<T> in_conv_, down1_, down2_, up1_, up2_, out_conv_;
    InstanceNormLayer<T> in_norm_, down1_n_, down2_n_, up1_n_, up2_n_;
    std::vector<Conv2dLayer<T>> res_c1_, res_c2_;
    std::vector<InstanceNormLayer<T>> res_n1_, res_n2_;
};

}  // namespace deshade
