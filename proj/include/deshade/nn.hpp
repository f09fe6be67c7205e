// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "deshade/autodiff.hpp"

namespace deshade {

// Named parameter registry. Names are dot-paths mirroring module structure
// and define the checkpoint layout.
template <class T>
struct ParamStore {
    std::map<std::string, Var<T>> params;

    Var<T> add(const std::string& name, Tensor<T> t, bool requires_grad = true) {
        require(!params.count(name), "duplicate parameter name: " + name);
        auto v = make_var<T>(std::move(t), requires_grad, name);
        params[name] = v;
        return v;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (auto& [k, v] : params) n += v->value.numel();
        return n;
    }

    void zero_grad() {
        for (auto& [k, v] : params) v->zero_grad();
    }

    std::map<std::string, Tensor<float>> state_dict() const {
        std::map<std::string, Tensor<float>> out;
        for (auto& [k, v] : params) out[k] = v->value.template cast<float>();
        return out;
    }

    void load_state(const std::map<std::string, Tensor<float>>& state) {
        require(state.size() == params.size(),
                "checkpoint parameter count mismatch: archive has " +
                    std::to_string(state.size()) + ", model has " +
                    std::to_string(params.size()));
        for (auto& [k, v] : params) {
            auto it = state.find(k);
            require(it != state.end(), "checkpoint missing parameter: " + k);
            require(it->second.shape == v->value.shape,
                    "checkpoint shape mismatch for " + k + ": " +
                        it->second.shape.str() + " vs " + v->value.shape.str());
            v->value = it->second.template cast<T>();
        }
    }
};

namespace init {

template <class T>
Tensor<T> he_normal(std::mt19937_64& rng, Shape s, int fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    Tensor<T> t(s);
    for (auto& v : t.data) v = static_cast<T>(dist(rng));
    return t;
}

}  // namespace init

template <class T>
struct Conv2dLayer {
    Var<T> w, b;
    int stride = 1, dilation = 1, pad = 0;

    Conv2dLayer() = default;
    Conv2dLayer(ParamStore<T>& ps, const std::string& prefix, std::mt19937_64& rng,
                int kh, int kw, int cin, int cout, int stride_ = 1,
                int dilation_ = 1, int pad_ = 0, bool requires_grad = true)
        : stride(stride_), dilation(dilation_), pad(pad_) {
        w = ps.add(prefix + ".w",
                   init::he_normal<T>(rng, Shape{kh, kw, cin, cout}, kh * kw * cin),
                   requires_grad);
        b = ps.add(prefix + ".b", Tensor<T>(1, 1, cout), requires_grad);
    }

    Var<T> operator()(const Var<T>& x) const {
        return ops::conv2d(x, w, b, stride, dilation, pad);
    }
};

// Affine parameters start at identity (gamma=1, beta=0).
template <class T>
struct InstanceNormLayer {
    Var<T> gamma, beta;

    InstanceNormLayer() = default;
    InstanceNormLayer(ParamStore<T>& ps, const std::string& prefix, int c,
                      bool requires_grad = true) {
        gamma = ps.add(prefix + ".gamma", Tensor<T>(1, 1, c, T(1)), requires_grad);
        beta = ps.add(prefix + ".beta", Tensor<T>(1, 1, c), requires_grad);
    }

    Var<T> operator()(const Var<T>& x) const {
        return ops::instance_norm(x, gamma, beta);
    }
};

// 3x3 dilated convolution, instance normalization, leaky rectification.
// Zero padding preserves the spatial extent.
template <class T>
struct DilatedBlock {
    Conv2dLayer<T> conv;
    InstanceNormLayer<T> norm;
    T slope = T(0.2);

    DilatedBlock() = default;
    DilatedBlock(ParamStore<T>& ps, const std::string& prefix, std::mt19937_64& rng,
                 int cin, int cout, int dilation, T slope_)
        : conv(ps, prefix + ".conv", rng, 3, 3, cin, cout, 1, dilation, dilation),
          norm(ps, prefix + ".norm", cout),
          slope(slope_) {}

    Var<T> operator()(const Var<T>& x) const {
        return ops::leaky_relu(norm(conv(x)), slope);
    }
};

enum class GateOverride { none, ones, zeros };

template <class T>
struct SqueezeExcite {
    Conv2dLayer<T> fc1, fc2;

    SqueezeExcite() = default;
    SqueezeExcite(ParamStore<T>& ps, const std::string& prefix,
                  std::mt19937_64& rng, int channels, int reduction = 4) {
        const int mid = std::max(channels / reduction, 1);
        fc1 = Conv2dLayer<T>(ps, prefix + ".fc1", rng, 1, 1, channels, mid);
        fc2 = Conv2dLayer<T>(ps, prefix + ".fc2", rng, 1, 1, mid, channels);
    }

    Var<T> operator()(const Var<T>& x, GateOverride ov = GateOverride::none) const {
        if (ov == GateOverride::ones) return x;
        if (ov == GateOverride::zeros) {
            Tensor<T> zeros(1, 1, x->value.shape.c);
            return ops::channel_scale(x, make_var<T>(std::move(zeros)));
        }
        auto s = ops::sigmoid(fc2(ops::relu(fc1(ops::global_avg_pool(x)))));
        return ops::channel_scale(x, s);
    }
};

// Aggregation node: concat -> squeeze-and-excitation -> 3x3 conv projecting
// back to the working width. The attention variant appends a sigmoid.
template <class T>
struct AggregationNode {
    SqueezeExcite<T> se;
    Conv2dLayer<T> proj;
    bool sigmoid_out = false;

    AggregationNode() = default;
    AggregationNode(ParamStore<T>& ps, const std::string& prefix,
                    std::mt19937_64& rng, int cin_total, int cout,
                    bool sigmoid_out_)
        : se(ps, prefix + ".se", rng, cin_total),
          proj(ps, prefix + ".proj", rng, 3, 3, cin_total, cout, 1, 1, 1),
          sigmoid_out(sigmoid_out_) {}

    Var<T> operator()(const std::vector<Var<T>>& features,
                      GateOverride ov = GateOverride::none) const {
        require(features.size() >= 2, "aggregation node needs >= 2 inputs");
        auto y = proj(se(ops::concat_channels(features), ov));
        return sigmoid_out ? ops::sigmoid(y) : y;
    }
};

// Adam optimizer over a parameter store (single-writer contract).
template <class T>
struct Adam {
    T lr, beta1, beta2, eps;
    std::map<std::string, std::pair<Tensor<T>, Tensor<T>>> state;
    long step_count = 0;

    explicit Adam(T lr_ = T(2e-4), T b1 = T(0.9), T b2 = T(0.999),
                  T eps_ = T(1e-8))
        : lr(lr_), beta1(b1), beta2(b2), eps(eps_) {}

    void step(ParamStore<T>& ps) {
        ++step_count;
        const T bc1 = T(1) - std::pow(beta1, T(step_count));
        const T bc2 = T(1) - std::pow(beta2, T(step_count));
        for (auto& [name, p] : ps.params) {
            if (!p->requires_grad || p->grad.data.empty()) continue;
            auto& [m, v] = state[name];
            if (m.data.empty()) {
                m = Tensor<T>(p->value.shape);
                v = Tensor<T>(p->value.shape);
            }
            for (std::size_t i = 0; i < p->value.data.size(); ++i) {
                const T g = p->grad.data[i];
                m.data[i] = beta1 * m.data[i] + (T(1) - beta1) * g;
                v.data[i] = beta2 * v.data[i] + (T(1) - beta2) * g * g;
                const T mhat = m.data[i] / bc1;
                const T vhat = v.data[i] / bc2;
                p->value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

}  // namespace deshade
