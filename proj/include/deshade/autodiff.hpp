// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode automatic differentiation on Tensor<T>.
// Each op builds a graph node holding its value and a closure that
// accumulates gradients into its inputs. Scalar type is a template
// parameter: float for training, double for finite-difference checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "deshade/tensor.hpp"

namespace deshade {

template <class T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated on demand, same shape as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node<T>>> inputs;
    std::function<void()> backward_fn;  // reads this->grad
    std::string name;

    void ensure_grad() {
        if (grad.shape != value.shape || grad.data.empty())
            grad = Tensor<T>(value.shape, T(0));
    }
    void zero_grad() {
        if (!grad.data.empty()) grad.fill(T(0));
    }
    T scalar() const { return value.data.at(0); }
};

template <class T>
using Var = std::shared_ptr<Node<T>>;

template <class T>
Var<T> make_var(Tensor<T> v, bool requires_grad = false, std::string name = "") {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->requires_grad = requires_grad;
    n->name = std::move(name);
    return n;
}

template <class T>
Var<T> detach(const Var<T>& v) {
    return make_var<T>(v->value, false);
}

namespace detail {

template <class T>
void topo_sort(Node<T>* root, std::vector<Node<T>*>& order) {
    std::unordered_set<Node<T>*> seen;
    // iterative DFS; graphs can be deep (dilated chains + extractors)
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->inputs.size()) {
            Node<T>* child = node->inputs[idx++].get();
            if (child->requires_grad && !seen.count(child)) {
                seen.insert(child);
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace detail

// Backpropagate from a scalar node.
template <class T>
void backward(const Var<T>& root) {
    require(root->value.numel() == 1, "backward: root must be scalar");
    std::vector<Node<T>*> order;
    detail::topo_sort(root.get(), order);
    for (Node<T>* n : order) n->ensure_grad();
    root->grad.data[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn();
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

namespace ops {

template <class T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> inputs) {
    auto n = make_var<T>(std::move(value));
    for (auto& in : inputs)
        if (in->requires_grad) n->requires_grad = true;
    n->inputs = std::move(inputs);
    return n;
}

// 2-d convolution. x: (h,w,cin), w: (kh,kw,cin,cout), b: (1,1,cout).
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
              int stride = 1, int dilation = 1, int pad = 0) {
    const Shape xs = x->value.shape, ws = w->value.shape;
    require(xs.c == ws.c, "conv2d: channel mismatch " + xs.str() + " vs " + ws.str());
    require(b->value.shape.c == ws.n, "conv2d: bias width mismatch");
    const int kh = ws.h, kw = ws.w, cin = ws.c, cout = ws.n;
    const int oh = (xs.h + 2 * pad - dilation * (kh - 1) - 1) / stride + 1;
    const int ow = (xs.w + 2 * pad - dilation * (kw - 1) - 1) / stride + 1;
    require(oh > 0 && ow > 0, "conv2d: empty output for input " + xs.str());

    Tensor<T> out(oh, ow, cout);
    const T* xd = x->value.data.data();
    const T* wd = w->value.data.data();
    const T* bd = b->value.data.data();
    T* od = out.data.data();
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            T* op = od + (static_cast<std::size_t>(oy) * ow + ox) * cout;
            for (int co = 0; co < cout; ++co) op[co] = bd[co];
            for (int ky = 0; ky < kh; ++ky) {
                const int iy = oy * stride - pad + ky * dilation;
                if (iy < 0 || iy >= xs.h) continue;
                for (int kx = 0; kx < kw; ++kx) {
                    const int ix = ox * stride - pad + kx * dilation;
                    if (ix < 0 || ix >= xs.w) continue;
                    const T* xp = xd + (static_cast<std::size_t>(iy) * xs.w + ix) * cin;
                    const T* wp = wd + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const T xv = xp[ci];
                        if (xv == T(0)) continue;
                        const T* wr = wp + static_cast<std::size_t>(ci) * cout;
                        for (int co = 0; co < cout; ++co) op[co] += xv * wr[co];
                    }
                }
            }
        }
    }

    auto node = make_op<T>(std::move(out), {x, w, b});
    Node<T>* nx = x.get();
    Node<T>* nw = w.get();
    Node<T>* nb = b.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        const Shape xs2 = nx->value.shape;
        const int oh2 = self->value.shape.h, ow2 = self->value.shape.w;
        const bool gx = nx->requires_grad, gw = nw->requires_grad,
                   gb = nb->requires_grad;
        if (gx) nx->ensure_grad();
        if (gw) nw->ensure_grad();
        if (gb) nb->ensure_grad();
        const T* gd = self->grad.data.data();
        const T* xd2 = nx->value.data.data();
        const T* wd2 = nw->value.data.data();
        for (int oy = 0; oy < oh2; ++oy) {
            for (int ox = 0; ox < ow2; ++ox) {
                const T* gp = gd + (static_cast<std::size_t>(oy) * ow2 + ox) * cout;
                if (gb) {
                    T* gbd = nb->grad.data.data();
                    for (int co = 0; co < cout; ++co) gbd[co] += gp[co];
                }
                for (int ky = 0; ky < kh; ++ky) {
                    const int iy = oy * stride - pad + ky * dilation;
                    if (iy < 0 || iy >= xs2.h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        const int ix = ox * stride - pad + kx * dilation;
                        if (ix < 0 || ix >= xs2.w) continue;
                        const std::size_t xoff =
                            (static_cast<std::size_t>(iy) * xs2.w + ix) * cin;
                        const std::size_t woff =
                            (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
                        for (int ci = 0; ci < cin; ++ci) {
                            const T* wr = wd2 + woff + static_cast<std::size_t>(ci) * cout;
                            if (gx) {
                                T s = T(0);
                                for (int co = 0; co < cout; ++co) s += wr[co] * gp[co];
                                nx->grad.data[xoff + ci] += s;
                            }
                            if (gw) {
                                const T xv = xd2[xoff + ci];
                                if (xv != T(0)) {
                                    T* gwr = nw->grad.data.data() + woff +
                                             static_cast<std::size_t>(ci) * cout;
                                    for (int co = 0; co < cout; ++co)
                                        gwr[co] += xv * gp[co];
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    return node;
}

// Per-channel normalization over the spatial extent with learned affine.
// gamma/beta: (1,1,c).
template <class T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                     T eps = T(1e-5)) {
    const Shape s = x->value.shape;
    require(gamma->value.shape.c == s.c && beta->value.shape.c == s.c,
            "instance_norm: affine width mismatch");
    const int hw = s.h * s.w, c = s.c;
    Tensor<T> xhat(s);
    std::vector<T> istd(c);
    Tensor<T> out(s);
    const T* xd = x->value.data.data();
    const T* gm = gamma->value.data.data();
    const T* bt = beta->value.data.data();
    for (int ch = 0; ch < c; ++ch) {
        T mu = T(0);
        for (int i = 0; i < hw; ++i) mu += xd[static_cast<std::size_t>(i) * c + ch];
        mu /= T(hw);
        T var = T(0);
        for (int i = 0; i < hw; ++i) {
            const T d = xd[static_cast<std::size_t>(i) * c + ch] - mu;
            var += d * d;
        }
        var /= T(hw);
        const T is = T(1) / std::sqrt(var + eps);
        istd[ch] = is;
        for (int i = 0; i < hw; ++i) {
            const std::size_t k = static_cast<std::size_t>(i) * c + ch;
            xhat.data[k] = (xd[k] - mu) * is;
            out.data[k] = gm[ch] * xhat.data[k] + bt[ch];
        }
    }
    auto node = make_op<T>(std::move(out), {x, gamma, beta});
    Node<T>* nx = x.get();
    Node<T>* ng = gamma.get();
    Node<T>* nb = beta.get();
    Node<T>* self = node.get();
    node->backward_fn = [=, xhat = std::move(xhat), istd = std::move(istd)]() {
        const T* gd = self->grad.data.data();
        const T* gm2 = ng->value.data.data();
        if (ng->requires_grad) ng->ensure_grad();
        if (nb->requires_grad) nb->ensure_grad();
        if (nx->requires_grad) nx->ensure_grad();
        for (int ch = 0; ch < c; ++ch) {
            T sum_g = T(0), sum_gx = T(0);
            for (int i = 0; i < hw; ++i) {
                const std::size_t k = static_cast<std::size_t>(i) * c + ch;
                sum_g += gd[k];
                sum_gx += gd[k] * xhat.data[k];
            }
            if (ng->requires_grad) ng->grad.data[ch] += sum_gx;
            if (nb->requires_grad) nb->grad.data[ch] += sum_g;
            if (nx->requires_grad) {
                // dx = gamma*istd/N * (N*g - sum(g) - xhat*sum(g*xhat))
                const T scale = gm2[ch] * istd[ch] / T(hw);
                for (int i = 0; i < hw; ++i) {
                    const std::size_t k = static_cast<std::size_t>(i) * c + ch;
                    nx->grad.data[k] +=
                        scale * (T(hw) * gd[k] - sum_g - xhat.data[k] * sum_gx);
                }
            }
        }
    };
    return node;
}

template <class T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const T v = x->value.data[i];
        out.data[i] = v > T(0) ? v : slope * v;
    }
    auto node = make_op<T>(std::move(out), {x});
    Node<T>* nx = x.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (!nx->requires_grad) return;
        nx->ensure_grad();
        for (std::size_t i = 0; i < self->grad.data.size(); ++i)
            nx->grad.data[i] += self->grad.data[i] *
                                (nx->value.data[i] > T(0) ? T(1) : slope);
    };
    return node;
}

template <class T>
Var<T> relu(const Var<T>& x) { return leaky_relu(x, T(0)); }

template <class T>
Var<T> sigmoid(const Var<T>& x) {
    Tensor<T> out(x->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = T(1) / (T(1) + std::exp(-x->value.data[i]));
    auto node = make_op<T>(std::move(out), {x});
    Node<T>* nx = x.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (!nx->requires_grad) return;
        nx->ensure_grad();
        for (std::size_t i = 0; i < self->grad.data.size(); ++i) {
            const T y = self->value.data[i];
            nx->grad.data[i] += self->grad.data[i] * y * (T(1) - y);
        }
    };
    return node;
}

// Non-overlapping factor-f average pooling; remainder rows/cols dropped.
template <class T>
Var<T> avg_pool(const Var<T>& x, int factor) {
    const Shape s = x->value.shape;
    require(factor >= 1 && s.h >= factor && s.w >= factor,
            "avg_pool: input smaller than pooling factor");
    const int oh = s.h / factor, ow = s.w / factor, c = s.c;
    Tensor<T> out(oh, ow, c);
    const T inv = T(1) / T(factor * factor);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
            for (int ch = 0; ch < c; ++ch) {
                T sum = T(0);
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        sum += x->value.at(oy * factor + dy, ox * factor + dx, ch);
                out.at(oy, ox, ch) = sum * inv;
            }
    auto node = make_op<T>(std::move(out), {x});
    Node<T>* nx = x.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (!nx->requires_grad) return;
        nx->ensure_grad();
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int ch = 0; ch < c; ++ch) {
                    const T g = self->grad.at(oy, ox, ch) * inv;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            nx->grad.at(oy * factor + dy, ox * factor + dx, ch) += g;
                }
    };
    return node;
}

namespace detail {
// Half-pixel-center sampling positions with edge clamping.
inline void resize_axis(int in, int out, std::vector<int>& i0,
                        std::vector<int>& i1, std::vector<double>& frac) {
    i0.resize(out); i1.resize(out); frac.resize(out);
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        double src = (o + 0.5) * scale - 0.5;
        if (src < 0) src = 0;
        if (src > in - 1) src = in - 1;
        const int lo = static_cast<int>(src);
        i0[o] = lo;
        i1[o] = std::min(lo + 1, in - 1);
        frac[o] = src - lo;
    }
}
}  // namespace detail

template <class T>
Var<T> bilinear_resize(const Var<T>& x, int oh, int ow) {
    const Shape s = x->value.shape;
    require(oh >= 1 && ow >= 1, "bilinear_resize: empty target");
    std::vector<int> y0, y1, x0, x1;
    std::vector<double> fy, fx;
    detail::resize_axis(s.h, oh, y0, y1, fy);
    detail::resize_axis(s.w, ow, x0, x1, fx);
    const int c = s.c;
    Tensor<T> out(oh, ow, c);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const T wy = static_cast<T>(fy[oy]), wx = static_cast<T>(fx[ox]);
            for (int ch = 0; ch < c; ++ch) {
                const T v00 = x->value.at(y0[oy], x0[ox], ch);
                const T v01 = x->value.at(y0[oy], x1[ox], ch);
                const T v10 = x->value.at(y1[oy], x0[ox], ch);
                const T v11 = x->value.at(y1[oy], x1[ox], ch);
                out.at(oy, ox, ch) =
                    (T(1) - wy) * ((T(1) - wx) * v00 + wx * v01) +
                    wy * ((T(1) - wx) * v10 + wx * v11);
            }
        }
    auto node = make_op<T>(std::move(out), {x});
    Node<T>* nx = x.get();
    Node<T>* self = node.get();
    node->backward_fn = [=, y0 = std::move(y0), y1 = std::move(y1),
                         x0 = std::move(x0), x1 = std::move(x1),
                         fy = std::move(fy), fx = std::move(fx)]() {
        if (!nx->requires_grad) return;
        nx->ensure_grad();
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const T wy = static_cast<T>(fy[oy]), wx = static_cast<T>(fx[ox]);
                for (int ch = 0; ch < c; ++ch) {
                    const T g = self->grad.at(oy, ox, ch);
                    nx->grad.at(y0[oy], x0[ox], ch) += g * (T(1) - wy) * (T(1) - wx);
                    nx->grad.at(y0[oy], x1[ox], ch) += g * (T(1) - wy) * wx;
                    nx->grad.at(y1[oy], x0[ox], ch) += g * wy * (T(1) - wx);
                    nx->grad.at(y1[oy], x1[ox], ch) += g * wy * wx;
                }
            }
    };
    return node;
}

template <class T>
Var<T> global_avg_pool(const Var<T>& x) {
    const Shape s = x->value.shape;
    const int hw = s.h * s.w, c = s.c;
    Tensor<T> out(1, 1, c);
    for (int i = 0; i < hw; ++i)
        for (int ch = 0; ch < c; ++ch)
            out.data[ch] += x->value.data[static_cast<std::size_t>(i) * c + ch];
    for (int ch = 0; ch < c; ++ch) out.data[ch] /= T(hw);
    auto node = make_op<T>(std::move(out), {x});
    Node<T>* nx = x.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (!nx->requires_grad) return;
        nx->ensure_grad();
        for (int ch = 0; ch < c; ++ch) {
            const T g = self->grad.data[ch] / T(hw);
            for (int i = 0; i < hw; ++i)
                nx->grad.data[static_cast<std::size_t>(i) * c + ch] += g;
        }
    };
    return node;
}

template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
    require(!xs.empty(), "concat_channels: no inputs");
    const int h = xs[0]->value.shape.h, w = xs[0]->value.shape.w;
    int ctot = 0;
    for (auto& v : xs) {
        require(v->value.shape.h == h && v->value.shape.w == w,
                "concat_channels: spatial dims mismatch");
        ctot += v->value.shape.c;
    }
    Tensor<T> out(h, w, ctot);
    const int hw = h * w;
    int off = 0;
    for (auto& v : xs) {
        const int c = v->value.shape.c;
        for (int i = 0; i < hw; ++i)
            for (int ch = 0; ch < c; ++ch)
                out.data[static_cast<std::size_t>(i) * ctot + off + ch] =
                    v->value.data[static_cast<std::size_t>(i) * c + ch];
        off += c;
    }
    auto node = make_op<T>(std::move(out), xs);
    Node<T>* self = node.get();
    node->backward_fn = [self, hw, ctot]() {
        int off2 = 0;
        for (auto& in : self->inputs) {
            const int c = in->value.shape.c;
            if (in->requires_grad) {
                in->ensure_grad();
                for (int i = 0; i < hw; ++i)
                    for (int ch = 0; ch < c; ++ch)
                        in->grad.data[static_cast<std::size_t>(i) * c + ch] +=
                            self->grad.data[static_cast<std::size_t>(i) * ctot +
                                            off2 + ch];
            }
            off2 += c;
        }
    };
    return node;
}

// Elementwise product; the gate may have 1 channel (broadcast across x's
// channels) or match x exactly.
template <class T>
Var<T> gate(const Var<T>& x, const Var<T>& a) {
    const Shape xs = x->value.shape, as = a->value.shape;
    require(xs.h == as.h && xs.w == as.w, "gate: spatial dims mismatch");
    require(as.c == xs.c || as.c == 1, "gate: channel mismatch");
    const bool bcast = (as.c == 1 && xs.c != 1);
    Tensor<T> out(xs);
    const int hw = xs.h * xs.w, c = xs.c;
    for (int i = 0; i < hw; ++i)
        for (int ch = 0; ch < c; ++ch)
            out.data[static_cast<std::size_t>(i) * c + ch] =
                x->value.data[static_cast<std::size_t>(i) * c + ch] *
                a->value.data[static_cast<std::size_t>(i) * as.c + (bcast ? 0 : ch)];
    auto node = make_op<T>(std::move(out), {x, a});
    Node<T>* nx = x.get();
    Node<T>* na = a.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        const int ac = na->value.shape.c;
        if (nx->requires_grad) nx->ensure_grad();
        if (na->requires_grad) na->ensure_grad();
        for (int i = 0; i < hw; ++i)
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t kx = static_cast<std::size_t>(i) * c + ch;
                const std::size_t ka =
                    static_cast<std::size_t>(i) * ac + (bcast ? 0 : ch);
                const T g = self->grad.data[kx];
                if (nx->requires_grad) nx->grad.data[kx] += g * na->value.data[ka];
                if (na->requires_grad) na->grad.data[ka] += g * nx->value.data[kx];
            }
    };
    return node;
}

// Per-channel scaling by a (1,1,c) vector (squeeze-and-excitation gate).
template <class T>
Var<T> channel_scale(const Var<T>& x, const Var<T>& s) {
    const Shape xs = x->value.shape;
    require(s->value.shape.h == 1 && s->value.shape.w == 1 &&
                s->value.shape.c == xs.c,
            "channel_scale: gate must be (1,1,c)");
    const int hw = xs.h * xs.w, c = xs.c;
    Tensor<T> out(xs);
    for (int i = 0; i < hw; ++i)
        for (int ch = 0; ch < c; ++ch)
            out.data[static_cast<std::size_t>(i) * c + ch] =
                x->value.data[static_cast<std::size_t>(i) * c + ch] *
                s->value.data[ch];
    auto node = make_op<T>(std::move(out), {x, s});
    Node<T>* nx = x.get();
    Node<T>* ns = s.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (nx->requires_grad) nx->ensure_grad();
        if (ns->requires_grad) ns->ensure_grad();
        for (int i = 0; i < hw; ++i)
            for (int ch = 0; ch < c; ++ch) {
                const std::size_t k = static_cast<std::size_t>(i) * c + ch;
                const T g = self->grad.data[k];
                if (nx->requires_grad) nx->grad.data[k] += g * ns->value.data[ch];
                if (ns->requires_grad)
                    ns->grad.data[ch] += g * nx->value.data[k];
            }
    };
    return node;
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    require(a->value.shape == b->value.shape, "add: shape mismatch");
    Tensor<T> out(a->value.shape);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = a->value.data[i] + b->value.data[i];
    auto node = make_op<T>(std::move(out), {a, b});
    Node<T>* na = a.get();
    Node<T>* nb = b.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        for (Node<T>* n : {na, nb})
            if (n->requires_grad) {
                n->ensure_grad();
                for (std::size_t i = 0; i < self->grad.data.size(); ++i)
                    n->grad.data[i] += self->grad.data[i];
            }
    };
    return node;
}

// Mean absolute difference, reduced over all elements -> scalar node.
template <class T>
Var<T> mean_abs_diff(const Var<T>& a, const Var<T>& b) {
    require(a->value.shape == b->value.shape, "mean_abs_diff: shape mismatch");
    const std::size_t n = a->value.numel();
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i)
        acc += std::abs(a->value.data[i] - b->value.data[i]);
    Tensor<T> out(1, 1, 1);
    out.data[0] = acc / T(n);
    auto node = make_op<T>(std::move(out), {a, b});
    Node<T>* na = a.get();
    Node<T>* nb = b.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        const T g = self->grad.data[0] / T(n);
        if (na->requires_grad) na->ensure_grad();
        if (nb->requires_grad) nb->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
            const T d = na->value.data[i] - nb->value.data[i];
            const T s = d > T(0) ? g : (d < T(0) ? -g : T(0));
            if (na->requires_grad) na->grad.data[i] += s;
            if (nb->requires_grad) nb->grad.data[i] -= s;
        }
    };
    return node;
}

// Mean binary cross entropy between a probability map and a fixed target.
// Probabilities are clamped to [eps, 1-eps]; the clamp saturates gradients.
template <class T>
Var<T> bce_mean(const Var<T>& prob, const Tensor<T>& target, T eps = T(1e-7)) {
    require(prob->value.shape == target.shape, "bce_mean: shape mismatch");
    const std::size_t n = prob->value.numel();
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        const T p = std::clamp(prob->value.data[i], eps, T(1) - eps);
        const T t = target.data[i];
        acc -= t * std::log(p) + (T(1) - t) * std::log(T(1) - p);
    }
    Tensor<T> out(1, 1, 1);
    out.data[0] = acc / T(n);
    auto node = make_op<T>(std::move(out), {prob});
    Node<T>* np = prob.get();
    Node<T>* self = node.get();
    node->backward_fn = [=, target = target]() {
        if (!np->requires_grad) return;
        np->ensure_grad();
        const T g = self->grad.data[0] / T(n);
        for (std::size_t i = 0; i < n; ++i) {
            const T raw = np->value.data[i];
            if (raw < eps || raw > T(1) - eps) continue;  // saturated by clamp
            const T t = target.data[i];
            np->grad.data[i] += g * (-(t / raw) + (T(1) - t) / (T(1) - raw));
        }
    };
    return node;
}

// Mean sigmoid cross entropy of a logit map against a constant target label.
template <class T>
Var<T> bce_logits_const(const Var<T>& logits, T label) {
    const std::size_t n = logits->value.numel();
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        const T z = logits->value.data[i];
        // max(z,0) - z*t + log(1+exp(-|z|)), numerically stable
        acc += std::max(z, T(0)) - z * label + std::log1p(std::exp(-std::abs(z)));
    }
    Tensor<T> out(1, 1, 1);
    out.data[0] = acc / T(n);
    auto node = make_op<T>(std::move(out), {logits});
    Node<T>* nl = logits.get();
    Node<T>* self = node.get();
    node->backward_fn = [=]() {
        if (!nl->requires_grad) return;
        nl->ensure_grad();
        const T g = self->grad.data[0] / T(n);
        for (std::size_t i = 0; i < n; ++i) {
            const T z = nl->value.data[i];
            const T s = T(1) / (T(1) + std::exp(-z));
            nl->grad.data[i] += g * (s - label);
        }
    };
    return node;
}

// Weighted sum of scalar nodes.
template <class T>
Var<T> weighted_sum(const std::vector<std::pair<Var<T>, T>>& terms) {
    require(!terms.empty(), "weighted_sum: no terms");
    Tensor<T> out(1, 1, 1);
    std::vector<Var<T>> ins;
    std::vector<T> ws;
    for (auto& [v, w] : terms) {
        require(v->value.numel() == 1, "weighted_sum: non-scalar term");
        out.data[0] += w * v->value.data[0];
        ins.push_back(v);
        ws.push_back(w);
    }
    auto node = make_op<T>(std::move(out), ins);
    Node<T>* self = node.get();
    node->backward_fn = [self, ws = std::move(ws)]() {
        for (std::size_t i = 0; i < self->inputs.size(); ++i) {
            auto& in = self->inputs[i];
            if (!in->requires_grad) continue;
            in->ensure_grad();
            in->grad.data[0] += ws[i] * self->grad.data[0];
        }
    };
    return node;
}

}  // namespace ops
}  // namespace deshade
