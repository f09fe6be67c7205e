// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace deshade {

// Dense 4-d array. Feature maps use (h, w, c, 1); convolution kernels use
// (kh, kw, cin, cout). Layout is row-major with the last axis contiguous,
// so per-pixel channel vectors (n == 1) and per-tap output vectors are
// contiguous.
struct Shape {
    int h = 1, w = 1, c = 1, n = 1;

    bool operator==(const Shape& o) const {
        return h == o.h && w == o.w && c == o.c && n == o.n;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::size_t numel() const {
        return static_cast<std::size_t>(h) * w * c * n;
    }
    std::string str() const {
        return std::to_string(h) + "x" + std::to_string(w) + "x" +
               std::to_string(c) + "x" + std::to_string(n);
    }
};

template <class T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape s, T fill = T(0))
        : shape(s), data(s.numel(), fill) {}
    Tensor(int h, int w, int c, T fill = T(0))
        : Tensor(Shape{h, w, c, 1}, fill) {}

    Shape shape;
    std::vector<T> data;

    std::size_t index(int y, int x, int ch, int k = 0) const {
        return ((static_cast<std::size_t>(y) * shape.w + x) * shape.c + ch) *
                   shape.n + k;
    }
    T& at(int y, int x, int ch, int k = 0) { return data[index(y, x, ch, k)]; }
    const T& at(int y, int x, int ch, int k = 0) const {
        return data[index(y, x, ch, k)];
    }

    std::size_t numel() const { return data.size(); }
    bool empty() const { return data.empty(); }
    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out(shape);
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

void log_warn(const std::string& msg);  // util.cpp, writes to stderr

}  // namespace deshade
