// SPDX-License-Identifier: Apache-2.0
//
// Image containers and pixel-space primitives: sRGB -> CIELAB conversion,
// aspect-preserving resize, matte binarization, PNG I/O. All operations are
// pure functions; images are (h, w, c) tensors with values in [0, 1].
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "deshade/tensor.hpp"

namespace deshade::img {

using Image = Tensor<float>;

// --- color -----------------------------------------------------------------

// IEC 61966-2-1 sRGB decoding + CIE L*a*b* under D65. Output channels are
// (L, a, b) with L in [0,100].
template <class T>
Tensor<T> srgb_to_lab(const Tensor<T>& rgb) {
    require(rgb.shape.c == 3, "srgb_to_lab: input must have 3 channels");
    auto linearize = [](double u) {
        return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
    };
    auto f = [](double t) {
        const double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
    };
    Tensor<T> out(rgb.shape);
    for (int y = 0; y < rgb.shape.h; ++y)
        for (int x = 0; x < rgb.shape.w; ++x) {
            const double r = linearize(rgb.at(y, x, 0));
            const double g = linearize(rgb.at(y, x, 1));
            const double b = linearize(rgb.at(y, x, 2));
            const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
            const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
            const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
            const double fx = f(X / 0.95047), fy = f(Y), fz = f(Z / 1.08883);
            out.at(y, x, 0) = static_cast<T>(116.0 * fy - 16.0);
            out.at(y, x, 1) = static_cast<T>(500.0 * (fx - fy));
            out.at(y, x, 2) = static_cast<T>(200.0 * (fy - fz));
        }
    return out;
}

// --- resize ----------------------------------------------------------------

// Bilinear resize with half-pixel-center sampling, clamped to [0,1].
template <class T>
Tensor<T> resize_bilinear(const Tensor<T>& in, int oh, int ow) {
    require(oh >= 1 && ow >= 1, "resize: empty target");
    Tensor<T> out(oh, ow, in.shape.c);
    const double sy = static_cast<double>(in.shape.h) / oh;
    const double sx = static_cast<double>(in.shape.w) / ow;
    for (int oy = 0; oy < oh; ++oy) {
        double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0,
                               static_cast<double>(in.shape.h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, in.shape.h - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < ow; ++ox) {
            double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(in.shape.w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, in.shape.w - 1);
            const double wx = fx - x0;
            for (int c = 0; c < in.shape.c; ++c) {
                const double v =
                    (1 - wy) * ((1 - wx) * in.at(y0, x0, c) + wx * in.at(y0, x1, c)) +
                    wy * ((1 - wx) * in.at(y1, x0, c) + wx * in.at(y1, x1, c));
                out.at(oy, ox, c) = static_cast<T>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

template <class T>
Tensor<T> resize_nearest(const Tensor<T>& in, int oh, int ow) {
    Tensor<T> out(oh, ow, in.shape.c);
    for (int oy = 0; oy < oh; ++oy) {
        const int iy = std::min(static_cast<int>((oy + 0.5) * in.shape.h / oh),
                                in.shape.h - 1);
        for (int ox = 0; ox < ow; ++ox) {
            const int ix = std::min(static_cast<int>((ox + 0.5) * in.shape.w / ow),
                                    in.shape.w - 1);
            for (int c = 0; c < in.shape.c; ++c)
                out.at(oy, ox, c) = in.at(iy, ix, c);
        }
    }
    return out;
}

// Scale so the short side hits `short_side`; the long side is rounded
// half-up so dataset statistics stay reproducible.
template <class T>
Tensor<T> resize_preserve_aspect(const Tensor<T>& in, int short_side) {
    require(short_side >= 8, "resize_preserve_aspect: short side must be >= 8");
    const double scale =
        static_cast<double>(short_side) / std::min(in.shape.h, in.shape.w);
    int oh, ow;
    if (in.shape.h <= in.shape.w) {
        oh = short_side;
        ow = static_cast<int>(std::floor(in.shape.w * scale + 0.5));
    } else {
        ow = short_side;
        oh = static_cast<int>(std::floor(in.shape.h * scale + 0.5));
    }
    return resize_bilinear(in, oh, ow);
}

// --- mattes ----------------------------------------------------------------

// Shadow indicator from a darkening matte: pixels whose channel-mean matte
// value falls below the threshold are shadow (1).
template <class T>
Tensor<T> binarize_matte(const Tensor<T>& matte, T threshold = T(0.95)) {
    require(threshold > T(0) && threshold < T(1),
            "binarize_matte: threshold must be in (0,1)");
    Tensor<T> mask(matte.shape.h, matte.shape.w, 1);
    for (int y = 0; y < matte.shape.h; ++y)
        for (int x = 0; x < matte.shape.w; ++x) {
            T mean = T(0);
            for (int c = 0; c < matte.shape.c; ++c) mean += matte.at(y, x, c);
            mean /= T(matte.shape.c);
            mask.at(y, x, 0) = mean < threshold ? T(1) : T(0);
        }
    return mask;
}

template <class T>
Tensor<T> clamp01(Tensor<T> t) {
    for (auto& v : t.data) v = std::clamp(v, T(0), T(1));
    return t;
}

template <class T>
Tensor<T> threshold_mask(const Tensor<T>& soft, T thresh = T(0.5)) {
    Tensor<T> out(soft.shape);
    for (std::size_t i = 0; i < soft.data.size(); ++i)
        out.data[i] = soft.data[i] >= thresh ? T(1) : T(0);
    return out;
}

// --- PNG I/O (png_io.cpp) --------------------------------------------------

// Load an 8-bit PNG as (h, w, 1|3) floats; values are pixel/255 exactly.
Image load_png(const std::string& path);
// Save as 8-bit PNG; values are clamped then scaled by 255 and rounded
// half-up.
void save_png(const std::string& path, const Image& image);

}  // namespace deshade::img
