// SPDX-License-Identifier: Apache-2.0
#include "deshade/metrics.hpp"

#include <cmath>
#include <vector>

namespace deshade::metrics {

namespace {

bool in_region(const Image& mask, int y, int x) {
    return mask.at(y, x, 0) >= 0.5f;
}

}  // namespace

LabError lab_region_error(const Image& pred, const Image& gt, const Image& mask,
                          LabErrorMode mode) {
    require(pred.shape == gt.shape, "lab_region_error: pred/gt shape mismatch");
    require(mask.shape.h == pred.shape.h && mask.shape.w == pred.shape.w &&
                mask.shape.c == 1,
            "lab_region_error: mask shape mismatch");
    const auto lp = img::srgb_to_lab(img::clamp01(pred).cast<double>());
    const auto lg = img::srgb_to_lab(img::clamp01(gt).cast<double>());

    double acc_s = 0, acc_ns = 0;
    std::size_t n_s = 0, n_ns = 0;
    for (int y = 0; y < pred.shape.h; ++y)
        for (int x = 0; x < pred.shape.w; ++x) {
            double v = 0;
            for (int c = 0; c < 3; ++c) {
                const double d = lp.at(y, x, c) - lg.at(y, x, c);
                v += mode == LabErrorMode::mean_abs ? std::abs(d) : d * d;
            }
            v /= 3.0;
            if (in_region(mask, y, x)) {
                acc_s += v;
                ++n_s;
            } else {
                acc_ns += v;
                ++n_ns;
            }
        }

    auto finish = [&](double acc, std::size_t n) -> std::optional<double> {
        if (n == 0) return std::nullopt;
        const double m = acc / static_cast<double>(n);
        return mode == LabErrorMode::mean_abs ? m : std::sqrt(m);
    };
    LabError e;
    e.n_s = n_s;
    e.n_ns = n_ns;
    e.s = finish(acc_s, n_s);
    e.ns = finish(acc_ns, n_ns);
    e.all = finish(acc_s + acc_ns, n_s + n_ns);
    return e;
}

double psnr_region(const Image& pred, const Image& gt, const Image& mask) {
    require(pred.shape == gt.shape, "psnr_region: shape mismatch");
    double acc = 0;
    std::size_t n = 0;
    for (int y = 0; y < pred.shape.h; ++y)
        for (int x = 0; x < pred.shape.w; ++x) {
            if (!in_region(mask, y, x)) continue;
            for (int c = 0; c < pred.shape.c; ++c) {
                const double d =
                    std::clamp(static_cast<double>(pred.at(y, x, c)), 0.0, 1.0) -
                    std::clamp(static_cast<double>(gt.at(y, x, c)), 0.0, 1.0);
                acc += d * d;
            }
            ++n;
        }
    require(n > 0, "psnr_region: empty region");
    const double mse = acc / (static_cast<double>(n) * pred.shape.c);
    if (mse <= 0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

namespace {

// Separable Gaussian filtering with border renormalization; equivalent to
// a 2-d window clipped at the image edge with its weights rescaled.
std::vector<double> gaussian_kernel(int radius, double sigma) {
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

Tensor<double> gauss_filter(const Tensor<double>& in,
                            const std::vector<double>& k) {
    const int r = (static_cast<int>(k.size()) - 1) / 2;
    const int h = in.shape.h, w = in.shape.w, c = in.shape.c;
    Tensor<double> tmp(h, w, c), out(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0, wsum = 0;
                for (int i = -r; i <= r; ++i) {
                    const int xx = x + i;
                    if (xx < 0 || xx >= w) continue;
                    acc += k[i + r] * in.at(y, xx, ch);
                    wsum += k[i + r];
                }
                tmp.at(y, x, ch) = acc / wsum;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0, wsum = 0;
                for (int i = -r; i <= r; ++i) {
                    const int yy = y + i;
                    if (yy < 0 || yy >= h) continue;
                    acc += k[i + r] * tmp.at(yy, x, ch);
                    wsum += k[i + r];
                }
                out.at(y, x, ch) = acc / wsum;
            }
    return out;
}

}  // namespace

double ssim_region(const Image& pred, const Image& gt, const Image& mask) {
    require(pred.shape == gt.shape, "ssim_region: shape mismatch");
    const auto a = img::clamp01(pred).cast<double>();
    const auto b = img::clamp01(gt).cast<double>();
    const auto k = gaussian_kernel(5, 1.5);

    const int c = pred.shape.c;
    Tensor<double> aa(a.shape), bb(b.shape), ab(a.shape);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        aa.data[i] = a.data[i] * a.data[i];
        bb.data[i] = b.data[i] * b.data[i];
        ab.data[i] = a.data[i] * b.data[i];
    }
    const auto mu_a = gauss_filter(a, k), mu_b = gauss_filter(b, k);
    const auto s_aa = gauss_filter(aa, k), s_bb = gauss_filter(bb, k);
    const auto s_ab = gauss_filter(ab, k);

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;  // L = 1
    double acc = 0;
    std::size_t n = 0;
    for (int y = 0; y < pred.shape.h; ++y)
        for (int x = 0; x < pred.shape.w; ++x) {
            if (!in_region(mask, y, x)) continue;
            double v = 0;
            for (int ch = 0; ch < c; ++ch) {
                const double ma = mu_a.at(y, x, ch), mb = mu_b.at(y, x, ch);
                const double va = s_aa.at(y, x, ch) - ma * ma;
                const double vb = s_bb.at(y, x, ch) - mb * mb;
                const double cov = s_ab.at(y, x, ch) - ma * mb;
                v += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
            acc += v / c;
            ++n;
        }
    require(n > 0, "ssim_region: empty region");
    return acc / static_cast<double>(n);
}

DetectionReport ber(const Image& pred_mask, const Image& gt_mask,
                    float threshold) {
    require(pred_mask.shape.h == gt_mask.shape.h &&
                pred_mask.shape.w == gt_mask.shape.w,
            "ber: shape mismatch");
    DetectionReport r;
    for (int y = 0; y < gt_mask.shape.h; ++y)
        for (int x = 0; x < gt_mask.shape.w; ++x) {
            const bool p = pred_mask.at(y, x, 0) >= threshold;
            const bool g = gt_mask.at(y, x, 0) >= 0.5f;
            if (p && g) ++r.tp;
            else if (!p && !g) ++r.tn;
            else if (p && !g) ++r.fp;
            else ++r.fn;
        }
    const std::size_t pos = r.tp + r.fn, neg = r.tn + r.fp;
    if (pos > 0)
        r.ber_s = 100.0 * static_cast<double>(r.fn) / static_cast<double>(pos);
    if (neg > 0)
        r.ber_ns = 100.0 * static_cast<double>(r.fp) / static_cast<double>(neg);
    if (pos > 0 && neg > 0)
        r.ber = 100.0 *
                (1.0 - 0.5 * (static_cast<double>(r.tp) / pos +
                              static_cast<double>(r.tn) / neg));
    return r;
}

}  // namespace deshade::metrics
