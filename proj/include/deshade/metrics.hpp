// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics: region-wise LAB error, shadow-region PSNR/SSIM, and
// balanced error rate for detection. All computations run in double;
// region entries are absent (nullopt) when the region is empty.
#pragma once

#include <optional>

#include "deshade/imaging.hpp"

namespace deshade::metrics {

using img::Image;

enum class LabErrorMode {
    mean_abs,  // mean absolute LAB difference (what the literature reports)
    rms        // strict root-mean-square
};

struct LabError {
    std::optional<double> s, ns, all;
    std::size_t n_s = 0, n_ns = 0;
};

LabError lab_region_error(const Image& pred, const Image& gt, const Image& mask,
                          LabErrorMode mode = LabErrorMode::mean_abs);

// PSNR over masked pixels with peak 1.0, capped at 100 dB for identical
// content.
double psnr_region(const Image& pred, const Image& gt, const Image& mask);
inline constexpr double kPsnrCapDb = 100.0;

// Mean SSIM over masked pixels; 11x11 Gaussian window, sigma 1.5, standard
// constants, channel-averaged. Border windows renormalize in-bounds
// weights.
double ssim_region(const Image& pred, const Image& gt, const Image& mask);

struct DetectionReport {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::optional<double> ber, ber_s, ber_ns;  // percentages
};

// Shadow = positive class. Soft predictions are thresholded first.
DetectionReport ber(const Image& pred_mask, const Image& gt_mask,
                    float threshold = 0.5f);

}  // namespace deshade::metrics
