#pragma once

#include <string>
#include <vector>

#include "speckstack/image.hpp"
#include "speckstack/roi.hpp"

namespace speckstack {

/// Univariate Gaussian class model for pixelwise maximum likelihood.
struct GaussianClass {
    std::string label;
    double mean = 0.0;
    double variance = 1.0;
    double prior = 1.0;
};

/// Variances below this floor (gray level squared) are raised to it.
inline constexpr double kVarianceFloor = 1e-6;

/// Sample mean and unbiased variance of each class's pixels. Class i is
/// taken from pixels labeled i; every class needs at least 2 pixels.
std::vector<GaussianClass> fit_classes(const FloatImage& img, const LabelMap& training,
                                       int classes);

/// One class per region, in RoiSet order, with uniform priors.
std::vector<GaussianClass> fit_classes(const FloatImage& img, const RoiSet& rois);

/// Per-pixel argmax of log N(v; mean, variance) + log prior. Ties go to the
/// lowest class index.
LabelMap classify(const FloatImage& img, const std::vector<GaussianClass>& classes);

/// Label map of the ROI pixels (region index) with kUnlabeled elsewhere.
LabelMap roi_label_map(const RoiSet& rois, int width, int height);

}  // namespace speckstack
