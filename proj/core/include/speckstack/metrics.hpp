#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "speckstack/image.hpp"

namespace speckstack {

struct QIndex {
    double value = 0.0;
    std::size_t blocks = 0;             // blocks that entered the average
    std::size_t degenerate_blocks = 0;  // blocks skipped for a zero denominator
};

/// Universal image quality index averaged over every block x block window
/// (stride 1). Each block contributes the product of its correlation,
/// luminance and contrast factors, evaluated in the combined form
/// 4 s_xy mx my / ((s_x^2 + s_y^2)(mx^2 + my^2)) with unbiased (N - 1)
/// moments. Throws UndefinedMetricError when every block is degenerate.
QIndex q_index(const FloatImage& x, const FloatImage& y, int block = 8);

/// 4-neighbour Laplacian [0 1 0; 1 -4 1; 0 1 0] with replicate borders.
FloatImage laplacian(const FloatImage& img);

/// Pearson correlation between the Laplacians of x and y. Throws
/// UndefinedMetricError when either Laplacian has zero variance.
double beta_index(const FloatImage& x, const FloatImage& y);

/// |mu1 - mu2| / sqrt(sigma1^2 + sigma2^2).
double contrast(double mu1, double sigma1, double mu2, double sigma2);

/// |observed - theoretical| / theoretical, theoretical > 0.
double relative_contrast_error(double theoretical, double observed);

/// Sample mean and standard deviation (N - 1) of the pixels with `label`.
struct SampleMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
};
SampleMoments label_moments(const FloatImage& img, const LabelMap& labels, std::uint8_t label);

/// Per-class percentage of truth pixels predicted correctly. Classes with no
/// truth pixels are reported as nullopt and listed in `warnings`. Truth
/// pixels equal to kUnlabeled are ignored.
struct ConfusionStats {
    std::vector<std::optional<double>> accuracy;
    std::vector<std::vector<std::size_t>> matrix;  // [truth][predicted]
    std::vector<std::string> warnings;
};
ConfusionStats confusion_stats(const LabelMap& predicted, const LabelMap& truth, int classes);

/// Quality figures for one filtered image.
struct MetricsReport {
    std::optional<double> q_index;
    std::size_t q_degenerate_blocks = 0;
    std::optional<double> beta_index;
    std::vector<std::optional<double>> class_accuracy;
    std::optional<double> contrast;
    std::optional<double> relative_contrast_error;

    std::string to_json() const;
};

}  // namespace speckstack
