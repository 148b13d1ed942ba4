#include "speckstack/gmlc.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace speckstack {

std::vector<GaussianClass> fit_classes(const FloatImage& img, const LabelMap& training,
                                       int classes)
{
    if (!img.same_shape(training))
        throw DomainError("image and training labels differ in size");
    if (classes < 1 || classes >= kUnlabeled)
        throw DomainError("class count out of range");
    const auto k = static_cast<std::size_t>(classes);
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const auto c = training.pixels()[i];
        if (c < classes) {
            sum[c] += img.pixels()[i];
            ++count[c];
        }
    }
    std::vector<GaussianClass> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] < 2)
            throw DomainError("class " + std::to_string(c) + " has fewer than 2 training pixels");
        out[c].label = std::to_string(c);
        out[c].mean = sum[c] / static_cast<double>(count[c]);
    }
    std::vector<double> ss(k, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const auto c = training.pixels()[i];
        if (c < classes) {
            const double d = img.pixels()[i] - out[c].mean;
            ss[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        out[c].variance = std::max(kVarianceFloor, ss[c] / static_cast<double>(count[c] - 1));
    return out;
}

LabelMap roi_label_map(const RoiSet& rois, int width, int height)
{
    if (rois.regions.size() >= kUnlabeled)
        throw DomainError("too many regions for a label map");
    LabelMap map(width, height, kUnlabeled);
    for (std::size_t r = 0; r < rois.regions.size(); ++r) {
        for (auto [x, y] : region_pixels(rois.regions[r], width, height))
            map(x, y) = static_cast<std::uint8_t>(r);
    }
    return map;
}

std::vector<GaussianClass> fit_classes(const FloatImage& img, const RoiSet& rois)
{
    auto classes = fit_classes(img, roi_label_map(rois, img.width(), img.height()),
                               static_cast<int>(rois.regions.size()));
    for (std::size_t r = 0; r < classes.size(); ++r)
        classes[r].label = rois.regions[r].name;
    return classes;
}

LabelMap classify(const FloatImage& img, const std::vector<GaussianClass>& classes)
{
    if (classes.size() < 2)
        throw DomainError("classification needs at least 2 classes");
    if (classes.size() >= kUnlabeled)
        throw DomainError("too many classes for a label map");
    std::vector<double> offset(classes.size());
    std::vector<double> inv_two_var(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const double var = std::max(kVarianceFloor, classes[c].variance);
        if (!(classes[c].prior > 0.0))
            throw DomainError("class priors must be positive");
        offset[c] = std::log(classes[c].prior) - 0.5 * std::log(2.0 * std::numbers::pi * var);
        inv_two_var[c] = 0.5 / var;
    }
    LabelMap out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = img.pixels()[i];
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const double d = v - classes[c].mean;
            const double score = offset[c] - d * d * inv_two_var[c];
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        out.pixels()[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

}  // namespace speckstack
