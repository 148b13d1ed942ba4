#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "speckstack/image.hpp"

namespace speckstack {

/// Pixels [x, x + width) x [y, y + height).
struct RectShape {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

/// Vertices in pixel coordinates; a pixel belongs to the polygon when its
/// center (x + 0.5, y + 0.5) is inside under the even-odd rule.
struct PolygonShape {
    std::vector<std::pair<double, double>> vertices;
};

using RegionShape = std::variant<RectShape, PolygonShape>;

enum class IdealPolicy { Mean, Median, LowerQuartile, UpperQuartile, Free };

std::string to_string(IdealPolicy policy);
/// Accepts mean, median, q25 / lower-quartile, q75 / upper-quartile, free.
IdealPolicy parse_policy(const std::string& text);

struct Region {
    std::string name;
    RegionShape shape;
    IdealPolicy policy = IdealPolicy::Mean;
    /// Required for IdealPolicy::Free.
    std::optional<double> free_value;
    /// Filled in by resolve_ideals().
    std::optional<int> ideal;
};

struct RoiSet {
    std::vector<Region> regions;
};

/// Throws DomainError when the region does not fit a width x height image.
void check_in_bounds(const Region& region, int width, int height);

/// Pixel coordinates covered by the region, in raster order.
std::vector<std::pair<int, int>> region_pixels(const Region& region, int width, int height);

/// Descriptive statistics of the gray levels inside one region. Quantiles
/// use linear interpolation between order statistics: position (N - 1) p.
struct RegionStats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::vector<std::size_t> histogram;
};

/// Throws DomainError for an empty region.
RegionStats region_stats(const QuantizedImage& img, const Region& region);

/// Linear-interpolation quantile of unsorted values, 0 <= p <= 1.
double quantile(std::vector<double> values, double p);

/// Gray level for the region's policy: the chosen statistic rounded to the
/// nearest level. Free values must already be in {0..levels}.
int resolve_ideal(const Region& region, const RegionStats& stats, int levels);

/// Fills Region::ideal for every region from statistics on `img`.
RoiSet resolve_ideals(const QuantizedImage& img, RoiSet rois);

/// JSON wire format shared by the CLI and the service:
/// {"regions": [{"name": "...", "rect": {"x":..,"y":..,"width":..,"height":..}
///               | "polygon": [[x, y], ...], "policy": "mean", "value": 12}]}
RoiSet parse_roi_json(const std::string& text);
std::string to_json(const RoiSet& rois);

/// Per-region statistics as served to the studio and printed by the CLI:
/// {"levels": M, "regions": [{"name", "count", "mean", "median", "q25",
/// "q75", "policy", "suggested_ideal", "ideal"}]}. The suggestion is always
/// the rounded mean; "ideal" follows the region's own policy.
std::string region_stats_json(const QuantizedImage& img, const RoiSet& rois);

}  // namespace speckstack
