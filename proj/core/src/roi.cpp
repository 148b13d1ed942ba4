#include "speckstack/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace speckstack {

using nlohmann::json;

std::string to_string(IdealPolicy policy)
{
    switch (policy) {
    case IdealPolicy::Mean:
        return "mean";
    case IdealPolicy::Median:
        return "median";
    case IdealPolicy::LowerQuartile:
        return "q25";
    case IdealPolicy::UpperQuartile:
        return "q75";
    case IdealPolicy::Free:
        return "free";
    }
    return "mean";
}

IdealPolicy parse_policy(const std::string& text)
{
    if (text == "mean")
        return IdealPolicy::Mean;
    if (text == "median")
        return IdealPolicy::Median;
    if (text == "q25" || text == "lower-quartile")
        return IdealPolicy::LowerQuartile;
    if (text == "q75" || text == "upper-quartile")
        return IdealPolicy::UpperQuartile;
    if (text == "free")
        return IdealPolicy::Free;
    throw ParseError("unknown ideal-value policy '" + text + "'");
}

void check_in_bounds(const Region& region, int width, int height)
{
    if (const auto* r = std::get_if<RectShape>(&region.shape)) {
        if (r->width <= 0 || r->height <= 0)
            throw DomainError("region '" + region.name + "' has an empty rectangle");
        if (r->x < 0 || r->y < 0 || r->x + r->width > width || r->y + r->height > height)
            throw DomainError("region '" + region.name + "' lies outside the image");
        return;
    }
    const auto& poly = std::get<PolygonShape>(region.shape);
    if (poly.vertices.size() < 3)
        throw DomainError("region '" + region.name + "' polygon needs at least 3 vertices");
    for (auto [x, y] : poly.vertices) {
        if (!(x >= 0.0 && y >= 0.0 && x <= width && y <= height))
            throw DomainError("region '" + region.name + "' lies outside the image");
    }
}

namespace {

bool inside_polygon(const PolygonShape& poly, double px, double py)
{
    bool inside = false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        const auto [xi, yi] = v[i];
        const auto [xj, yj] = v[j];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

}  // namespace

std::vector<std::pair<int, int>> region_pixels(const Region& region, int width, int height)
{
    check_in_bounds(region, width, height);
    std::vector<std::pair<int, int>> pixels;
    if (const auto* r = std::get_if<RectShape>(&region.shape)) {
        pixels.reserve(static_cast<std::size_t>(r->width) * r->height);
        for (int y = r->y; y < r->y + r->height; ++y) {
            for (int x = r->x; x < r->x + r->width; ++x)
                pixels.emplace_back(x, y);
        }
        return pixels;
    }
    const auto& poly = std::get<PolygonShape>(region.shape);
    double y_min = height, y_max = 0.0;
    for (auto [x, y] : poly.vertices) {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }
    const int y0 = std::max(0, static_cast<int>(std::floor(y_min)));
    const int y1 = std::min(height, static_cast<int>(std::ceil(y_max)));
    for (int y = y0; y < y1; ++y) {
        for (int x = 0; x < width; ++x) {
            if (inside_polygon(poly, x + 0.5, y + 0.5))
                pixels.emplace_back(x, y);
        }
    }
    return pixels;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw DomainError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

RegionStats region_stats(const QuantizedImage& img, const Region& region)
{
    const auto pixels = region_pixels(region, img.width(), img.height());
    if (pixels.empty())
        throw DomainError("region '" + region.name + "' contains no pixels");
    RegionStats stats;
    stats.count = pixels.size();
    stats.histogram.assign(static_cast<std::size_t>(img.levels()) + 1, 0);
    std::vector<double> values;
    values.reserve(pixels.size());
    for (auto [x, y] : pixels) {
        const auto v = img(x, y);
        ++stats.histogram[v];
        values.push_back(v);
    }
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0)
                 / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    stats.median = quantile(values, 0.5);
    stats.q25 = quantile(values, 0.25);
    stats.q75 = quantile(values, 0.75);
    return stats;
}

int resolve_ideal(const Region& region, const RegionStats& stats, int levels)
{
    double value = stats.mean;
    switch (region.policy) {
    case IdealPolicy::Mean:
        value = stats.mean;
        break;
    case IdealPolicy::Median:
        value = stats.median;
        break;
    case IdealPolicy::LowerQuartile:
        value = stats.q25;
        break;
    case IdealPolicy::UpperQuartile:
        value = stats.q75;
        break;
    case IdealPolicy::Free:
        if (!region.free_value)
            throw DomainError("region '" + region.name + "' uses the free policy without a value");
        value = *region.free_value;
        if (!(value >= 0.0 && value <= levels) || value != std::floor(value))
            throw DomainError("free ideal value of region '" + region.name
                              + "' must be a gray level in {0.." + std::to_string(levels) + "}");
        break;
    }
    return std::clamp(static_cast<int>(std::lround(value)), 0, levels);
}

RoiSet resolve_ideals(const QuantizedImage& img, RoiSet rois)
{
    for (auto& region : rois.regions)
        region.ideal = resolve_ideal(region, region_stats(img, region), img.levels());
    return rois;
}

namespace {

Region region_from_json(const json& j)
{
    Region region;
    region.name = j.value("name", std::string{});
    if (j.contains("rect")) {
        const auto& r = j.at("rect");
        region.shape = RectShape{r.at("x").get<int>(), r.at("y").get<int>(),
                                 r.at("width").get<int>(), r.at("height").get<int>()};
    } else if (j.contains("polygon")) {
        PolygonShape poly;
        for (const auto& v : j.at("polygon")) {
            if (!v.is_array() || v.size() != 2)
                throw ParseError("polygon vertices must be [x, y] pairs");
            poly.vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
        region.shape = std::move(poly);
    } else {
        throw ParseError("region '" + region.name + "' needs a 'rect' or 'polygon'");
    }
    region.policy = parse_policy(j.value("policy", std::string{"mean"}));
    if (j.contains("value"))
        region.free_value = j.at("value").get<double>();
    if (j.contains("ideal"))
        region.ideal = j.at("ideal").get<int>();
    return region;
}

}  // namespace

RoiSet parse_roi_json(const std::string& text)
{
    try {
        const json doc = json::parse(text);
        if (!doc.is_object() || !doc.contains("regions") || !doc.at("regions").is_array())
            throw ParseError("ROI document needs a 'regions' array");
        RoiSet rois;
        for (const auto& r : doc.at("regions"))
            rois.regions.push_back(region_from_json(r));
        return rois;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid ROI JSON: ") + e.what());
    }
}

std::string to_json(const RoiSet& rois)
{
    json regions = json::array();
    for (const auto& region : rois.regions) {
        json r;
        r["name"] = region.name;
        if (const auto* rect = std::get_if<RectShape>(&region.shape)) {
            r["rect"] = {{"x", rect->x}, {"y", rect->y}, {"width", rect->width},
                         {"height", rect->height}};
        } else {
            json verts = json::array();
            for (auto [x, y] : std::get<PolygonShape>(region.shape).vertices)
                verts.push_back({x, y});
            r["polygon"] = std::move(verts);
        }
        r["policy"] = to_string(region.policy);
        if (region.free_value)
            r["value"] = *region.free_value;
        if (region.ideal)
            r["ideal"] = *region.ideal;
        regions.push_back(std::move(r));
    }
    return json{{"regions", regions}}.dump(2);
}

std::string region_stats_json(const QuantizedImage& img, const RoiSet& rois)
{
    json regions = json::array();
    for (const auto& region : rois.regions) {
        const RegionStats stats = region_stats(img, region);
        Region by_mean = region;
        by_mean.policy = IdealPolicy::Mean;
        regions.push_back({{"name", region.name},
                           {"count", stats.count},
                           {"mean", stats.mean},
                           {"median", stats.median},
                           {"q25", stats.q25},
                           {"q75", stats.q75},
                           {"policy", to_string(region.policy)},
                           {"suggested_ideal", resolve_ideal(by_mean, stats, img.levels())},
                           {"ideal", resolve_ideal(region, stats, img.levels())}});
    }
    return json{{"levels", img.levels()}, {"regions", regions}}.dump(2);
}

}  // namespace speckstack
