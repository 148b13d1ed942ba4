#include "speckstack/metrics.hpp"

#include <cmath>

#include <json.hpp>

namespace speckstack {

namespace {

void check_same_shape(const FloatImage& x, const FloatImage& y)
{
    if (!x.same_shape(y))
        throw DomainError("images differ in size");
}

}  // namespace

QIndex q_index(const FloatImage& x, const FloatImage& y, int block)
{
    check_same_shape(x, y);
    if (block < 2)
        throw DomainError("Q block size must be at least 2");
    if (x.width() < block || x.height() < block)
        throw DomainError("image smaller than the Q block");
    const double n = static_cast<double>(block) * block;
    QIndex result;
    double sum = 0.0;
    for (int by = 0; by + block <= x.height(); ++by) {
        for (int bx = 0; bx + block <= x.width(); ++bx) {
            double sx = 0.0, sy = 0.0;
            for (int j = 0; j < block; ++j) {
                for (int i = 0; i < block; ++i) {
                    sx += x(bx + i, by + j);
                    sy += y(bx + i, by + j);
                }
            }
            const double mx = sx / n;
            const double my = sy / n;
            double vxx = 0.0, vyy = 0.0, vxy = 0.0;
            for (int j = 0; j < block; ++j) {
                for (int i = 0; i < block; ++i) {
                    const double dx = x(bx + i, by + j) - mx;
                    const double dy = y(bx + i, by + j) - my;
                    vxx += dx * dx;
                    vyy += dy * dy;
                    vxy += dx * dy;
                }
            }
            vxx /= n - 1.0;
            vyy /= n - 1.0;
            vxy /= n - 1.0;
            const double denom = (vxx + vyy) * (mx * mx + my * my);
            if (denom == 0.0) {
                ++result.degenerate_blocks;
                continue;
            }
            sum += 4.0 * vxy * mx * my / denom;
            ++result.blocks;
        }
    }
    if (result.blocks == 0)
        throw UndefinedMetricError("Q index undefined: every block is degenerate");
    result.value = sum / static_cast<double>(result.blocks);
    return result;
}

FloatImage laplacian(const FloatImage& img)
{
    FloatImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out(x, y) = img.clamped(x, y - 1) + img.clamped(x - 1, y) + img.clamped(x + 1, y)
                        + img.clamped(x, y + 1) - 4.0 * img(x, y);
        }
    }
    return out;
}

double beta_index(const FloatImage& x, const FloatImage& y)
{
    check_same_shape(x, y);
    if (x.empty())
        throw DomainError("beta index of an empty image");
    const auto lx = laplacian(x);
    const auto ly = laplacian(y);
    const auto a = lx.pixels();
    const auto b = ly.pixels();
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw UndefinedMetricError("beta index undefined: Laplacian has zero variance");
    return sab / std::sqrt(saa * sbb);
}

double contrast(double mu1, double sigma1, double mu2, double sigma2)
{
    const double spread = sigma1 * sigma1 + sigma2 * sigma2;
    if (!(spread > 0.0))
        throw DomainError("contrast undefined when both variances are zero");
    return std::abs(mu1 - mu2) / std::sqrt(spread);
}

double relative_contrast_error(double theoretical, double observed)
{
    if (!(theoretical > 0.0))
        throw DomainError("relative contrast error needs a positive theoretical contrast");
    return std::abs(observed - theoretical) / theoretical;
}

SampleMoments label_moments(const FloatImage& img, const LabelMap& labels, std::uint8_t label)
{
    if (!img.same_shape(labels))
        throw DomainError("image and label map differ in size");
    SampleMoments m;
    double sum = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (labels.pixels()[i] == label) {
            sum += img.pixels()[i];
            ++m.count;
        }
    }
    if (m.count < 2)
        throw DomainError("label has fewer than 2 pixels");
    m.mean = sum / static_cast<double>(m.count);
    double ss = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (labels.pixels()[i] == label) {
            const double d = img.pixels()[i] - m.mean;
            ss += d * d;
        }
    }
    m.stddev = std::sqrt(ss / static_cast<double>(m.count - 1));
    return m;
}

ConfusionStats confusion_stats(const LabelMap& predicted, const LabelMap& truth, int classes)
{
    if (!predicted.same_shape(truth))
        throw DomainError("label maps differ in size");
    if (classes < 1 || classes >= kUnlabeled)
        throw DomainError("class count out of range");
    ConfusionStats stats;
    const auto k = static_cast<std::size_t>(classes);
    stats.matrix.assign(k, std::vector<std::size_t>(k + 1, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = truth.pixels()[i];
        if (t == kUnlabeled)
            continue;
        if (t >= classes)
            throw DomainError("truth label exceeds class count");
        const auto p = predicted.pixels()[i];
        // Column k collects predictions outside the class range.
        ++stats.matrix[t][p < classes ? p : k];
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t total = 0;
        for (auto v : stats.matrix[c])
            total += v;
        if (total == 0) {
            stats.accuracy.push_back(std::nullopt);
            stats.warnings.push_back("class " + std::to_string(c) + " has no truth pixels");
            continue;
        }
        stats.accuracy.push_back(100.0 * static_cast<double>(stats.matrix[c][c])
                                 / static_cast<double>(total));
    }
    return stats;
}

std::string MetricsReport::to_json() const
{
    nlohmann::json j;
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j["q_index"] = opt(q_index);
    j["q_degenerate_blocks"] = q_degenerate_blocks;
    j["beta_index"] = opt(beta_index);
    nlohmann::json acc = nlohmann::json::array();
    for (const auto& a : class_accuracy)
        acc.push_back(opt(a));
    j["class_accuracy"] = std::move(acc);
    j["contrast"] = opt(contrast);
    j["relative_contrast_error"] = opt(relative_contrast_error);
    return j.dump(2);
}

}  // namespace speckstack
