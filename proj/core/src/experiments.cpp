#include "speckstack/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "speckstack/g0.hpp"
#include "speckstack/gmlc.hpp"
#include "speckstack/metrics.hpp"
#include "speckstack/phantom.hpp"
#include "speckstack/pipeline.hpp"
#include "speckstack/quantize.hpp"
#include "speckstack/training.hpp"

namespace speckstack {

using nlohmann::json;

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::McQuality:
        return "mc-quality";
    case ExperimentKind::Classification:
        return "classification";
    case ExperimentKind::Contrast:
        return "contrast";
    }
    return "mc-quality";
}

ExperimentKind parse_experiment_kind(const std::string& text)
{
    if (text == "mc-quality")
        return ExperimentKind::McQuality;
    if (text == "classification")
        return ExperimentKind::Classification;
    if (text == "contrast")
        return ExperimentKind::Contrast;
    throw ParseError("unknown experiment '" + text + "'");
}

void ExperimentConfig::validate() const
{
    if (replications < 1)
        throw DomainError("replications must be >= 1");
    if (size < 16)
        throw DomainError("image size must be >= 16");
    if (iterations.empty())
        throw DomainError("at least one iteration count is required");
    for (int k : iterations) {
        if (k < 1)
            throw DomainError("iteration counts must be >= 1");
    }
    if (kind == ExperimentKind::McQuality) {
        if (ratios.empty())
            throw DomainError("mc-quality needs at least one contrast ratio");
        for (int c : ratios) {
            if (c != 1 && c != 2 && c != 4 && c != 8)
                throw DomainError("contrast ratios must be 10:1, 10:2, 10:4 or 10:8");
        }
    }
    if (kind == ExperimentKind::Contrast && alpha_pairs.empty())
        throw DomainError("contrast experiment needs at least one alpha pair");
    lee.validate();
    frost.validate();
    QuantizerSpec{levels, clip_percentile, {}, {}}.validate();
    if (!(looks >= 1.0))
        throw DomainError("looks must be >= 1");
    if (workers < 1)
        throw DomainError("workers must be >= 1");
}

ExperimentConfig ExperimentConfig::defaults_for(ExperimentKind kind)
{
    ExperimentConfig cfg;
    cfg.kind = kind;
    switch (kind) {
    case ExperimentKind::McQuality:
        break;
    case ExperimentKind::Classification:
        cfg.replications = 20;
        cfg.size = 128;
        cfg.iterations = {1, 20};
        break;
    case ExperimentKind::Contrast:
        cfg.replications = 100;
        cfg.size = 256;
        break;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::full_scale() const
{
    ExperimentConfig cfg = *this;
    switch (kind) {
    case ExperimentKind::McQuality:
        cfg.replications = 1000;
        cfg.size = 128;
        break;
    case ExperimentKind::Classification:
        cfg.replications = 100;
        cfg.size = 128;
        cfg.iterations = {1, 20, 95};
        break;
    case ExperimentKind::Contrast:
        cfg.replications = 100;
        cfg.size = 256;
        cfg.alpha_pairs = {{-3.0, -12.0}, {-4.0, -8.0}, {-6.0, -3.0}};
        break;
    }
    return cfg;
}

void parallel_for(int count, int workers, const std::function<void(int)>& task)
{
    workers = std::clamp(workers, 1, std::max(1, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i)
            task(i);
        return;
    }
    std::mutex mutex;
    int next = 0;
    std::exception_ptr failure;
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard lock(mutex);
                    if (next >= count || failure)
                        return;
                    i = next++;
                }
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(mutex);
                    failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

namespace {

// One centered rectangle per half of a two-region phantom.
RoiSet two_region_rois(int width, int height)
{
    const int half = width / 2;
    const int rw = std::max(2, half / 2);
    const int rh = std::max(2, height / 2);
    const int y = (height - rh) / 2;
    RoiSet rois;
    rois.regions.push_back({"left", RectShape{(half - rw) / 2, y, rw, rh}, IdealPolicy::Mean, {}, {}});
    rois.regions.push_back(
        {"right", RectShape{half + (width - half - rw) / 2, y, rw, rh}, IdealPolicy::Mean, {}, {}});
    return rois;
}

// Background block right of the point grid plus the widest strip.
RoiSet strips_rois(int width, int height)
{
    const auto widest = strip_columns().back();
    RoiSet rois;
    rois.regions.push_back(
        {"background", RectShape{width - 24, 16, 16, height - 32}, IdealPolicy::Mean, {}, {}});
    rois.regions.push_back({"strips",
                            RectShape{widest.first, 16, widest.second - widest.first, height - 32},
                            IdealPolicy::Mean, {}, {}});
    return rois;
}

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string stack_label(const char* prefix, int k)
{
    return std::string(prefix) + " " + std::to_string(k);
}

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

// ---- mc-quality -------------------------------------------------------

McQualityResult run_mc_quality(const ExperimentConfig& cfg)
{
    cfg.validate();
    const int ratios = static_cast<int>(cfg.ratios.size());
    const int total = ratios * cfg.replications;
    std::vector<std::vector<McQualityRecord>> slots(static_cast<std::size_t>(total));
    const int k = cfg.iterations.front();

    parallel_for(total, cfg.workers, [&](int task) {
        const int ratio = cfg.ratios[task / cfg.replications];
        const int rep = task % cfg.replications;
        PhantomSpec spec;
        spec.kind = PhantomKind::TwoRegionVertical;
        spec.width = spec.height = cfg.size;
        spec.regions = {{-10.0, cfg.looks, 10.0}, {-10.0, cfg.looks, static_cast<double>(ratio)}};
        spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task));
        const Phantom phantom = make_phantom(spec);

        const auto noisy = quantize(phantom.noisy, {cfg.levels, cfg.clip_percentile, {}, {}});
        const auto ideal = to_float(quantize_like(phantom.ideal, noisy.spec));
        const auto rois = two_region_rois(cfg.size, cfg.size);
        const auto f = train_from_rois(noisy.image, rois, cfg.window);
        const auto stacked = to_float(apply_iterated(f, noisy.image, k));
        const auto lee = to_float(quantize_like(lee_filter(phantom.noisy, cfg.lee), noisy.spec));

        auto& out = slots[static_cast<std::size_t>(task)];
        out.push_back({rep, ratio, "stack", beta_index(ideal, stacked), q_index(ideal, stacked).value});
        out.push_back({rep, ratio, "lee", beta_index(ideal, lee), q_index(ideal, lee).value});
    });

    McQualityResult result;
    for (auto& s : slots)
        result.records.insert(result.records.end(), s.begin(), s.end());
    result.rows = summarize(result.records);
    return result;
}

std::vector<McQualityRow> summarize(const std::vector<McQualityRecord>& records)
{
    std::vector<std::pair<std::string, int>> order;
    std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& r : records) {
        const auto key = std::make_pair(r.filter, r.ratio);
        if (!groups.contains(key))
            order.push_back(key);
        groups[key].first.push_back(r.beta);
        groups[key].second.push_back(r.q);
    }
    std::vector<McQualityRow> rows;
    for (const auto& key : order) {
        const auto& [betas, qs] = groups[key];
        rows.push_back({key.first, key.second, mean_of(betas), sd_of(betas), mean_of(qs), sd_of(qs)});
    }
    return rows;
}

// ---- classification ---------------------------------------------------

ClassificationResult run_classification(const ExperimentConfig& cfg)
{
    cfg.validate();
    std::vector<std::vector<ClassificationRecord>> slots(
        static_cast<std::size_t>(cfg.replications));

    parallel_for(cfg.replications, cfg.workers, [&](int rep) {
        PhantomSpec spec;
        spec.kind = PhantomKind::TwoRegionVertical;
        spec.width = spec.height = cfg.size;
        spec.regions = {{-1.5, cfg.looks, 1.0}, {-10.0, cfg.looks, 10.0}};
        spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        const Phantom phantom = make_phantom(spec);
        const auto rois = two_region_rois(cfg.size, cfg.size);

        const auto noisy = quantize(phantom.noisy, {cfg.levels, cfg.clip_percentile, {}, {}});
        auto& out = slots[static_cast<std::size_t>(rep)];
        auto score = [&](const std::string& name, const FloatImage& img) {
            const auto classes = fit_classes(img, rois);
            const auto stats = confusion_stats(classify(img, classes), phantom.labels, 2);
            std::vector<double> acc;
            for (const auto& a : stats.accuracy)
                acc.push_back(a.value_or(0.0));
            out.push_back({rep, name, std::move(acc)});
        };

        score("None", to_float(noisy.image));
        score("Frost",
              to_float(quantize_like(frost_filter(phantom.noisy, cfg.frost), noisy.spec)));
        score("Lee", to_float(quantize_like(lee_filter(phantom.noisy, cfg.lee), noisy.spec)));

        const auto f = train_from_rois(noisy.image, rois, cfg.window);
        std::vector<int> ks = cfg.iterations;
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        QuantizedImage current = noisy.image;
        int done = 0;
        for (int k : ks) {
            current = apply_iterated(f, current, k - done);
            done = k;
            score(stack_label("Sample Stack", k), to_float(current));
        }
    });

    ClassificationResult result;
    for (auto& s : slots)
        result.records.insert(result.records.end(), s.begin(), s.end());
    result.rows = summarize(result.records);
    return result;
}

std::vector<ClassificationRow> summarize(const std::vector<ClassificationRecord>& records)
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::vector<double>>> groups;
    for (const auto& r : records) {
        if (!groups.contains(r.filter))
            order.push_back(r.filter);
        groups[r.filter].push_back(r.accuracy);
    }
    std::vector<ClassificationRow> rows;
    for (const auto& name : order) {
        const auto& runs = groups[name];
        std::vector<double> mean(runs.front().size(), 0.0);
        for (const auto& run : runs) {
            for (std::size_t c = 0; c < mean.size(); ++c)
                mean[c] += run[c];
        }
        for (auto& m : mean)
            m /= static_cast<double>(runs.size());
        rows.push_back({name, std::move(mean)});
    }
    return rows;
}

// ---- contrast ---------------------------------------------------------

double theoretical_contrast(double alpha1, double mean1, double alpha2, double mean2,
                            double looks)
{
    auto sigma = [looks](double alpha, double mean) {
        const auto p = g0_with_mean(alpha, looks, mean);
        const double m2 = g0_moment(2.0, p);
        if (!std::isfinite(m2))
            throw DomainError("alpha = " + std::to_string(alpha)
                              + " has no finite variance; use the empirical contrast mode");
        return std::sqrt(m2 - mean * mean);
    };
    return contrast(mean1, sigma(alpha1, mean1), mean2, sigma(alpha2, mean2));
}

ContrastResult run_contrast(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.contrast_mode == ContrastMode::Theoretical) {
        for (const auto& a : cfg.alpha_pairs)
            theoretical_contrast(a.strips, cfg.strip_mean, a.background, cfg.background_mean,
                                 cfg.looks);
    }
    const int pairs = static_cast<int>(cfg.alpha_pairs.size());
    const int total = pairs * cfg.replications;
    std::vector<std::vector<ContrastRecord>> slots(static_cast<std::size_t>(total));
    const int k = cfg.iterations.front();

    parallel_for(total, cfg.workers, [&](int task) {
        const AlphaPair alphas = cfg.alpha_pairs[task / cfg.replications];
        const int rep = task % cfg.replications;
        PhantomSpec spec;
        spec.kind = PhantomKind::StripsAndPoints;
        spec.width = spec.height = cfg.size;
        spec.regions = {{alphas.background, cfg.looks, cfg.background_mean},
                        {alphas.strips, cfg.looks, cfg.strip_mean}};
        spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(task));
        const Phantom phantom = make_phantom(spec);

        auto& out = slots[static_cast<std::size_t>(task)];
        auto measure = [&](const std::string& name, const FloatImage& img) {
            const auto strips = label_moments(img, phantom.labels, 1);
            const auto background = label_moments(img, phantom.labels, 0);
            out.push_back({rep, alphas, name,
                           contrast(strips.mean, strips.stddev, background.mean, background.stddev)});
        };

        const auto noisy = quantize(phantom.noisy, {cfg.levels, cfg.clip_percentile, {}, {}});
        const auto rois = strips_rois(cfg.size, cfg.size);
        const auto f = train_from_rois(noisy.image, rois, cfg.window);

        measure("None", phantom.noisy);
        measure("Stack", dequantize(apply_iterated(f, noisy.image, k), noisy.spec));
        measure("Lee", dequantize(quantize_like(lee_filter(phantom.noisy, cfg.lee), noisy.spec),
                                  noisy.spec));
        measure("Frost",
                dequantize(quantize_like(frost_filter(phantom.noisy, cfg.frost), noisy.spec),
                           noisy.spec));
    });

    ContrastResult result;
    for (auto& s : slots)
        result.records.insert(result.records.end(), s.begin(), s.end());
    result.rows = summarize(result.records, cfg.contrast_mode, cfg.strip_mean,
                            cfg.background_mean, cfg.looks);
    return result;
}

std::vector<ContrastRow> summarize(const std::vector<ContrastRecord>& records, ContrastMode mode,
                                   double strip_mean, double background_mean, double looks)
{
    std::vector<std::pair<double, double>> order;
    std::map<std::pair<double, double>, std::vector<std::string>> filter_order;
    std::map<std::pair<double, double>, std::map<std::string, std::vector<double>>> groups;
    for (const auto& r : records) {
        const auto key = std::make_pair(r.alphas.strips, r.alphas.background);
        if (!groups.contains(key))
            order.push_back(key);
        auto& byfilter = groups[key];
        if (!byfilter.contains(r.filter))
            filter_order[key].push_back(r.filter);
        byfilter[r.filter].push_back(r.contrast);
    }
    std::vector<ContrastRow> rows;
    for (const auto& key : order) {
        ContrastRow row;
        row.alphas = {key.first, key.second};
        auto& byfilter = groups[key];
        row.reference = mode == ContrastMode::Theoretical
                            ? theoretical_contrast(key.first, strip_mean, key.second,
                                                   background_mean, looks)
                            : mean_of(byfilter["None"]);
        for (const auto& name : filter_order[key]) {
            const double observed = mean_of(byfilter[name]);
            row.filters.push_back(name);
            row.observed.push_back(observed);
            row.relative_error.push_back(relative_contrast_error(row.reference, observed));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- reports ----------------------------------------------------------

std::string format_accuracy_row(const std::string& filter, const std::vector<double>& accuracy)
{
    std::string line = filter;
    for (double a : accuracy)
        line += " " + fixed(a, 2);
    return line;
}

std::string to_markdown(const McQualityResult& result)
{
    std::map<int, std::map<std::string, const McQualityRow*>> byratio;
    for (const auto& row : result.rows)
        byratio[row.ratio][row.filter] = &row;
    std::ostringstream out;
    out << "| contrast | stack beta | s_beta | lee beta | s_beta |\n"
        << "|---|---:|---:|---:|---:|\n";
    for (const auto& [ratio, rows] : byratio) {
        const auto* s = rows.at("stack");
        const auto* l = rows.at("lee");
        out << "| 10:" << ratio << " | " << fixed(s->beta_mean, 4) << " | " << fixed(s->beta_sd, 4)
            << " | " << fixed(l->beta_mean, 4) << " | " << fixed(l->beta_sd, 4) << " |\n";
    }
    out << "\n| contrast | stack Q | s_Q | lee Q | s_Q |\n|---|---:|---:|---:|---:|\n";
    for (const auto& [ratio, rows] : byratio) {
        const auto* s = rows.at("stack");
        const auto* l = rows.at("lee");
        out << "| 10:" << ratio << " | " << fixed(s->q_mean, 4) << " | " << fixed(s->q_sd, 4)
            << " | " << fixed(l->q_mean, 4) << " | " << fixed(l->q_sd, 4) << " |\n";
    }
    return out.str();
}

std::string to_csv(const McQualityResult& result)
{
    std::ostringstream out;
    out << "replication,ratio,filter,beta,q\n";
    out.precision(17);
    for (const auto& r : result.records)
        out << r.replication << ",10:" << r.ratio << ',' << r.filter << ',' << r.beta << ','
            << r.q << '\n';
    return out.str();
}

std::string to_json(const McQualityResult& result)
{
    json rows = json::array();
    for (const auto& r : result.rows)
        rows.push_back({{"filter", r.filter},
                        {"ratio", "10:" + std::to_string(r.ratio)},
                        {"beta_mean", r.beta_mean},
                        {"beta_sd", r.beta_sd},
                        {"q_mean", r.q_mean},
                        {"q_sd", r.q_sd}});
    return json{{"experiment", "mc-quality"}, {"rows", rows}}.dump(2);
}

std::string to_markdown(const ClassificationResult& result)
{
    std::ostringstream out;
    std::size_t classes = result.rows.empty() ? 0 : result.rows.front().accuracy.size();
    out << "| Filter |";
    for (std::size_t c = 1; c <= classes; ++c)
        out << " R" << c << "/R" << c << " |";
    out << "\n|---|";
    for (std::size_t c = 0; c < classes; ++c)
        out << "---:|";
    out << '\n';
    for (const auto& row : result.rows) {
        out << "| " << row.filter << " |";
        for (double a : row.accuracy)
            out << ' ' << fixed(a, 2) << " |";
        out << '\n';
    }
    return out.str();
}

std::string to_csv(const ClassificationResult& result)
{
    std::ostringstream out;
    out << "replication,filter,class,accuracy\n";
    out.precision(17);
    for (const auto& r : result.records) {
        for (std::size_t c = 0; c < r.accuracy.size(); ++c)
            out << r.replication << ',' << r.filter << ',' << c + 1 << ',' << r.accuracy[c] << '\n';
    }
    return out.str();
}

std::string to_json(const ClassificationResult& result)
{
    json rows = json::array();
    for (const auto& r : result.rows)
        rows.push_back({{"filter", r.filter}, {"accuracy", r.accuracy}});
    return json{{"experiment", "classification"}, {"rows", rows}}.dump(2);
}

std::string to_markdown(const ContrastResult& result)
{
    std::ostringstream out;
    for (const auto& row : result.rows) {
        out << "| alpha1,alpha2 | Contrast |";
        for (const auto& f : row.filters)
            out << ' ' << f << " |";
        out << "\n|---|---:|";
        for (std::size_t i = 0; i < row.filters.size(); ++i)
            out << "---:|";
        out << "\n| " << fixed(row.alphas.strips, 0) << "," << fixed(row.alphas.background, 0)
            << " | " << fixed(row.reference, 4) << " |";
        for (double e : row.relative_error)
            out << ' ' << fixed(e, 4) << " |";
        out << "\n\n";
    }
    return out.str();
}

std::string to_csv(const ContrastResult& result)
{
    std::ostringstream out;
    out << "replication,alpha_strips,alpha_background,filter,contrast\n";
    out.precision(17);
    for (const auto& r : result.records)
        out << r.replication << ',' << r.alphas.strips << ',' << r.alphas.background << ','
            << r.filter << ',' << r.contrast << '\n';
    return out.str();
}

std::string to_json(const ContrastResult& result)
{
    json rows = json::array();
    for (const auto& r : result.rows)
        rows.push_back({{"alpha_strips", r.alphas.strips},
                        {"alpha_background", r.alphas.background},
                        {"reference_contrast", r.reference},
                        {"filters", r.filters},
                        {"observed_contrast", r.observed},
                        {"relative_error", r.relative_error}});
    return json{{"experiment", "contrast"}, {"rows", rows}}.dump(2);
}

}  // namespace speckstack
