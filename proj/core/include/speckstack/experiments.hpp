#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "speckstack/classic_filters.hpp"
#include "speckstack/stack_filter.hpp"

namespace speckstack {

enum class ExperimentKind { McQuality, Classification, Contrast };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

enum class ContrastMode {
    /// Reference contrast from the G0 moments of each region.
    Theoretical,
    /// Reference contrast measured on the unfiltered noisy phantom.
    Empirical,
};

struct AlphaPair {
    double strips = -3.0;
    double background = -12.0;
};

/// Every field has a desk-scale default; full_scale() switches to the
/// large replication counts and sizes.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::McQuality;
    int replications = 50;
    int size = 64;
    /// mc-quality contrast ratios 10:c, c in {1, 2, 4, 8}.
    std::vector<int> ratios{1, 2, 4, 8};
    WindowShape window{3, 3};
    /// Stack iteration counts; mc-quality and contrast use the first entry.
    std::vector<int> iterations{1};
    SpeckleFilterParams lee{7, 1.0, 1.0};
    SpeckleFilterParams frost{7, 1.0, 1.0};
    int levels = 255;
    double clip_percentile = 99.0;
    double looks = 1.0;
    std::uint64_t seed = 20240601;
    int workers = 1;

    // contrast experiment
    std::vector<AlphaPair> alpha_pairs{{-3.0, -12.0}};
    double strip_mean = 3.0;
    double background_mean = 1.0;
    ContrastMode contrast_mode = ContrastMode::Theoretical;

    /// Throws DomainError on an invalid configuration.
    void validate() const;

    static ExperimentConfig defaults_for(ExperimentKind kind);
    ExperimentConfig full_scale() const;
};

// ---- mc-quality -------------------------------------------------------

struct McQualityRecord {
    int replication = 0;
    int ratio = 0;
    std::string filter;
    double beta = 0.0;
    double q = 0.0;
};

struct McQualityRow {
    std::string filter;
    int ratio = 0;
    double beta_mean = 0.0;
    double beta_sd = 0.0;
    double q_mean = 0.0;
    double q_sd = 0.0;
};

struct McQualityResult {
    std::vector<McQualityRecord> records;
    std::vector<McQualityRow> rows;
};

/// Per replication: two-region 1-look phantom (alpha = -10, means 10 and c),
/// stack filter trained on one centered ROI per half (mean policy), Lee
/// baseline; beta and Q of each output against the ideal image.
McQualityResult run_mc_quality(const ExperimentConfig& cfg);

/// Mean and sample standard deviation per (filter, ratio), in the order
/// the pairs first appear in `records`.
std::vector<McQualityRow> summarize(const std::vector<McQualityRecord>& records);

// ---- classification ---------------------------------------------------

struct ClassificationRecord {
    int replication = 0;
    std::string filter;
    std::vector<double> accuracy;  // per class, percent
};

struct ClassificationRow {
    std::string filter;
    std::vector<double> accuracy;  // mean over replications
};

struct ClassificationResult {
    std::vector<ClassificationRecord> records;
    std::vector<ClassificationRow> rows;
};

/// Per replication: two-region phantom with a heterogeneous left half
/// (alpha = -1.5, mean 1) and a homogeneous right half (alpha = -10,
/// mean 10); GMLC trained on the ROIs of each filtered image; accuracy
/// against the phantom labels. Rows: None, Frost, Lee, Sample Stack k.
ClassificationResult run_classification(const ExperimentConfig& cfg);

std::vector<ClassificationRow> summarize(const std::vector<ClassificationRecord>& records);

// ---- contrast ---------------------------------------------------------

struct ContrastRecord {
    int replication = 0;
    AlphaPair alphas;
    std::string filter;
    double contrast = 0.0;
};

struct ContrastRow {
    AlphaPair alphas;
    double reference = 0.0;
    std::vector<std::string> filters;
    std::vector<double> observed;        // mean over replications
    std::vector<double> relative_error;  // of the mean observed contrast
};

struct ContrastResult {
    std::vector<ContrastRecord> records;
    std::vector<ContrastRow> rows;
};

/// Contrast between light strips/points and background of the strips
/// phantom, before and after Stack, Lee and Frost filtering.
ContrastResult run_contrast(const ExperimentConfig& cfg);

/// Contrast implied by the G0 moments of two regions with the given means.
/// Throws DomainError when either second moment is infinite.
double theoretical_contrast(double alpha1, double mean1, double alpha2, double mean2,
                            double looks);

std::vector<ContrastRow> summarize(const std::vector<ContrastRecord>& records,
                                   ContrastMode mode, double strip_mean,
                                   double background_mean, double looks);

// ---- reports ----------------------------------------------------------

std::string to_markdown(const McQualityResult& result);
std::string to_csv(const McQualityResult& result);
std::string to_json(const McQualityResult& result);

std::string to_markdown(const ClassificationResult& result);
std::string to_csv(const ClassificationResult& result);
std::string to_json(const ClassificationResult& result);

std::string to_markdown(const ContrastResult& result);
std::string to_csv(const ContrastResult& result);
std::string to_json(const ContrastResult& result);

/// Plain-text confusion row: "<filter> <p1> <p2> ..." with two decimals.
std::string format_accuracy_row(const std::string& filter, const std::vector<double>& accuracy);

/// Runs `task(i)` for i in [0, count) over `workers` threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

}  // namespace speckstack
