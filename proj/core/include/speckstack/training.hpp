#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "speckstack/image.hpp"
#include "speckstack/roi.hpp"
#include "speckstack/stack_filter.hpp"

namespace speckstack {

struct PatternCounts {
    std::uint64_t desired_one = 0;   // N1
    std::uint64_t desired_zero = 0;  // N0

    friend bool operator==(const PatternCounts&, const PatternCounts&) = default;
};

/// Per-pattern threshold-event counts; the sufficient statistics for the
/// mean absolute error of any stack filter on the training set. Patterns
/// never observed are absent (both counts zero).
class PatternStats {
  public:
    PatternStats() = default;
    explicit PatternStats(WindowShape window) : window_(window) {}

    const WindowShape& window() const noexcept { return window_; }
    const std::map<Pattern, PatternCounts>& counts() const noexcept { return counts_; }

    void add(Pattern p, std::uint64_t desired_one, std::uint64_t desired_zero);
    void merge(const PatternStats& other);
    PatternCounts at(Pattern p) const;

    /// Sum of N1 + N0 over all patterns.
    std::uint64_t total_events() const;

    /// Binary error count of f: N1 where f = 0 plus N0 where f = 1. Equals
    /// the summed absolute gray-level error of the stack filter over the
    /// training pixels.
    std::uint64_t cost(const PositiveBooleanFunction& f) const;

    /// "PSTATS n" then "<pattern> <N1> <N0>" per observed pattern.
    std::string dump() const;
    static PatternStats parse_dump(const std::string& text, WindowShape window);

    friend bool operator==(const PatternStats&, const PatternStats&) = default;

  private:
    WindowShape window_;
    std::map<Pattern, PatternCounts> counts_;
};

/// One supervised pixel: location in the observed image and its ideal level.
struct TrainingSample {
    int x = 0;
    int y = 0;
    int ideal = 0;
};

/// For every sample and every m in 1..levels, counts the thresholded
/// observed window against T^m(ideal). Runs of m over which neither the
/// window pattern nor the desired bit changes are counted in one step.
/// Samples may be sharded over `workers` threads; the result does not
/// depend on the worker count.
PatternStats accumulate_stats(const QuantizedImage& observed,
                              std::span<const TrainingSample> samples, WindowShape window,
                              int workers = 1);

/// Every pixel supervised by the same-position pixel of `ideal`.
PatternStats accumulate_stats(const QuantizedImage& observed, const QuantizedImage& ideal,
                              WindowShape window, int workers = 1);

enum class FitMethod {
    /// Full lattice up to 16 inputs, observed support above that.
    Automatic,
    /// One node per pattern of the Boolean lattice, covering-pair edges.
    FullLattice,
    /// Nodes only for patterns with nonzero net evidence, edges for every
    /// comparable (wants-1, wants-0) pair. Same canonical answer.
    ObservedSupport,
};

struct MonotoneFit {
    PositiveBooleanFunction function;
    std::uint64_t cost = 0;
    std::uint64_t max_flow = 0;
};

/// Exact minimum-cost monotone fit via minimum s-t cut. Among optimal
/// functions returns the one with the fewest true patterns (residual
/// reachability from the source), so unobserved patterns map to 0 unless
/// monotonicity forces 1.
MonotoneFit fit_monotone_detailed(const PatternStats& stats,
                                  FitMethod method = FitMethod::Automatic);

PositiveBooleanFunction fit_monotone(const PatternStats& stats,
                                     FitMethod method = FitMethod::Automatic);

/// Samples for every ROI pixel, with ideal levels resolved on `observed`.
std::vector<TrainingSample> roi_training_samples(const QuantizedImage& observed,
                                                 const RoiSet& rois);

PositiveBooleanFunction train_from_rois(const QuantizedImage& observed, const RoiSet& rois,
                                        WindowShape window, int workers = 1);

PositiveBooleanFunction train_full_images(const QuantizedImage& observed,
                                          const QuantizedImage& ideal, WindowShape window,
                                          int workers = 1);

}  // namespace speckstack
