#include "speckstack/training.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <thread>

#include "speckstack/maxflow.hpp"

namespace speckstack {

void PatternStats::add(Pattern p, std::uint64_t desired_one, std::uint64_t desired_zero)
{
    if ((p & ~window_.full_mask()) != 0)
        throw DomainError("pattern has bits outside the window");
    if (desired_one == 0 && desired_zero == 0)
        return;
    auto& c = counts_[p];
    c.desired_one += desired_one;
    c.desired_zero += desired_zero;
}

void PatternStats::merge(const PatternStats& other)
{
    if (!(other.window_ == window_))
        throw DomainError("cannot merge statistics of different windows");
    for (const auto& [p, c] : other.counts_)
        add(p, c.desired_one, c.desired_zero);
}

PatternCounts PatternStats::at(Pattern p) const
{
    const auto it = counts_.find(p);
    return it == counts_.end() ? PatternCounts{} : it->second;
}

std::uint64_t PatternStats::total_events() const
{
    std::uint64_t total = 0;
    for (const auto& [p, c] : counts_)
        total += c.desired_one + c.desired_zero;
    return total;
}

std::uint64_t PatternStats::cost(const PositiveBooleanFunction& f) const
{
    std::uint64_t total = 0;
    for (const auto& [p, c] : counts_)
        total += f(p) ? c.desired_zero : c.desired_one;
    return total;
}

std::string PatternStats::dump() const
{
    std::ostringstream out;
    out << "PSTATS " << window_.inputs() << '\n';
    for (const auto& [p, c] : counts_)
        out << pattern_string(p, window_.inputs()) << ' ' << c.desired_one << ' '
            << c.desired_zero << '\n';
    return out.str();
}

PatternStats PatternStats::parse_dump(const std::string& text, WindowShape window)
{
    std::istringstream in(text);
    std::string magic;
    int n = 0;
    if (!(in >> magic >> n) || magic != "PSTATS" || n != window.inputs())
        throw ParseError("missing or mismatched 'PSTATS n' header");
    PatternStats stats(window);
    std::string bits;
    std::uint64_t n1 = 0;
    std::uint64_t n0 = 0;
    while (in >> bits) {
        if (!(in >> n1 >> n0) || bits.size() != static_cast<std::size_t>(n))
            throw ParseError("malformed PSTATS line for pattern '" + bits + "'");
        stats.add(parse_pattern(bits), n1, n0);
    }
    return stats;
}

namespace {

void accumulate_range(const QuantizedImage& observed, std::span<const TrainingSample> samples,
                      const WindowShape& window, PatternStats& stats)
{
    const int n = window.inputs();
    const int levels = observed.levels();
    std::array<int, WindowShape::kMaxInputs> values{};
    std::array<int, WindowShape::kMaxInputs + 2> cuts{};
    for (const auto& s : samples) {
        for (int i = 0; i < n; ++i)
            values[i] = observed.clamped(s.x + window.dx(i), s.y + window.dy(i));
        // The pattern and the desired bit are constant for m in [cut_k, cut_{k+1}):
        // input i switches off at m = values[i] + 1, the desired bit at ideal + 1.
        int count = 0;
        cuts[count++] = 1;
        for (int i = 0; i < n; ++i)
            cuts[count++] = values[i] + 1;
        cuts[count++] = s.ideal + 1;
        std::sort(cuts.begin(), cuts.begin() + count);
        int start = 1;
        for (int k = 0; k <= count; ++k) {
            const int end = k < count ? std::min(cuts[k], levels + 1) : levels + 1;
            if (end <= start)
                continue;
            Pattern p = 0;
            for (int i = 0; i < n; ++i) {
                if (values[i] >= start)
                    p |= Pattern{1} << i;
            }
            const auto run = static_cast<std::uint64_t>(end - start);
            if (s.ideal >= start)
                stats.add(p, run, 0);
            else
                stats.add(p, 0, run);
            start = end;
        }
    }
}

}  // namespace

PatternStats accumulate_stats(const QuantizedImage& observed,
                              std::span<const TrainingSample> samples, WindowShape window,
                              int workers)
{
    for (const auto& s : samples) {
        if (s.x < 0 || s.y < 0 || s.x >= observed.width() || s.y >= observed.height())
            throw DomainError("training pixel outside the observed image");
        if (s.ideal < 0 || s.ideal > observed.levels())
            throw DomainError("ideal gray level outside {0..levels}");
    }
    workers = std::clamp<int>(workers, 1, std::max<int>(1, static_cast<int>(samples.size())));
    std::vector<PatternStats> shards(static_cast<std::size_t>(workers), PatternStats(window));
    if (workers == 1) {
        accumulate_range(observed, samples, window, shards[0]);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            const std::size_t b = samples.size() * w / workers;
            const std::size_t e = samples.size() * (w + 1) / workers;
            pool.emplace_back([&, w, b, e] {
                accumulate_range(observed, samples.subspan(b, e - b), window, shards[w]);
            });
        }
    }
    PatternStats stats(window);
    for (const auto& shard : shards)
        stats.merge(shard);
    return stats;
}

PatternStats accumulate_stats(const QuantizedImage& observed, const QuantizedImage& ideal,
                              WindowShape window, int workers)
{
    if (!observed.same_shape(ideal))
        throw DomainError("observed and ideal images differ in size");
    if (observed.levels() != ideal.levels())
        throw DomainError("observed and ideal images differ in levels");
    std::vector<TrainingSample> samples;
    samples.reserve(observed.size());
    for (int y = 0; y < observed.height(); ++y) {
        for (int x = 0; x < observed.width(); ++x)
            samples.push_back({x, y, ideal(x, y)});
    }
    return accumulate_stats(observed, samples, window, workers);
}

namespace {

constexpr int kFullLatticeMaxInputs = 16;

MonotoneFit fit_full_lattice(const PatternStats& stats)
{
    const auto& window = stats.window();
    const int n = window.inputs();
    const int patterns = 1 << n;
    const int source = patterns;
    const int sink = patterns + 1;
    MaxFlow flow(patterns + 2);
    for (const auto& [p, c] : stats.counts()) {
        if (c.desired_one > 0)
            flow.add_edge(source, static_cast<int>(p), static_cast<MaxFlow::Capacity>(c.desired_one));
        if (c.desired_zero > 0)
            flow.add_edge(static_cast<int>(p), sink, static_cast<MaxFlow::Capacity>(c.desired_zero));
    }
    for (int p = 0; p < patterns; ++p) {
        for (int i = 0; i < n; ++i) {
            if (!(p & (1 << i)))
                flow.add_edge(p, p | (1 << i), MaxFlow::kInfinite);
        }
    }
    const auto value = flow.solve(source, sink);
    const auto side = flow.source_side(source);
    std::vector<std::uint8_t> table(static_cast<std::size_t>(patterns));
    for (int p = 0; p < patterns; ++p)
        table[p] = side[p] ? 1 : 0;
    MonotoneFit fit{PositiveBooleanFunction::from_truth_table(window, table), 0,
                    static_cast<std::uint64_t>(value)};
    fit.cost = stats.cost(fit.function);
    return fit;
}

MonotoneFit fit_observed_support(const PatternStats& stats)
{
    // Only the net evidence of a pattern matters for which side it lands on;
    // min(N1, N0) is paid whatever f is.
    std::vector<std::pair<Pattern, MaxFlow::Capacity>> wants_one;
    std::vector<std::pair<Pattern, MaxFlow::Capacity>> wants_zero;
    std::uint64_t baseline = 0;
    for (const auto& [p, c] : stats.counts()) {
        const auto n1 = static_cast<MaxFlow::Capacity>(c.desired_one);
        const auto n0 = static_cast<MaxFlow::Capacity>(c.desired_zero);
        baseline += std::min(c.desired_one, c.desired_zero);
        if (n1 > n0)
            wants_one.emplace_back(p, n1 - n0);
        else if (n0 > n1)
            wants_zero.emplace_back(p, n0 - n1);
    }
    const int ones = static_cast<int>(wants_one.size());
    const int zeros = static_cast<int>(wants_zero.size());
    const int source = ones + zeros;
    const int sink = source + 1;
    MaxFlow flow(ones + zeros + 2);
    for (int i = 0; i < ones; ++i)
        flow.add_edge(source, i, wants_one[i].second);
    for (int j = 0; j < zeros; ++j)
        flow.add_edge(ones + j, sink, wants_zero[j].second);
    for (int i = 0; i < ones; ++i) {
        for (int j = 0; j < zeros; ++j) {
            if ((wants_one[i].first & ~wants_zero[j].first) == 0)
                flow.add_edge(i, ones + j, MaxFlow::kInfinite);
        }
    }
    const auto value = flow.solve(source, sink);
    const auto side = flow.source_side(source);
    std::vector<Pattern> terms;
    for (int i = 0; i < ones; ++i) {
        if (side[i])
            terms.push_back(wants_one[i].first);
    }
    MonotoneFit fit{PositiveBooleanFunction(stats.window(), std::move(terms)), 0,
                    baseline + static_cast<std::uint64_t>(value)};
    fit.cost = stats.cost(fit.function);
    return fit;
}

}  // namespace

MonotoneFit fit_monotone_detailed(const PatternStats& stats, FitMethod method)
{
    if (method == FitMethod::Automatic)
        method = stats.window().inputs() <= kFullLatticeMaxInputs ? FitMethod::FullLattice
                                                                  : FitMethod::ObservedSupport;
    if (method == FitMethod::FullLattice) {
        if (stats.window().inputs() > kFullLatticeMaxInputs)
            throw DomainError("full-lattice fit supports at most 16 inputs");
        return fit_full_lattice(stats);
    }
    return fit_observed_support(stats);
}

PositiveBooleanFunction fit_monotone(const PatternStats& stats, FitMethod method)
{
    return fit_monotone_detailed(stats, method).function;
}

std::vector<TrainingSample> roi_training_samples(const QuantizedImage& observed,
                                                 const RoiSet& rois)
{
    if (rois.regions.empty())
        throw DomainError("ROI set is empty");
    const RoiSet resolved = resolve_ideals(observed, rois);
    std::vector<TrainingSample> samples;
    for (const auto& region : resolved.regions) {
        for (auto [x, y] : region_pixels(region, observed.width(), observed.height()))
            samples.push_back({x, y, *region.ideal});
    }
    return samples;
}

PositiveBooleanFunction train_from_rois(const QuantizedImage& observed, const RoiSet& rois,
                                        WindowShape window, int workers)
{
    const auto samples = roi_training_samples(observed, rois);
    return fit_monotone(accumulate_stats(observed, samples, window, workers));
}

PositiveBooleanFunction train_full_images(const QuantizedImage& observed,
                                          const QuantizedImage& ideal, WindowShape window,
                                          int workers)
{
    return fit_monotone(accumulate_stats(observed, ideal, window, workers));
}

}  // namespace speckstack
