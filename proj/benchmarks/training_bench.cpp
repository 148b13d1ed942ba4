#include <benchmark/benchmark.h>

#include "speckstack/phantom.hpp"
#include "speckstack/quantize.hpp"
#include "speckstack/training.hpp"

namespace {

using namespace speckstack;

Quantized phantom(int size)
{
    PhantomSpec spec;
    spec.width = spec.height = size;
    spec.regions = {{-1.5, 1.0, 1.0}, {-10.0, 1.0, 10.0}};
    spec.seed = 11;
    return quantize(make_phantom(spec).noisy, {});
}

RoiSet halves(int size)
{
    RoiSet rois;
    rois.regions.push_back({"left", RectShape{0, 0, size / 2, size}, IdealPolicy::Mean, {}, {}});
    rois.regions.push_back(
        {"right", RectShape{size / 2, 0, size / 2, size}, IdealPolicy::Mean, {}, {}});
    return rois;
}

void BM_AccumulateStats(benchmark::State& state)
{
    const auto img = phantom(128).image;
    const auto samples = roi_training_samples(img, halves(128));
    for (auto _ : state)
        benchmark::DoNotOptimize(accumulate_stats(img, samples, WindowShape(3, 3)));
}
BENCHMARK(BM_AccumulateStats)->Unit(benchmark::kMillisecond);

void BM_FitMonotone(benchmark::State& state)
{
    const auto img = phantom(128).image;
    const auto stats =
        accumulate_stats(img, roi_training_samples(img, halves(128)), WindowShape(3, 3));
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_monotone(stats));
}
BENCHMARK(BM_FitMonotone)->Unit(benchmark::kMillisecond);

void BM_TrainFromRois(benchmark::State& state)
{
    const auto img = phantom(128).image;
    const auto rois = halves(128);
    for (auto _ : state)
        benchmark::DoNotOptimize(train_from_rois(img, rois, WindowShape(3, 3)));
}
BENCHMARK(BM_TrainFromRois)->Unit(benchmark::kMillisecond);

}  // namespace
