#include <benchmark/benchmark.h>

#include "reefseg/random.hpp"
#include "reefseg/refine.hpp"

using namespace reefseg;

namespace {

// Blocky label map with salt noise, so there are many small components to merge.
LabelMap speckled(std::uint32_t size, std::uint64_t seed = 3) {
    SplitMix64 rng(seed);
    LabelMap lm(size, size, 0);
    for (std::uint32_t y = 0; y < size; ++y) {
        for (std::uint32_t x = 0; x < size; ++x) {
            lm(x, y) = rng.uniform() < 0.1 ? static_cast<int>(rng.below(6)) : static_cast<int>((x / 32 + y / 32) % 6);
        }
    }
    return lm;
}

void BM_ConnectedComponents(benchmark::State& state) {
    const auto lm = speckled(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(connected_components(lm, Connectivity::Eight).components.size());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lm.size()));
}
BENCHMARK(BM_ConnectedComponents)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_MergeSmallComponents(benchmark::State& state) {
    const auto lm = speckled(static_cast<std::uint32_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(merge_small_components(lm, 50, Connectivity::Eight).labels.data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lm.size()));
}
BENCHMARK(BM_MergeSmallComponents)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
