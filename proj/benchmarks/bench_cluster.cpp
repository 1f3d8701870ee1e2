#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "reefseg/cluster/agnes.hpp"
#include "reefseg/cluster/dbscan.hpp"
#include "reefseg/cluster/gmm.hpp"
#include "reefseg/cluster/grid_index.hpp"
#include "reefseg/cluster/kmeans.hpp"
#include "reefseg/parallel.hpp"

using namespace reefseg;

namespace {

void BM_KMeans(benchmark::State& state) {
    set_worker_threads(0);
    const auto m = bench::clustered(static_cast<std::size_t>(state.range(0)), 3);
    KMeansConfig cfg;
    cfg.restarts = 4;
    for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit(m, 5, cfg).model.wcss);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KMeans)->Arg(4096)->Arg(16384)->Arg(65536)->Unit(benchmark::kMillisecond);

void BM_Gmm(benchmark::State& state) {
    set_worker_threads(0);
    const auto m = bench::clustered(static_cast<std::size_t>(state.range(0)), 4);
    GmmConfig cfg;
    cfg.init_restarts = 2;
    for (auto _ : state) benchmark::DoNotOptimize(gmm_fit(m, 4, cfg).model.log_likelihood);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gmm)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Agnes(benchmark::State& state) {
    const auto m = bench::clustered(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(agnes_fit(m, 4).labels.data());
}
BENCHMARK(BM_Agnes)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void BM_Dbscan(benchmark::State& state) {
    set_worker_threads(0);
    const auto m = bench::clustered(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(dbscan_fit(m, 0.02, 6).cluster_count);
}
BENCHMARK(BM_Dbscan)->Arg(4096)->Arg(16384)->Arg(65536)->Unit(benchmark::kMillisecond);

void BM_GridIndexQuery(benchmark::State& state) {
    const auto m = bench::clustered(65536, static_cast<std::size_t>(state.range(0)));
    const GridIndex index(m, 0.02);
    std::vector<std::size_t> out;
    std::size_t i = 0;
    for (auto _ : state) {
        index.query(m.row(i), 0.02, out);
        benchmark::DoNotOptimize(out.data());
        i = (i + 7919) % m.n;
    }
}
BENCHMARK(BM_GridIndexQuery)->DenseRange(1, 4);

}  // namespace
