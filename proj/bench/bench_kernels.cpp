// Serial reference against the OpenMP batch kernel: one batch of ensemble
// samples (sample, reduce, diagonalize, measure) per iteration.
#include <benchmark/benchmark.h>

#include <thread>

#include "entgrowth/kernels.hpp"

using namespace entgrowth;

namespace {

constexpr std::int64_t kBatch = 128;

Sampler sampler_for(int n) { return profile_sampler(build_profile(Protocol::EB, ProtocolParams::eb(1.0), n, 0, 1)); }

void BM_MeasureBatchSerial(benchmark::State& state) {
    const auto sampler = sampler_for(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(measure_batch_serial(sampler, kBatch, {1, 0}));
    state.SetItemsProcessed(state.iterations() * kBatch);
}

void BM_MeasureBatchParallel(benchmark::State& state) {
    const auto sampler = sampler_for(static_cast<int>(state.range(0)));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(measure_batch_parallel(sampler, kBatch, {1, 0}, workers));
    state.SetItemsProcessed(state.iterations() * kBatch);
}

void BM_RawSpectraSerial(benchmark::State& state) {
    const auto sampler = stationary_sampler(static_cast<int>(state.range(0)), 0, 2, 0.25);
    for (auto _ : state) benchmark::DoNotOptimize(raw_spectra_serial(sampler, kBatch, {2, 0}));
    state.SetItemsProcessed(state.iterations() * kBatch);
}

void BM_RawSpectraParallel(benchmark::State& state) {
    const auto sampler = stationary_sampler(static_cast<int>(state.range(0)), 0, 2, 0.25);
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(raw_spectra_parallel(sampler, kBatch, {2, 0}, workers));
    state.SetItemsProcessed(state.iterations() * kBatch);
}

void worker_args(benchmark::internal::Benchmark* b) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    for (int n : {16, 64, 128})
        for (int w = 1; w <= hw; w *= 2) b->Args({n, w});
}

}  // namespace

BENCHMARK(BM_MeasureBatchSerial)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureBatchParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RawSpectraSerial)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RawSpectraParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
