#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <vector>

#include "entgrowth/ensembles.hpp"
#include "entgrowth/measures.hpp"
#include "entgrowth/rng.hpp"

namespace entgrowth {

// Sample i of a batch always draws from make_stream(seed, major, i).
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t major = 0;
};

using Sampler = std::function<CMatrix(Rng&)>;

// Runs fn(i) for i in [0, n) on `workers` OpenMP threads. The results land in
// slot i, so the output never depends on scheduling. If any call throws, the
// exception from the lowest failing index is rethrown after the loop.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::int64_t n, int workers, Fn&& fn) {
    std::vector<T> out(static_cast<std::size_t>(n));
    std::int64_t first_bad = std::numeric_limits<std::int64_t>::max();
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(workers > 0 ? workers : 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
#pragma omp critical(entgrowth_parallel_map)
            if (i < first_bad) {
                first_bad = i;
                error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

template <typename T, typename Fn>
std::vector<T> serial_map(std::int64_t n, Fn&& fn) {
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
}

// Sample -> reduce -> spectrum -> measures for one sample index.
MeasureSet measure_one(const Sampler& sampler, StreamKey key, std::int64_t index);

// Reference implementation, single thread, kept for testing the parallel one.
std::vector<MeasureSet> measure_batch_serial(const Sampler& sampler, std::int64_t n, StreamKey key);
std::vector<MeasureSet> measure_batch_parallel(const Sampler& sampler, std::int64_t n, StreamKey key, int workers);

// Descending eigenvalues of the unnormalized Gram matrix C C^dagger.
std::vector<double> raw_spectrum_one(const Sampler& sampler, StreamKey key, std::int64_t index);
std::vector<std::vector<double>> raw_spectra_serial(const Sampler& sampler, std::int64_t n, StreamKey key);
std::vector<std::vector<double>> raw_spectra_parallel(const Sampler& sampler, std::int64_t n, StreamKey key,
                                                      int workers);

Sampler profile_sampler(const VarianceProfile& profile);
Sampler stationary_sampler(int n, int nu0, int beta, double gamma);

}  // namespace entgrowth
