#include "entgrowth/kernels.hpp"

#include <memory>

#include "entgrowth/schmidt.hpp"

namespace entgrowth {

MeasureSet measure_one(const Sampler& sampler, StreamKey key, std::int64_t index) {
    Rng rng = make_stream(key.seed, key.major, static_cast<std::uint64_t>(index));
    const CMatrix c = sampler(rng);
    const Spectrum s = spectrum(reduce(c), index);
    return measure_all(s.values);
}

std::vector<MeasureSet> measure_batch_serial(const Sampler& sampler, std::int64_t n, StreamKey key) {
    return serial_map<MeasureSet>(n, [&](std::int64_t i) { return measure_one(sampler, key, i); });
}

std::vector<MeasureSet> measure_batch_parallel(const Sampler& sampler, std::int64_t n, StreamKey key, int workers) {
    return parallel_map<MeasureSet>(n, workers, [&](std::int64_t i) { return measure_one(sampler, key, i); });
}

std::vector<double> raw_spectrum_one(const Sampler& sampler, StreamKey key, std::int64_t index) {
    Rng rng = make_stream(key.seed, key.major, static_cast<std::uint64_t>(index));
    return eigenvalues(gram(sampler(rng)), index);
}

std::vector<std::vector<double>> raw_spectra_serial(const Sampler& sampler, std::int64_t n, StreamKey key) {
    return serial_map<std::vector<double>>(n, [&](std::int64_t i) { return raw_spectrum_one(sampler, key, i); });
}

std::vector<std::vector<double>> raw_spectra_parallel(const Sampler& sampler, std::int64_t n, StreamKey key,
                                                      int workers) {
    return parallel_map<std::vector<double>>(n, workers,
                                             [&](std::int64_t i) { return raw_spectrum_one(sampler, key, i); });
}

Sampler profile_sampler(const VarianceProfile& profile) {
    auto shared = std::make_shared<const VarianceProfile>(profile);
    return [shared](Rng& rng) { return sample_c(*shared, rng); };
}

Sampler stationary_sampler(int n, int nu0, int beta, double gamma) {
    return [=](Rng& rng) { return sample_stationary(n, nu0, beta, gamma, rng); };
}

}  // namespace entgrowth
