#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "entgrowth/ensembles.hpp"
#include "entgrowth/measures.hpp"
#include "json.hpp"

namespace entgrowth {

// Mean and standard error (sample standard deviation / sqrt(n)).
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

Estimate estimate(std::span<const double> values);

struct SweepPoint {
    Protocol protocol = Protocol::EB;
    ProtocolParams params;
    double param = 0.0;  // mu for EB, a for EP/EE
    double y = 0.0;
    int n = 0;
    int beta = 1;
    int n_samples = 0;
    int n_floored = 0;  // samples excluded from <R0>
    Estimate r1, r2, r_inf, r0, inv_s2, s3_s22;
    long ordering_violations = 0;  // samples with R_inf <= R2 <= R1 broken
};

struct SweepCurve {
    std::vector<SweepPoint> points;  // strictly increasing y
};

// Aggregates per-sample measures in index order.
SweepPoint aggregate(std::span<const MeasureSet> samples);

struct SweepConfig {
    Protocol protocol = Protocol::EB;
    std::vector<ProtocolParams> grid;
    int n = 64;
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    int n_samples = 200;
    std::uint64_t seed = 1;
    int workers = 1;
    bool y_from_general = false;  // entry-by-entry sum instead of the closed form
};

// Stream index of an ensemble point: a hash of everything that defines the
// point, so a point's samples do not depend on where it sits in a grid.
std::uint64_t point_stream(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta);

SweepCurve sweep(const SweepConfig& cfg);

inline constexpr const char* kSweepCsvHeader =
    "protocol,param,Y,N,beta,n,R1,R1_se,R2,R2_se,R0,R0_se,invS2,invS2_se,S3S22,S3S22_se,n_floored";

void write_sweep_csv(std::ostream& out, const SweepCurve& curve);

// Reads a file written by write_sweep_csv (R_inf is not stored and reads as 0).
SweepCurve read_sweep_csv(const std::filesystem::path& path);

// Trace-conditioned study on unnormalized stationary Wishart spectra.
struct ConditionalConfig {
    int n = 64;
    int nu0 = 0;
    int beta = 1;
    // <= 0 selects gamma = beta N (N + nu0) / 2, which centers Tr(CC^dagger) at 1.
    double gamma = 0.0;
    int n_samples = 50000;
    int n_bins = 24;
    std::uint64_t seed = 1;
    int workers = 1;
    double base = kDefaultLogBase;

    double resolved_gamma() const;
};

struct ConditionalBin {
    double center = 0.0;
    double width = 0.0;
    double s1_mean = 0.0;  // mean S1 of the samples in the bin; slopes use this, not the center
    long count = 0;
    Estimate r1, r2;
    double g_r1 = 0.0, g_r2 = 0.0;  // <R(S1)> / <R(1)>
    double g0 = 0.0;                // J(S1) / J(1), from bin masses
};

struct Slope {
    double value = 0.0;
    double se = 0.0;
    double z() const { return se > 0.0 ? value / se : 0.0; }
};

struct ConditionalCurve {
    std::vector<ConditionalBin> bins;
    double s1_mean = 0.0;
    double s1_sd = 0.0;
    double gamma = 0.0;
    Slope slope_r1, slope_r2;       // d<R|S1>/dS1 from a weighted line over central bins
    double r1_at_1 = 0.0, r2_at_1 = 0.0;
    double g_slope_at_1_r1 = 0.0;   // g'(1)
    double g_slope_at_1_r2 = 0.0;
    double g0_slope_at_1 = 0.0;
};

ConditionalCurve conditional_by_trace(const ConditionalConfig& cfg);

// Binned conditional means computed from given (S1, R1, R2) samples; split out
// so the binning can be validated on synthetic data.
ConditionalCurve bin_conditional(std::span<const double> s1, std::span<const double> r1, std::span<const double> r2,
                                 int n_bins);

void write_conditional_csv(std::ostream& out, const ConditionalCurve& curve);

// Summary without the bins.
nlohmann::json to_json(const ConditionalCurve& c);

enum class ScalingMeasure { R0, InvS2 };
std::string to_string(ScalingMeasure m);
ScalingMeasure parse_scaling_measure(const std::string& s);

struct ScalingConfig {
    ScalingMeasure measure = ScalingMeasure::R0;
    std::vector<int> n_grid{32, 64, 128, 256};
    Protocol protocol = Protocol::EE;
    ProtocolParams params = ProtocolParams::ab(1e4);
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    int n_samples = 200;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct ScalingRow {
    int n = 0;
    double n_log2_n = 0.0;
    Estimate value;       // base-2 for R0
    Estimate value_ln;    // natural-log R0 (same as value for 1/S2)
    double ratio = 0.0;   // value / (N log2 N)
    int n_floored = 0;
};

struct ScalingReport {
    ScalingMeasure measure = ScalingMeasure::R0;
    std::vector<ScalingRow> rows;
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    double ratio_mean = 0.0;
    double ratio_spread = 0.0;  // max_N |ratio / ratio_mean - 1|
};

ScalingReport scaling_fit(const ScalingConfig& cfg);
nlohmann::json to_json(const ScalingReport& r);

}  // namespace entgrowth
