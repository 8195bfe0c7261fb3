#pragma once

#include <span>
#include <vector>

namespace entgrowth {

inline constexpr double kDefaultLogBase = 2.0;
inline constexpr double kDefaultR0Floor = 1e-16;

// Per-spectrum entanglement measures. Entropies are in base `base`; r0_ln is
// the natural-log variant of r0.
struct MeasureSet {
    double r1 = 0.0;     // von Neumann
    double r2 = 0.0;     // second Renyi
    double r_inf = 0.0;  // min-entropy
    double r0 = 0.0;     // -sum log_b lambda, lambdas floored
    double r0_ln = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    bool r0_floored = false;

    double inv_s2() const { return 1.0 / s2; }
    double s3_over_s2_sq() const { return s3 / (s2 * s2); }
    bool renyi_ordered() const { return r_inf <= r2 && r2 <= r1; }
};

// (1/(1-alpha)) log_b sum lambda^alpha. alpha must be positive and != 1.
double renyi(std::span<const double> lambdas, double alpha, double base = kDefaultLogBase);

// -sum lambda log_b lambda with 0 log 0 = 0.
double von_neumann(std::span<const double> lambdas, double base = kDefaultLogBase);

// -log_b lambda_max.
double min_entropy(std::span<const double> lambdas, double base = kDefaultLogBase);

struct LogSum {
    double value = 0.0;
    bool floored = false;
};

// -sum log_b max(lambda, floor); `floored` reports whether the floor was hit.
LogSum log_sum_r0(std::span<const double> lambdas, double floor = kDefaultR0Floor, double base = kDefaultLogBase);

// S_k = sum lambda^k for k = 1..k_max (element k-1 holds S_k).
std::vector<double> power_sums(std::span<const double> lambdas, int k_max);

// All measures of a descending Schmidt spectrum. The spectrum is renormalized
// to unit sum, and the quantities that approach zero near the separable limit
// are evaluated through the tail mass 1 - lambda_1 so that the ordering
// R_inf <= R_2 <= R_1 survives rounding.
MeasureSet measure_all(std::span<const double> lambdas, double base = kDefaultLogBase,
                       double r0_floor = kDefaultR0Floor);

}  // namespace entgrowth
