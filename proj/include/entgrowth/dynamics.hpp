#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "entgrowth/ensembles.hpp"
#include "entgrowth/rng.hpp"
#include "entgrowth/stats.hpp"

namespace entgrowth {

// Matrix Ornstein-Uhlenbeck evolution of C in the complexity parameter:
//   C(Y + t) = C(Y) e^{-gamma t} + V sqrt((1 - e^{-2 gamma t}) / gamma),
// V with i.i.d. components of variance v2. The transition is exact, so
// successive calls compose, and the stationary component variance is v2/gamma.
struct LangevinState {
    CMatrix c;  // current matrix, the initial condition before the first call
    double y = 0.0;
    double gamma = 0.25;
    double v2 = 0.25;
};

// Advances `state` to target_y and returns the new C. target_y < state.y is a
// ConfigError.
CMatrix langevin_evolve(LangevinState& state, double target_y, Rng& rng);

// Profile of the Gaussian ensemble reached from `initial` after advancing Y
// by dy under the same evolution: variances relax towards v2/gamma, means
// decay as e^{-gamma dy}.
VarianceProfile evolved_profile(const VarianceProfile& initial, double dy, double gamma, double v2);

// Eigenvalue diffusion of the unnormalized Wishart matrix C C^dagger
// (N x P coefficient matrix, P = N + nu0), in Ito form
//   d lambda_n = [4 v2 beta sum_{m != n} lambda_n / (lambda_n - lambda_m)
//                 + 2 v2 beta (P - N + 1) - 2 gamma lambda_n] dY
//                + sqrt(8 v2 lambda_n) dW_n,
// integrated by Euler-Maruyama. A step that breaks the ordering or the
// positivity is split in two with a Brownian bridge, down to min_step. At
// min_step the proposal is reflected back into the ordered positive chamber
// (absolute values, then sorted); exact ties or non-finite values are an error.
struct DysonState {
    std::vector<double> lambdas;  // strictly descending, positive
    double y = 0.0;
    int beta = 1;
    int nu0 = 0;
    double gamma = 0.25;
    double v2 = 0.25;
    double base_step = 0.0;  // <= 0 selects 1e-4 / N
    double min_step = 1e-10;

    int n() const { return static_cast<int>(lambdas.size()); }
    double step() const;
};

struct DysonStats {
    long steps = 0;
    long rejections = 0;
    long reflections = 0;  // steps at min_step accepted after reflection
};

// Evolves in place. Throws NumericalError when a step at min_step cannot be
// reflected into a strictly ordered positive spectrum.
DysonStats dyson_evolve(DysonState& state, double target_y, Rng& rng);

// Outcome of one statistical identity check.
struct OracleCheck {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double se = 0.0;               // > 0: pass when |z| <= tolerance_sigma
    double tolerance_sigma = 3.0;
    double abs_tolerance = 0.0;    // used instead when se == 0

    double z() const;
    bool pass() const;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool passed() const;
    std::size_t n_failed() const;
};

// One-step increments C -> (C + sqrt(2 dY) V) / sqrt(1 + 2 gamma dY) of the
// trace-normalized input; compares the mean and covariance of every element
// increment of rho = C C^dagger with their first-order forms at 5 sigma.
struct MomentCheckConfig {
    double delta_y = 1e-4;
    double gamma = 0.25;
    double v2 = 0.25;
    long n_increments = 1000000;
    std::uint64_t seed = 1;
    int workers = 1;
};

OracleReport element_moment_check(const CMatrix& c, const MomentCheckConfig& cfg);

// Log of the stationary Wishart eigenvalue density (up to its constant) for
// an N x P coefficient matrix with components of variance 1/(2 gamma).
double log_wishart_density(const std::vector<double>& lambdas, int beta, int p, double gamma);

// Density of x = lambda_max / (lambda_1 + lambda_2) at N = 2 under the trace
// projection, normalized on [1/2, 1].
double fixed_trace_density_n2(double x, int beta, int p);

// Quadrature of f(x) against fixed_trace_density_n2 over [lo, hi] within [1/2, 1].
double fixed_trace_expectation_n2(int beta, int p, const std::function<double(double)>& f, double lo = 0.5,
                                  double hi = 1.0);

struct StationaryCheckConfig {
    int n = 2;
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    long n_samples = 100000;
    int n_bins = 10;  // histogram of lambda_max / S1 at N = 2
    std::uint64_t seed = 1;
    int workers = 1;
};

// Stationary-law checks on sampled Wishart spectra: trace moments against
// their closed forms (N <= 8); at N = 2 additionally <S2> under trace
// projection against quadrature, a histogram goodness-of-fit of the
// normalized top eigenvalue, and exchange symmetry of the log density.
OracleReport stationary_check(const StationaryCheckConfig& cfg);

// Checkpointed trajectories of one ensemble under the three routes: direct
// sampling of the evolved profile, Langevin evolution of sampled initial
// matrices, and the eigenvalue diffusion started from their spectra.
enum class Route { Direct, Langevin, Dyson };
std::string to_string(Route r);

struct TrajectoryConfig {
    Protocol protocol = Protocol::EB;
    ProtocolParams params = ProtocolParams::eb(20.0);
    int n = 8;
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    double v2 = 0.25;
    std::vector<double> checkpoints{0.05, 0.1, 0.2, 0.4, 0.8};  // increments over the initial Y
    long n_paths = 10000;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct TrajectoryRow {
    long path_id = 0;
    double y = 0.0;  // increment over the initial Y
    double s2 = 0.0, s3 = 0.0, r1 = 0.0, r2 = 0.0;
};

std::vector<TrajectoryRow> run_trajectories(const TrajectoryConfig& cfg, Route route);

inline constexpr const char* kTrajectoryCsvHeader = "path_id,Y,S2,S3,R1,R2";
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

struct CheckpointSummary {
    double y = 0.0;
    Estimate s2, s3;
};

// Per-checkpoint means in checkpoint order.
std::vector<CheckpointSummary> summarize(const std::vector<TrajectoryRow>& rows);

}  // namespace entgrowth
