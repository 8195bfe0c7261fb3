#include "entgrowth/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "entgrowth/errors.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/kernels.hpp"
#include "entgrowth/measures.hpp"
#include "entgrowth/schmidt.hpp"

namespace entgrowth {

namespace {

void check_rates(double gamma, double v2) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
    if (!(v2 > 0.0) || !std::isfinite(v2)) throw ConfigError("v2 must be > 0");
}

// Adds sd * N(0, 1) to every real component, in the same order sample_c draws.
void add_noise(CMatrix& c, double sd, Rng& rng) {
    std::normal_distribution<double> normal;
    for (Eigen::Index l = 0; l < c.cols(); ++l) {
        for (Eigen::Index k = 0; k < c.rows(); ++k) {
            c.re(k, l) += sd * normal(rng);
            if (c.beta == 2) c.im(k, l) += sd * normal(rng);
        }
    }
}

}  // namespace

CMatrix langevin_evolve(LangevinState& state, double target_y, Rng& rng) {
    check_rates(state.gamma, state.v2);
    const double t = target_y - state.y;
    if (!(t >= 0.0)) {
        std::ostringstream os;
        os << "cannot evolve backwards from Y=" << state.y << " to Y=" << target_y;
        throw ConfigError(os.str());
    }
    if (t == 0.0) return state.c;
    const double decay = std::exp(-state.gamma * t);
    const double sd = std::sqrt(state.v2 * -std::expm1(-2.0 * state.gamma * t) / state.gamma);
    state.c.re *= decay;
    if (state.c.beta == 2) state.c.im *= decay;
    add_noise(state.c, sd, rng);
    state.y = target_y;
    return state.c;
}

VarianceProfile evolved_profile(const VarianceProfile& initial, double dy, double gamma, double v2) {
    check_rates(gamma, v2);
    if (!(dy >= 0.0)) throw ConfigError("profile evolution needs dY >= 0");
    const double keep = std::exp(-2.0 * gamma * dy);
    const double gain = (v2 / gamma) * -std::expm1(-2.0 * gamma * dy);
    Eigen::MatrixXd h = (initial.h.array() * keep + gain).matrix();
    // Entries the initial profile treats as zero stay zero until the gain lifts them.
    for (Eigen::Index i = 0; i < h.size(); ++i)
        if (initial.h(i) <= kVarianceFloor) h(i) = std::max(gain, kVarianceFloor);
    const double shrink = std::exp(-gamma * dy);
    Eigen::MatrixXd mean_im = initial.mean_im.size() > 0 ? Eigen::MatrixXd(initial.mean_im * shrink) : Eigen::MatrixXd();
    return custom_profile(std::move(h), initial.mean * shrink, initial.beta, std::move(mean_im));
}

double DysonState::step() const { return base_step > 0.0 ? base_step : 1e-4 / std::max(1, n()); }

namespace {

struct DysonStepper {
    const DysonState& s;
    double regular;  // 2 v2 beta (P - N + 1)
    double repulsion;  // 4 v2 beta
    double noise;  // 8 v2

    explicit DysonStepper(const DysonState& state)
        : s(state),
          regular(2.0 * state.v2 * state.beta * (state.nu0 + 1)),
          repulsion(4.0 * state.v2 * state.beta),
          noise(8.0 * state.v2) {}

    // Proposes an Euler-Maruyama step; returns the index of the first broken
    // constraint or -1. Index N-1 means the smallest eigenvalue left (0, inf).
    int propose(const std::vector<double>& lam, double h, const std::vector<double>& dw,
                std::vector<double>& out) const {
        const std::size_t n = lam.size();
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double rep = 0.0;
            for (std::size_t m = 0; m < n; ++m)
                if (m != i) rep += lam[i] / (lam[i] - lam[m]);
            const double drift = repulsion * rep + regular - 2.0 * s.gamma * lam[i];
            out[i] = lam[i] + drift * h + std::sqrt(noise * lam[i]) * dw[i];
        }
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(out[i] > out[i + 1])) return static_cast<int>(i);
        if (!(out[n - 1] > 0.0)) return static_cast<int>(n - 1);
        return -1;
    }
};

void advance(DysonState& state, const DysonStepper& stepper, double h, const std::vector<double>& dw, Rng& rng,
             DysonStats& stats, std::vector<double>& scratch) {
    const int broken = stepper.propose(state.lambdas, h, dw, scratch);
    if (broken < 0) {
        state.lambdas.swap(scratch);
        state.y += h;
        ++stats.steps;
        return;
    }
    ++stats.rejections;
    if (h / 2.0 < state.min_step) {
        // At the floor, reflect the proposal back into the ordered chamber: the
        // smallest eigenvalue is a squared singular value that can pass through
        // zero, and a crossing pair is the same spectrum with labels swapped.
        // This is the symmetrized Euler scheme for square-root diffusions.
        bool ok = true;
        for (double& l : scratch) {
            l = std::abs(l);
            ok = ok && std::isfinite(l) && l > 0.0;
        }
        std::sort(scratch.begin(), scratch.end(), std::greater<>());
        for (std::size_t i = 1; ok && i < scratch.size(); ++i) ok = scratch[i - 1] > scratch[i];
        if (ok) {
            state.lambdas.swap(scratch);
            state.y += h;
            ++stats.steps;
            ++stats.reflections;
            return;
        }
    }
    if (h / 2.0 < state.min_step) {
        std::ostringstream os;
        os << "stiff region at Y=" << state.y << ": ";
        if (broken == state.n() - 1)
            os << "eigenvalue " << broken + 1 << " reaches zero";
        else
            os << "eigenvalues " << broken + 1 << " and " << broken + 2 << " collide";
        os << " with step " << h;
        throw NumericalError(os.str());
    }
    // Brownian bridge: split dW into two conditionally independent halves.
    std::normal_distribution<double> normal;
    const double bridge_sd = std::sqrt(h / 4.0);
    std::vector<double> first(dw.size()), second(dw.size());
    for (std::size_t i = 0; i < dw.size(); ++i) {
        first[i] = dw[i] / 2.0 + bridge_sd * normal(rng);
        second[i] = dw[i] - first[i];
    }
    std::vector<double> inner;
    advance(state, stepper, h / 2.0, first, rng, stats, inner);
    advance(state, stepper, h / 2.0, second, rng, stats, inner);
}

void check_dyson_state(const DysonState& s) {
    if (s.lambdas.empty()) throw ConfigError("eigenvalue state is empty");
    if (s.beta != 1 && s.beta != 2) throw ConfigError("beta must be 1 or 2");
    if (s.nu0 < 0) throw ConfigError("nu0 must be >= 0");
    check_rates(s.gamma, s.v2);
    if (!(s.min_step > 0.0)) throw ConfigError("minimum step must be > 0");
    for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
        if (!(s.lambdas[i] > 0.0) || !std::isfinite(s.lambdas[i]))
            throw ConfigError("eigenvalues must be positive and finite");
        if (i > 0 && !(s.lambdas[i - 1] > s.lambdas[i]))
            throw ConfigError("eigenvalues must be strictly descending");
    }
}

}  // namespace

DysonStats dyson_evolve(DysonState& state, double target_y, Rng& rng) {
    check_dyson_state(state);
    DysonStats stats;
    const double span = target_y - state.y;
    if (!(span >= 0.0)) {
        std::ostringstream os;
        os << "cannot evolve backwards from Y=" << state.y << " to Y=" << target_y;
        throw ConfigError(os.str());
    }
    if (span == 0.0) return stats;
    const auto n_steps = static_cast<long>(std::ceil(span / state.step()));
    const double h = span / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const DysonStepper stepper(state);
    std::normal_distribution<double> normal;
    std::vector<double> dw(state.lambdas.size()), scratch;
    scratch.reserve(state.lambdas.size());
    const double start = state.y;
    for (long k = 0; k < n_steps; ++k) {
        for (double& w : dw) w = sqrt_h * normal(rng);
        advance(state, stepper, h, dw, rng, stats, scratch);
        state.y = start + h * static_cast<double>(k + 1);
    }
    state.y = target_y;
    return stats;
}

double OracleCheck::z() const {
    if (se > 0.0) return (observed - expected) / se;
    return observed == expected ? 0.0 : std::numeric_limits<double>::infinity();
}

bool OracleCheck::pass() const {
    if (!std::isfinite(observed)) return false;
    if (se > 0.0) return std::abs(z()) <= tolerance_sigma;
    return std::abs(observed - expected) <= abs_tolerance;
}

bool OracleReport::passed() const { return n_failed() == 0; }

std::size_t OracleReport::n_failed() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass(); }));
}

namespace {

using cd = std::complex<double>;

Eigen::MatrixXcd to_complex(const CMatrix& c) {
    Eigen::MatrixXcd z(c.rows(), c.cols());
    z.real() = c.re;
    if (c.beta == 2)
        z.imag() = c.im;
    else
        z.imag().setZero();
    return z;
}

// Running sums for one block of increments.
struct MomentSums {
    long count = 0;
    std::vector<cd> first;        // sum of d_mn
    std::vector<double> first_sq; // sum of re^2 + i im^2 split below
    std::vector<double> first_im_sq;
    std::vector<cd> herm, plain;  // sum of d_mn conj(d_kl), d_mn d_kl
    std::vector<double> herm_re_sq, herm_im_sq, plain_re_sq, plain_im_sq;

    explicit MomentSums(std::size_t n = 0)
        : first(n * n), first_sq(n * n), first_im_sq(n * n), herm(n * n * n * n), plain(n * n * n * n),
          herm_re_sq(herm.size()), herm_im_sq(herm.size()), plain_re_sq(herm.size()), plain_im_sq(herm.size()) {}

    void add(const MomentSums& o) {
        count += o.count;
        auto acc = [](auto& a, const auto& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        };
        acc(first, o.first);
        acc(first_sq, o.first_sq);
        acc(first_im_sq, o.first_im_sq);
        acc(herm, o.herm);
        acc(plain, o.plain);
        acc(herm_re_sq, o.herm_re_sq);
        acc(herm_im_sq, o.herm_im_sq);
        acc(plain_re_sq, o.plain_re_sq);
        acc(plain_im_sq, o.plain_im_sq);
    }
};

constexpr long kMomentBlocks = 64;

double mc_se(double sum, double sum_sq, long n) {
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
    return std::sqrt(var / static_cast<double>(n));
}

std::string index_name(const char* kind, int m, int n, int k = -1, int l = -1) {
    std::ostringstream os;
    os << kind << '(' << m + 1 << ',' << n + 1;
    if (k >= 0) os << ';' << k + 1 << ',' << l + 1;
    os << ')';
    return os.str();
}

}  // namespace

OracleReport element_moment_check(const CMatrix& c_in, const MomentCheckConfig& cfg) {
    check_rates(cfg.gamma, cfg.v2);
    if (!(cfg.delta_y >= 0.0) || cfg.delta_y > 1e-3) throw ConfigError("moment check needs 0 <= dY <= 1e-3");
    if (cfg.n_increments < 2) throw ConfigError("moment check needs at least 2 increments");

    const Eigen::MatrixXcd c = [&] {
        Eigen::MatrixXcd z = to_complex(c_in);
        const double tr = z.squaredNorm();
        if (!(tr > 0.0)) throw NumericalError("degenerate state: coefficient matrix is identically zero");
        return Eigen::MatrixXcd(z / std::sqrt(tr));
    }();
    const Eigen::MatrixXcd rho = c * c.adjoint();
    const int beta = c_in.beta;
    const auto n = static_cast<std::size_t>(c.rows());
    const auto p = c.cols();
    const double dy = cfg.delta_y;
    const double shrink = 1.0 / std::sqrt(1.0 + 2.0 * cfg.gamma * dy);
    const double kick = std::sqrt(2.0 * dy);
    const double v_sd = std::sqrt(cfg.v2);
    const std::uint64_t major = splitmix64(0xb0b1'e1e7ULL ^ static_cast<std::uint64_t>(n * 4 + beta));

    auto block = [&](std::int64_t b) {
        MomentSums s(n);
        const long lo = cfg.n_increments * b / kMomentBlocks;
        const long hi = cfg.n_increments * (b + 1) / kMomentBlocks;
        Rng rng = make_stream(cfg.seed, major, static_cast<std::uint64_t>(b));
        std::normal_distribution<double> normal;
        Eigen::MatrixXcd v(c.rows(), p);
        std::vector<cd> d(n * n);
        for (long it = lo; it < hi; ++it) {
            for (Eigen::Index l = 0; l < p; ++l)
                for (Eigen::Index k = 0; k < c.rows(); ++k) {
                    const double re = v_sd * normal(rng);
                    const double im = beta == 2 ? v_sd * normal(rng) : 0.0;
                    v(k, l) = cd(re, im);
                }
            const Eigen::MatrixXcd next = (c + kick * v) * shrink;
            const Eigen::MatrixXcd delta = next * next.adjoint() - rho;
            for (std::size_t m = 0; m < n; ++m)
                for (std::size_t q = 0; q < n; ++q) d[m * n + q] = delta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(q));
            for (std::size_t i = 0; i < n * n; ++i) {
                s.first[i] += d[i];
                s.first_sq[i] += d[i].real() * d[i].real();
                s.first_im_sq[i] += d[i].imag() * d[i].imag();
                for (std::size_t j = 0; j < n * n; ++j) {
                    const std::size_t idx = i * n * n + j;
                    const cd h = d[i] * std::conj(d[j]);
                    s.herm[idx] += h;
                    s.herm_re_sq[idx] += h.real() * h.real();
                    s.herm_im_sq[idx] += h.imag() * h.imag();
                    if (beta == 2) {
                        const cd q = d[i] * d[j];
                        s.plain[idx] += q;
                        s.plain_re_sq[idx] += q.real() * q.real();
                        s.plain_im_sq[idx] += q.imag() * q.imag();
                    }
                }
            }
            ++s.count;
        }
        return s;
    };
    const auto blocks = parallel_map<MomentSums>(kMomentBlocks, cfg.workers, block);
    MomentSums total(n);
    for (const auto& b : blocks) total.add(b);
    const long cnt = total.count;
    const double inv = 1.0 / static_cast<double>(cnt);

    OracleReport report;
    auto push = [&](std::string name, double obs, double expect, double se) {
        OracleCheck ch;
        ch.name = std::move(name);
        ch.observed = obs;
        ch.expected = expect;
        ch.se = se;
        ch.tolerance_sigma = 5.0;
        ch.abs_tolerance = 1e-300;
        report.checks.push_back(std::move(ch));
    };
    auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
    auto r = [&](std::size_t a, std::size_t b) { return rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)); };

    std::vector<cd> mean(n * n);
    for (std::size_t i = 0; i < n * n; ++i) mean[i] = total.first[i] * inv;
    const double cols = static_cast<double>(p);
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t i = m * n + q;
            const cd expect = 2.0 * (beta * cfg.v2 * cols * delta(m, q) - cfg.gamma * r(m, q)) * dy;
            push(index_name("mean re", int(m), int(q)), mean[i].real(), expect.real(),
                 mc_se(total.first[i].real(), total.first_sq[i], cnt));
            if (beta == 2)
                push(index_name("mean im", int(m), int(q)), mean[i].imag(), expect.imag(),
                     mc_se(total.first[i].imag(), total.first_im_sq[i], cnt));
        }
    }

    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t q = 0; q < n; ++q)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    const std::size_t i = m * n + q, j = k * n + l, idx = i * n * n + j;
                    const cd cov_h = total.herm[idx] * inv - mean[i] * std::conj(mean[j]);
                    if (beta == 1) {
                        const double expect = 2.0 * cfg.v2 *
                                              (r(m, k).real() * delta(q, l) + r(m, l).real() * delta(q, k) +
                                               r(q, k).real() * delta(m, l) + r(q, l).real() * delta(m, k)) *
                                              dy;
                        push(index_name("cov", int(m), int(q), int(k), int(l)), cov_h.real(), expect,
                             mc_se(total.herm[idx].real(), total.herm_re_sq[idx], cnt));
                        continue;
                    }
                    const cd expect_h = 4.0 * cfg.v2 * (r(m, k) * delta(q, l) + std::conj(r(q, l)) * delta(m, k)) * dy;
                    const cd cov_p = total.plain[idx] * inv - mean[i] * mean[j];
                    const cd expect_p = 4.0 * cfg.v2 * (r(m, l) * delta(q, k) + std::conj(r(q, k)) * delta(m, l)) * dy;
                    push(index_name("cov conj re", int(m), int(q), int(k), int(l)), cov_h.real(), expect_h.real(),
                         mc_se(total.herm[idx].real(), total.herm_re_sq[idx], cnt));
                    push(index_name("cov conj im", int(m), int(q), int(k), int(l)), cov_h.imag(), expect_h.imag(),
                         mc_se(total.herm[idx].imag(), total.herm_im_sq[idx], cnt));
                    push(index_name("cov re", int(m), int(q), int(k), int(l)), cov_p.real(), expect_p.real(),
                         mc_se(total.plain[idx].real(), total.plain_re_sq[idx], cnt));
                    push(index_name("cov im", int(m), int(q), int(k), int(l)), cov_p.imag(), expect_p.imag(),
                         mc_se(total.plain[idx].imag(), total.plain_im_sq[idx], cnt));
                }
    return report;
}

double log_wishart_density(const std::vector<double>& lambdas, int beta, int p, double gamma) {
    const auto n = static_cast<int>(lambdas.size());
    const double a = beta * (p - n + 1) / 2.0 - 1.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += a * std::log(lambdas[static_cast<std::size_t>(i)]) - gamma * lambdas[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j)
            s += beta * std::log(std::abs(lambdas[static_cast<std::size_t>(i)] - lambdas[static_cast<std::size_t>(j)]));
    }
    return s;
}

namespace {

// With x = sin^2(theta) the density of x picks up 2 sin cos, which cancels
// the integrable endpoint singularity of (x(1-x))^a.
double theta_weight(double theta, int beta, int p) {
    const double a = beta * (p - 1) / 2.0 - 1.0;
    const double sc = std::sin(theta) * std::cos(theta);
    return 2.0 * std::pow(std::abs(std::cos(2.0 * theta)), beta) * std::pow(sc, 2.0 * a + 1.0);
}

double simpson_theta(int beta, int p, const std::function<double(double)>& f, double lo, double hi) {
    const double t0 = std::asin(std::sqrt(std::clamp(lo, 0.0, 1.0)));
    const double t1 = std::asin(std::sqrt(std::clamp(hi, 0.0, 1.0)));
    constexpr int kIntervals = 4096;
    const double h = (t1 - t0) / kIntervals;
    double s = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
        const double t = t0 + h * i;
        const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double x = std::sin(t) * std::sin(t);
        s += w * f(x) * theta_weight(t, beta, p);
    }
    return s * h / 3.0;
}

double n2_norm(int beta, int p) {
    return simpson_theta(beta, p, [](double) { return 1.0; }, 0.5, 1.0);
}

}  // namespace

double fixed_trace_density_n2(double x, int beta, int p) {
    if (x < 0.5 || x > 1.0) return 0.0;
    const double a = beta * (p - 1) / 2.0 - 1.0;
    return std::pow(2.0 * x - 1.0, beta) * std::pow(x * (1.0 - x), a) / n2_norm(beta, p);
}

double fixed_trace_expectation_n2(int beta, int p, const std::function<double(double)>& f, double lo, double hi) {
    if (p < 2) throw ConfigError("N = 2 fixed-trace law needs at least 2 columns");
    return simpson_theta(beta, p, f, std::max(lo, 0.5), std::min(hi, 1.0)) / n2_norm(beta, p);
}

OracleReport stationary_check(const StationaryCheckConfig& cfg) {
    if (cfg.n < 2 || cfg.n > 8) throw ConfigError("stationary check supports 2 <= N <= 8");
    if (cfg.n_samples < 100) throw ConfigError("stationary check needs at least 100 samples");
    if (cfg.n_bins < 2) throw ConfigError("stationary check needs at least 2 bins");
    check_rates(cfg.gamma, 1.0);
    const int p = cfg.n + cfg.nu0;
    const Sampler sampler = stationary_sampler(cfg.n, cfg.nu0, cfg.beta, cfg.gamma);
    const StreamKey key{cfg.seed, splitmix64(0x57a7'10a2ULL ^ static_cast<std::uint64_t>(cfg.n * 64 + p * 4 + cfg.beta))};
    const auto spectra = raw_spectra_parallel(sampler, cfg.n_samples, key, cfg.workers);
    const auto count = static_cast<double>(spectra.size());

    OracleReport report;
    const double var = 1.0 / (2.0 * cfg.gamma);
    const double nn = cfg.n, pp = p;
    {
        std::vector<double> t1, t2;
        for (const auto& s : spectra) {
            double a = 0.0, b = 0.0;
            for (double v : s) {
                a += v;
                b += v * v;
            }
            t1.push_back(a);
            t2.push_back(b);
        }
        const Estimate e1 = estimate(t1), e2 = estimate(t2);
        const double expect1 = cfg.beta * nn * pp * var;
        const double expect2 = cfg.beta == 1 ? var * var * nn * pp * (nn + pp + 1.0)
                                             : std::pow(2.0 * var, 2) * nn * pp * (nn + pp);
        report.checks.push_back({"<Tr W>", e1.mean, expect1, e1.se, 3.0, 0.0});
        report.checks.push_back({"<Tr W^2>", e2.mean, expect2, e2.se, 3.0, 0.0});
    }
    if (cfg.n != 2) return report;

    std::vector<double> x, s2;
    double worst_asym = 0.0;
    for (const auto& s : spectra) {
        const double sum = s[0] + s[1];
        x.push_back(s[0] / sum);
        s2.push_back(std::pow(s[0] / sum, 2) + std::pow(s[1] / sum, 2));
        const double fwd = log_wishart_density({s[0], s[1]}, cfg.beta, p, cfg.gamma);
        const double rev = log_wishart_density({s[1], s[0]}, cfg.beta, p, cfg.gamma);
        worst_asym = std::max(worst_asym, std::abs(fwd - rev) / std::max(1.0, std::abs(fwd)));
    }
    const Estimate es2 = estimate(s2);
    const double q_s2 =
        fixed_trace_expectation_n2(cfg.beta, p, [](double v) { return v * v + (1.0 - v) * (1.0 - v); });
    report.checks.push_back({"<S2> fixed trace", es2.mean, q_s2, es2.se, 3.0, 0.0});

    std::vector<long> counts(static_cast<std::size_t>(cfg.n_bins), 0);
    for (double v : x) {
        auto b = static_cast<long>((v - 0.5) / 0.5 * cfg.n_bins);
        b = std::clamp<long>(b, 0, cfg.n_bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    double chi2 = 0.0;
    for (int b = 0; b < cfg.n_bins; ++b) {
        const double lo = 0.5 + 0.5 * b / cfg.n_bins, hi = 0.5 + 0.5 * (b + 1) / cfg.n_bins;
        const double expect = count * fixed_trace_expectation_n2(cfg.beta, p, [](double) { return 1.0; }, lo, hi);
        chi2 += std::pow(static_cast<double>(counts[static_cast<std::size_t>(b)]) - expect, 2) / expect;
    }
    const double dof = cfg.n_bins - 1;
    report.checks.push_back({"lambda_max/S1 histogram chi2", chi2, dof, std::sqrt(2.0 * dof), 3.0, 0.0});
    report.checks.push_back({"exchange symmetry of log density", worst_asym, 0.0, 0.0, 0.0, 1e-12});
    return report;
}

std::string to_string(Route r) {
    switch (r) {
        case Route::Direct: return "direct";
        case Route::Langevin: return "langevin";
        case Route::Dyson: return "dyson";
    }
    return "direct";
}

namespace {

void check_trajectory_config(const TrajectoryConfig& cfg) {
    check_rates(cfg.gamma, cfg.v2);
    if (cfg.n_paths < 1) throw ConfigError("need at least one path");
    if (cfg.checkpoints.empty()) throw ConfigError("need at least one checkpoint");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
        if (!(cfg.checkpoints[i] >= 0.0)) throw ConfigError("checkpoints must be >= 0");
        if (i > 0 && !(cfg.checkpoints[i] > cfg.checkpoints[i - 1]))
            throw ConfigError("checkpoints must be strictly increasing");
    }
}

TrajectoryRow row_of(long path, double y, std::span<const double> lambdas) {
    const MeasureSet m = measure_all(lambdas);
    return {path, y, m.s2, m.s3, m.r1, m.r2};
}

}  // namespace

std::vector<TrajectoryRow> run_trajectories(const TrajectoryConfig& cfg, Route route) {
    check_trajectory_config(cfg);
    const VarianceProfile initial = build_profile(cfg.protocol, cfg.params, cfg.n, cfg.nu0, cfg.beta);
    const std::uint64_t point = point_stream(cfg.protocol, cfg.params, cfg.n, cfg.nu0, cfg.beta);
    const auto& ys = cfg.checkpoints;

    std::vector<std::vector<TrajectoryRow>> per_path;
    if (route == Route::Direct) {
        std::vector<VarianceProfile> profiles;
        for (double y : ys) profiles.push_back(evolved_profile(initial, y, cfg.gamma, cfg.v2));
        const std::uint64_t major = splitmix64(point ^ 0xd12ec7ULL);
        per_path = parallel_map<std::vector<TrajectoryRow>>(cfg.n_paths, cfg.workers, [&](std::int64_t i) {
            std::vector<TrajectoryRow> rows;
            for (std::size_t k = 0; k < ys.size(); ++k) {
                Rng rng = make_stream(cfg.seed, splitmix64(major + k), static_cast<std::uint64_t>(i));
                const Spectrum s = spectrum(reduce(sample_c(profiles[k], rng)), i);
                rows.push_back(row_of(static_cast<long>(i), ys[k], s.values));
            }
            return rows;
        });
    } else {
        // Both evolution routes start path i from the same initial matrix.
        const std::uint64_t major = splitmix64(point ^ 0x9a7b5ULL);
        per_path = parallel_map<std::vector<TrajectoryRow>>(cfg.n_paths, cfg.workers, [&](std::int64_t i) {
            Rng rng = make_stream(cfg.seed, major, static_cast<std::uint64_t>(i));
            CMatrix c0 = sample_c(initial, rng);
            std::vector<TrajectoryRow> rows;
            if (route == Route::Langevin) {
                LangevinState st{std::move(c0), 0.0, cfg.gamma, cfg.v2};
                for (double y : ys) {
                    const Spectrum s = spectrum(reduce(langevin_evolve(st, y, rng)), i);
                    rows.push_back(row_of(static_cast<long>(i), y, s.values));
                }
            } else {
                DysonState st;
                st.lambdas = eigenvalues(gram(c0), i);
                st.beta = cfg.beta;
                st.nu0 = cfg.nu0;
                st.gamma = cfg.gamma;
                st.v2 = cfg.v2;
                for (std::size_t k = 0; k + 1 < st.lambdas.size(); ++k)
                    if (!(st.lambdas[k] > st.lambdas[k + 1]) || !(st.lambdas.back() > 0.0))
                        throw NumericalError("initial spectrum of path " + std::to_string(i) +
                                             " is degenerate or singular");
                for (double y : ys) {
                    dyson_evolve(st, y, rng);
                    rows.push_back(row_of(static_cast<long>(i), y, st.lambdas));
                }
            }
            return rows;
        });
    }
    std::vector<TrajectoryRow> out;
    out.reserve(static_cast<std::size_t>(cfg.n_paths) * ys.size());
    for (auto& rows : per_path) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
    out << kTrajectoryCsvHeader << '\n';
    for (const auto& r : rows)
        out << r.path_id << ',' << format_number(r.y, 12) << ',' << format_number(r.s2, 12) << ','
            << format_number(r.s3, 12) << ',' << format_number(r.r1, 12) << ',' << format_number(r.r2, 12) << '\n';
}

std::vector<CheckpointSummary> summarize(const std::vector<TrajectoryRow>& rows) {
    std::vector<double> ys;
    std::vector<std::vector<double>> s2, s3;
    for (const auto& r : rows) {
        auto it = std::find(ys.begin(), ys.end(), r.y);
        std::size_t k = static_cast<std::size_t>(it - ys.begin());
        if (it == ys.end()) {
            ys.push_back(r.y);
            s2.emplace_back();
            s3.emplace_back();
        }
        s2[k].push_back(r.s2);
        s3[k].push_back(r.s3);
    }
    std::vector<CheckpointSummary> out;
    for (std::size_t k = 0; k < ys.size(); ++k) out.push_back({ys[k], estimate(s2[k]), estimate(s3[k])});
    return out;
}

}  // namespace entgrowth
