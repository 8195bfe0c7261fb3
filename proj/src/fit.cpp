#include "entgrowth/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace entgrowth {

namespace {

constexpr double kMaxExponent = 700.0;
constexpr double kDegenerateTransient = 1e-8;
constexpr int kRateGridSize = 200;
constexpr int kMaxStarts = 6;
constexpr int kMaxIterations = 500;

using Vec4 = Eigen::Vector4d;

struct Data {
    std::span<const double> y, r;
    std::vector<double> sqrt_w;
};

Vec4 pack(const GrowthParams& p) { return {p.a, p.b1, p.b2, p.d}; }
GrowthParams unpack(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }

bool overflows(double d, std::span<const double> y) {
    for (double yi : y)
        if (-d * yi > kMaxExponent) return true;
    return false;
}

double chi2_of(const Data& data, const GrowthParams& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.y.size(); ++i) {
        const double e = data.sqrt_w[i] * (data.r[i] - growth_model(p, data.y[i]));
        s += e * e;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Weighted residuals and Jacobian of the model (not of the residual).
void linearize(const Data& data, const GrowthParams& p, Eigen::VectorXd& res, Eigen::MatrixXd& jac) {
    const auto n = static_cast<Eigen::Index>(data.y.size());
    res.resize(n);
    jac.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = data.y[static_cast<std::size_t>(i)];
        const double w = data.sqrt_w[static_cast<std::size_t>(i)];
        const double e = std::exp(-p.d * y);
        const double poly = 1.0 + p.b1 * y + p.b2 * y * y;
        res(i) = w * (data.r[static_cast<std::size_t>(i)] - p.a * (1.0 - poly * e));
        jac(i, 0) = w * (1.0 - poly * e);
        jac(i, 1) = -w * p.a * y * e;
        jac(i, 2) = -w * p.a * y * y * e;
        jac(i, 3) = w * p.a * poly * y * e;
    }
}

struct Candidate {
    GrowthParams p;
    double chi2 = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

// For fixed d the model is linear in (A, A b1, A b2).
Candidate solve_linear(const Data& data, double d) {
    Candidate c;
    if (overflows(d, data.y)) return c;
    const auto n = static_cast<Eigen::Index>(data.y.size());
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = data.y[static_cast<std::size_t>(i)];
        const double w = data.sqrt_w[static_cast<std::size_t>(i)];
        const double e = std::exp(-d * y);
        basis(i, 0) = w * (1.0 - e);
        basis(i, 1) = -w * y * e;
        basis(i, 2) = -w * y * y * e;
        rhs(i) = w * data.r[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    qr.setThreshold(1e-12);
    const Eigen::Vector3d coef = qr.solve(rhs);
    if (!coef.allFinite() || coef(0) == 0.0) return c;
    c.p = {coef(0), coef(1) / coef(0), coef(2) / coef(0), d};
    c.chi2 = (basis * coef - rhs).squaredNorm();
    if (!std::isfinite(c.chi2)) c.chi2 = std::numeric_limits<double>::infinity();
    return c;
}

// Marquardt-scaled Levenberg-Marquardt. Returns false when the iteration
// budget runs out or the state turns non-finite.
bool refine(const Data& data, Candidate& c) {
    Vec4 theta = pack(c.p);
    double chi2 = chi2_of(data, c.p);
    if (!std::isfinite(chi2)) return false;
    double lambda = 1e-3;
    Eigen::VectorXd res;
    Eigen::MatrixXd jac;
    for (int it = 0; it < kMaxIterations; ++it) {
        c.iterations = it + 1;
        linearize(data, unpack(theta), res, jac);
        const Eigen::Matrix4d h = jac.transpose() * jac;
        const Vec4 g = jac.transpose() * res;
        Vec4 diag = h.diagonal().cwiseMax(1e-300);
        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::Matrix4d damped = h;
            damped.diagonal() += lambda * diag;
            const Vec4 step = damped.ldlt().solve(g);
            const Vec4 trial = theta + step;
            const double trial_chi2 = step.allFinite() ? chi2_of(data, unpack(trial)) : std::numeric_limits<double>::infinity();
            if (trial_chi2 < chi2) {
                const double drop = chi2 - trial_chi2;
                const double rel_step = step.norm() / (theta.norm() + 1e-12);
                theta = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (drop <= 1e-12 * chi2 + 1e-300 || rel_step < 1e-12) {
                    c.p = unpack(theta);
                    c.chi2 = chi2;
                    return true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction at any damping: a local minimum to machine precision.
            c.p = unpack(theta);
            c.chi2 = chi2;
            return true;
        }
    }
    c.p = unpack(theta);
    c.chi2 = chi2;
    return false;
}

double max_transient(const GrowthParams& p, std::span<const double> y) {
    double worst = 0.0;
    for (double yi : y) worst = std::max(worst, std::abs((1.0 + p.b1 * yi + p.b2 * yi * yi) * std::exp(-p.d * yi)));
    return worst;
}

}  // namespace

double growth_model(const GrowthParams& p, double y) {
    return p.a * (1.0 - (1.0 + p.b1 * y + p.b2 * y * y) * std::exp(-p.d * y));
}

FitResult fit_growth(std::span<const double> y, std::span<const double> r, std::span<const double> se) {
    if (y.size() != r.size() || (!se.empty() && se.size() != y.size()))
        throw ConfigError("fit input columns have different lengths");
    if (y.size() < static_cast<std::size_t>(kMinFitPoints))
        throw ConfigError("fit needs at least " + std::to_string(kMinFitPoints) + " points, got " +
                          std::to_string(y.size()));
    Data data{y, r, {}};
    data.sqrt_w.resize(y.size(), 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(r[i])) throw ConfigError("fit input contains non-finite values");
        if (!se.empty()) {
            if (!(se[i] > 0.0) || !std::isfinite(se[i]))
                throw ConfigError("standard error at point " + std::to_string(i) + " must be positive");
            data.sqrt_w[i] = 1.0 / se[i];
        }
    }

    // Rate scan over +-logspace(-2, 3).
    std::vector<Candidate> scan;
    for (int sign : {-1, 1}) {
        for (int k = 0; k < kRateGridSize; ++k) {
            const double d = sign * std::pow(10.0, -2.0 + 5.0 * k / (kRateGridSize - 1));
            scan.push_back(solve_linear(data, d));
        }
    }
    std::sort(scan.begin(), scan.end(), [](const Candidate& a, const Candidate& b) { return a.p.d < b.p.d; });

    std::vector<Candidate> starts;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        if (!std::isfinite(scan[i].chi2)) continue;
        const bool left = i == 0 || !(scan[i - 1].chi2 < scan[i].chi2);
        const bool right = i + 1 == scan.size() || !(scan[i + 1].chi2 < scan[i].chi2);
        if (left && right) starts.push_back(scan[i]);
    }
    std::sort(starts.begin(), starts.end(), [](const Candidate& a, const Candidate& b) { return a.chi2 < b.chi2; });
    if (starts.size() > static_cast<std::size_t>(kMaxStarts)) starts.resize(kMaxStarts);

    Candidate best;
    double best_any = std::numeric_limits<double>::infinity();
    auto consider = [&](const Candidate& c) {
        if (!std::isfinite(c.chi2)) return;
        best_any = std::min(best_any, c.chi2);
        if (c.p.a > 0.0 && c.chi2 < best.chi2) best = c;
    };
    for (const auto& s : starts) {
        consider(s);
        Candidate polished = s;
        if (refine(data, polished)) consider(polished);
    }

    auto rms_of = [&](const GrowthParams& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += std::pow(r[i] - growth_model(p, y[i]), 2);
        return std::sqrt(s / static_cast<double>(y.size()));
    };
    if (!std::isfinite(best.chi2)) {
        const double best_rms = std::isfinite(best_any) ? std::sqrt(best_any / static_cast<double>(y.size()))
                                                         : std::numeric_limits<double>::quiet_NaN();
        throw FitFailure("growth fit did not converge to a positive saturation level from any start", best_rms);
    }

    FitResult out;
    out.params = best.p;
    out.chi2 = best.chi2;
    out.iterations = best.iterations;
    out.n_points = static_cast<int>(y.size());
    out.residual_rms = rms_of(best.p);
    out.degenerate = max_transient(best.p, y) < kDegenerateTransient;

    Eigen::VectorXd res;
    Eigen::MatrixXd jac;
    linearize(data, best.p, res, jac);
    const Eigen::Matrix4d h = jac.transpose() * jac;
    out.covariance = h.completeOrthogonalDecomposition().pseudoInverse();
    return out;
}

std::string to_string(GrowthMeasure m) { return m == GrowthMeasure::R1 ? "R1" : "R2"; }

GrowthMeasure parse_growth_measure(const std::string& s) {
    if (s == "R1") return GrowthMeasure::R1;
    if (s == "R2") return GrowthMeasure::R2;
    throw ConfigError("unknown fit measure '" + s + "' (expected R1 or R2)");
}

namespace {

const Estimate& pick(const SweepPoint& p, GrowthMeasure m) { return m == GrowthMeasure::R1 ? p.r1 : p.r2; }

}  // namespace

FitResult fit_growth(const SweepCurve& curve, GrowthMeasure measure) {
    std::vector<double> y, r, se;
    for (const auto& p : curve.points) {
        y.push_back(p.y);
        r.push_back(pick(p, measure).mean);
        se.push_back(pick(p, measure).se);
    }
    return fit_growth(y, r, se);
}

double tracking_fraction(const SweepCurve& curve, GrowthMeasure measure, const FitResult& fit, double k) {
    if (curve.points.empty()) return 0.0;
    long inside = 0;
    for (const auto& p : curve.points) {
        const auto& e = pick(p, measure);
        if (std::abs(growth_model(fit.params, p.y) - e.mean) <= k * e.se) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(curve.points.size());
}

nlohmann::json to_json(const FitResult& f) {
    nlohmann::json j;
    j["A"] = f.params.a;
    j["b1"] = f.params.b1;
    j["b2"] = f.params.b2;
    j["d"] = f.params.d;
    j["residual_rms"] = f.residual_rms;
    j["chi2"] = f.chi2;
    j["degenerate"] = f.degenerate;
    j["n_points"] = f.n_points;
    auto cov = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
        auto row = nlohmann::json::array();
        for (int k = 0; k < 4; ++k) row.push_back(f.covariance(i, k));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    return j;
}

}  // namespace entgrowth
