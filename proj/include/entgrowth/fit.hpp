#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

#include "entgrowth/errors.hpp"
#include "entgrowth/stats.hpp"
#include "json.hpp"

namespace entgrowth {

// R(Y) = A [1 - (1 + b1 Y + b2 Y^2) exp(-d Y)]
struct GrowthParams {
    double a = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double d = 0.0;
};

double growth_model(const GrowthParams& p, double y);

struct FitResult {
    GrowthParams params;
    double residual_rms = 0.0;  // unweighted
    double chi2 = 0.0;          // weighted
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // order A, b1, b2, d
    bool degenerate = false;    // transient invisible on the grid; only A is determined
    int n_points = 0;
    int iterations = 0;
};

class FitFailure : public NumericalError {
public:
    FitFailure(const std::string& what, double best_residual)
        : NumericalError(what), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

inline constexpr int kMinFitPoints = 8;

// Weighted least squares with weights 1/se^2 (unit weights when se is
// empty). Every rate on a signed log grid is tried with the linear
// parameters solved exactly; the best few are then refined jointly.
FitResult fit_growth(std::span<const double> y, std::span<const double> r, std::span<const double> se = {});

enum class GrowthMeasure { R1, R2 };
std::string to_string(GrowthMeasure m);
GrowthMeasure parse_growth_measure(const std::string& s);

FitResult fit_growth(const SweepCurve& curve, GrowthMeasure measure);

// Fraction of points whose mean lies within k standard errors of the fit.
double tracking_fraction(const SweepCurve& curve, GrowthMeasure measure, const FitResult& fit, double k = 2.0);

nlohmann::json to_json(const FitResult& f);

}  // namespace entgrowth
