#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "entgrowth/ensembles.hpp"

namespace entgrowth {

// Measured inputs of the large-N growth laws. r0_bar and inv_s2_bar are the
// deep-Y ensemble averages; the g slopes come from the trace-conditioned study.
struct TheoryInputs {
    int n = 64;
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    double y0 = 0.0;
    double r0_bar = 0.0;
    double inv_s2_bar = 0.0;
    double g1_slope_r1 = 0.0;  // > 0
    double g1_slope_r2 = 0.0;  // < 0
    double alpha_exp = 0.5;    // <1/S2> ~ (Y - Y0)^alpha at small Y

    double nu() const { return (nu0 - 1) / 2.0; }
    double n_nu() const { return n - 2.0 * nu() - 1.0; }  // N at nu0 = 0
};

struct TheoryPoint {
    double y = 0.0;
    double value = 0.0;     // the prediction used for comparisons
    double small_y = 0.0;   // linear (R1) or power-law (R2) small-Y branch
    std::string branch;     // which branch `value` comes from
};

struct TheoryCurve {
    std::string measure;
    double saturation = 0.0;
    std::vector<TheoryPoint> points;
};

// <R1(Y)> = (<R0>/(N g'(1))) (1 - exp(-beta N N_nu g'(1) (Y - Y0) / 2)); small-Y
// branch beta N_nu <R0> (Y - Y0) / 2. Requires g'(1) > 0.
TheoryCurve predict_r1(const TheoryInputs& in, std::span<const double> y);

// Small-Y branch (Y - Y0)^alpha / (|g'(1)| N_nu), capped by the saturation
// <1/S2> / (2 |g'(1)| N_nu). Requires g'(1) < 0.
TheoryCurve predict_r2(const TheoryInputs& in, std::span<const double> y);

// Sweep CSV schema plus a trailing source column set to "theory". Columns
// without a prediction are written as nan; R0 and invS2 carry the inputs.
void write_theory_csv(std::ostream& out, const TheoryInputs& in, Protocol protocol, const TheoryCurve& r1,
                      const TheoryCurve& r2);

}  // namespace entgrowth
