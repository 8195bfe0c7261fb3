#include "entgrowth/theory.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "entgrowth/errors.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/stats.hpp"

namespace entgrowth {

namespace {

void check_common(const TheoryInputs& in) {
    if (in.n < 2) throw ConfigError("theory inputs: N must be >= 2");
    if (in.beta != 1 && in.beta != 2) throw ConfigError("theory inputs: beta must be 1 or 2");
    if (!(in.n_nu() > 0.0)) throw ConfigError("theory inputs: N_nu = N - 2 nu - 1 must be positive");
}

double elapsed(const TheoryInputs& in, double y) {
    if (!(y >= in.y0)) {
        std::ostringstream os;
        os << "theory: Y=" << y << " lies below Y0=" << in.y0;
        throw ConfigError(os.str());
    }
    return y - in.y0;
}

}  // namespace

TheoryCurve predict_r1(const TheoryInputs& in, std::span<const double> y) {
    check_common(in);
    const double g = in.g1_slope_r1;
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("theory: R1 branch needs g'(1) > 0");
    if (!(in.r0_bar > 0.0)) throw ConfigError("theory: <R0> must be positive");
    TheoryCurve c;
    c.measure = "R1";
    c.saturation = in.r0_bar / (in.n * g);
    const double rate = 0.5 * in.beta * in.n * in.n_nu() * g;
    for (double yy : y) {
        const double t = elapsed(in, yy);
        TheoryPoint p;
        p.y = yy;
        p.value = -c.saturation * std::expm1(-rate * t);
        p.small_y = 0.5 * in.beta * in.n_nu() * in.r0_bar * t;
        p.branch = "saturating";
        c.points.push_back(p);
    }
    return c;
}

TheoryCurve predict_r2(const TheoryInputs& in, std::span<const double> y) {
    check_common(in);
    const double g = in.g1_slope_r2;
    if (!(g < 0.0) || !std::isfinite(g)) throw ConfigError("theory: R2 branch needs g'(1) < 0");
    if (!(in.inv_s2_bar > 0.0)) throw ConfigError("theory: <1/S2> must be positive");
    if (!(in.alpha_exp > 0.0)) throw ConfigError("theory: growth exponent must be positive");
    const double scale = std::abs(g) * in.n_nu();
    TheoryCurve c;
    c.measure = "R2";
    c.saturation = in.inv_s2_bar / (2.0 * scale);
    for (double yy : y) {
        const double t = elapsed(in, yy);
        TheoryPoint p;
        p.y = yy;
        p.small_y = std::pow(t, in.alpha_exp) / scale;
        if (p.small_y < c.saturation) {
            p.value = p.small_y;
            p.branch = "small-Y";
        } else {
            p.value = c.saturation;
            p.branch = "saturated";
        }
        c.points.push_back(p);
    }
    return c;
}

void write_theory_csv(std::ostream& out, const TheoryInputs& in, Protocol protocol, const TheoryCurve& r1,
                      const TheoryCurve& r2) {
    if (r1.points.size() != r2.points.size()) throw ConfigError("theory curves have different grids");
    out << kSweepCsvHeader << ",source\n";
    for (std::size_t i = 0; i < r1.points.size(); ++i) {
        if (r1.points[i].y != r2.points[i].y) throw ConfigError("theory curves have different grids");
        out << to_string(protocol) << ",nan," << format_number(r1.points[i].y, 12) << ',' << in.n << ',' << in.beta
            << ",0," << format_number(r1.points[i].value) << ",nan," << format_number(r2.points[i].value) << ",nan,"
            << format_number(in.r0_bar) << ",nan," << format_number(in.inv_s2_bar) << ",nan,nan,nan,0,theory\n";
    }
}

}  // namespace entgrowth
