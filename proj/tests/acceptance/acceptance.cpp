// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-10 run with
// one worker; criterion 11 repeats every run with two workers and compares
// the CSV bytes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "entgrowth/dynamics.hpp"
#include "entgrowth/fit.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/kernels.hpp"
#include "entgrowth/stats.hpp"

using namespace entgrowth;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// CSV artifacts of one pass, keyed by run name.
using Artifacts = std::map<std::string, std::string>;

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string csv(const SweepCurve& c) {
    std::ostringstream os;
    write_sweep_csv(os, c);
    return os.str();
}

std::vector<ProtocolParams> log_grid(Protocol p, double lo, double hi, int points) {
    std::vector<ProtocolParams> g;
    for (int i = 0; i < points; ++i) {
        const double v = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1));
        g.push_back(p == Protocol::EB ? ProtocolParams::eb(v) : ProtocolParams::ab(v));
    }
    return g;
}

double combined(const Estimate& a, const Estimate& b) { return std::hypot(a.se, b.se); }

class Suite {
public:
    explicit Suite(int workers) : workers_(workers) {}

    Artifacts artifacts;
    long ordering_violations = 0;  // per-sample R_inf <= R2 <= R1 failures over every sweep
    long mean_violations = 0;      // points with <R2> > <R1>
    long sweep_points = 0;
    std::vector<SweepCurve> growth_sweeps;  // criterion 4, EB/EP/EE order

    SweepCurve run_sweep(const std::string& name, SweepConfig cfg) {
        cfg.workers = workers_;
        SweepCurve c = sweep(cfg);
        for (const auto& p : c.points) {
            ordering_violations += p.ordering_violations;
            mean_violations += p.r2.mean > p.r1.mean;
            ++sweep_points;
        }
        artifacts[name] = csv(c);
        return c;
    }

    Outcome separable() {
        const auto t0 = Clock::now();
        SweepConfig cfg;
        cfg.n = 64;
        cfg.n_samples = 100;
        cfg.seed = 101;
        cfg.grid = {ProtocolParams::eb(1e6)};
        const auto p = run_sweep("c1_sweep", cfg).points.at(0);
        const double t = seconds_since(t0);
        return {p.r1.mean < 0.05 && p.r2.mean < 0.05 && t < 10.0,
                "<R1>=" + fmt(p.r1.mean) + " <R2>=" + fmt(p.r2.mean) + " bits, " + fmt(t, 3) + " s"};
    }

    Outcome saturation() {
        const auto t0 = Clock::now();
        const int n = 128, samples = 200;
        const auto st = aggregate(
            measure_batch_parallel(stationary_sampler(n, 0, 1, 0.25), samples, {102, 0x57a7}, workers_));
        std::ostringstream os;
        os << "stationary " << fmt(st.r1.mean, 6) << "+-" << fmt(st.r1.se, 2) << ";";
        bool ok = true;
        const double top = std::log2(n);
        for (Protocol p : {Protocol::EB, Protocol::EP, Protocol::EE}) {
            SweepConfig cfg;
            cfg.protocol = p;
            cfg.n = n;
            cfg.n_samples = samples;
            cfg.seed = 102;
            cfg.grid = {p == Protocol::EB ? ProtocolParams::eb(1e-3) : ProtocolParams::ab(1e2)};
            const auto pt = run_sweep("c2_" + to_string(p), cfg).points.at(0);
            const double z = (pt.r1.mean - st.r1.mean) / combined(pt.r1, st.r1);
            const bool in_band = pt.r1.mean >= top - 1.2 && pt.r1.mean <= top;
            const bool agree = std::abs(z) <= 3.0;
            ok = ok && in_band && agree;
            os << ' ' << to_string(p) << ' ' << fmt(pt.r1.mean, 6) << " (z=" << fmt(z, 3) << (agree ? "" : " FAIL")
               << (in_band ? "" : " out-of-band") << ")";
        }
        const double t = seconds_since(t0);
        os << "; band [" << top - 1.2 << ", " << top << "], " << fmt(t, 3) << " s";
        return {ok && t < 300.0, os.str()};
    }

    Outcome monotone() {
        struct Range {
            Protocol p;
            double lo, hi;
        };
        std::ostringstream os;
        bool ok = true;
        for (Range r : {Range{Protocol::EB, 1e6, 1e-3}, Range{Protocol::EP, 1e-3, 1e2}, Range{Protocol::EE, 0.1, 1e2}}) {
            SweepConfig cfg;
            cfg.protocol = r.p;
            cfg.n = 64;
            cfg.n_samples = 200;
            cfg.seed = 104;
            cfg.grid = log_grid(r.p, r.lo, r.hi, 12);
            const auto c = run_sweep("c4_" + to_string(r.p), cfg);
            growth_sweeps.push_back(c);
            int bad = 0;
            double worst = 0.0;
            for (std::size_t i = 1; i < c.points.size(); ++i) {
                const auto& a = c.points[i - 1];
                const auto& b = c.points[i];
                for (auto m : {&SweepPoint::r1, &SweepPoint::r2}) {
                    const double z = (b.*m).mean - (a.*m).mean;
                    const double zs = z / combined(b.*m, a.*m);
                    worst = std::min(worst, zs);
                    bad += zs < -2.0;
                }
            }
            ok = ok && bad == 0;
            os << to_string(r.p) << ": " << bad << " drops (worst " << fmt(worst, 3) << " se); ";
        }
        return {ok, os.str()};
    }

    Outcome beta_sensitivity() {
        std::ostringstream os;
        bool ok = true;
        for (double mu : {3.0, 1.0, 0.3}) {
            Estimate r[2];
            for (int beta : {1, 2}) {
                SweepConfig cfg;
                cfg.n = 64;
                cfg.beta = beta;
                cfg.n_samples = 400;
                cfg.seed = 105;
                cfg.grid = {ProtocolParams::eb(mu)};
                r[beta - 1] = run_sweep("c5_mu" + fmt(mu) + "_b" + std::to_string(beta), cfg).points.at(0).r1;
            }
            const double z = (r[0].mean - r[1].mean) / combined(r[0], r[1]);
            ok = ok && std::abs(z) > 3.0;
            os << "mu=" << mu << ": b1 " << fmt(r[0].mean, 5) << " b2 " << fmt(r[1].mean, 5) << " z=" << fmt(z, 3)
               << "; ";
        }
        return {ok, os.str()};
    }

    Outcome scaling() {
        const auto t0 = Clock::now();
        std::ostringstream os;
        bool ok = true;
        for (ScalingMeasure m : {ScalingMeasure::R0, ScalingMeasure::InvS2}) {
            ScalingConfig cfg;
            cfg.measure = m;
            cfg.n_samples = 200;
            cfg.seed = 106;
            cfg.workers = workers_;
            const auto rep = scaling_fit(cfg);
            std::ostringstream rows;
            rows << "N,ratio\n";
            os << to_string(m) << " ratios";
            for (const auto& row : rep.rows) {
                rows << row.n << ',' << format_number(row.ratio, 12) << '\n';
                os << ' ' << fmt(row.ratio, 4);
            }
            artifacts["c6_" + to_string(m)] = rows.str();
            ok = ok && rep.ratio_spread < 0.10;
            os << " spread " << fmt(100.0 * rep.ratio_spread, 3) << "%; ";
        }
        const double t = seconds_since(t0);
        os << fmt(t, 3) << " s";
        return {ok && t < 600.0, os.str()};
    }

    Outcome conditional() {
        ConditionalConfig cfg;
        cfg.n = 64;
        cfg.n_samples = 50000;
        cfg.seed = 107;
        cfg.workers = workers_;
        const auto c = conditional_by_trace(cfg);
        std::ostringstream os;
        write_conditional_csv(os, c);
        artifacts["c7_conditional"] = os.str();
        const double z1 = c.slope_r1.z(), z2 = c.slope_r2.z();
        return {z1 > 3.0 && z2 < -3.0, "dR1/dS1 z=" + fmt(z1, 4) + ", dR2/dS1 z=" + fmt(z2, 4)};
    }

    Outcome oracle_equivalence() {
        const auto t0 = Clock::now();
        TrajectoryConfig cfg;
        cfg.seed = 108;
        cfg.workers = workers_;
        std::vector<std::vector<CheckpointSummary>> s;
        for (Route r : {Route::Direct, Route::Langevin, Route::Dyson}) {
            const auto rows = run_trajectories(cfg, r);
            std::ostringstream os;
            write_trajectory_csv(os, rows);
            artifacts["c8_" + to_string(r)] = os.str();
            s.push_back(summarize(rows));
        }
        double worst = 0.0;
        int bad = 0;
        const char* names[] = {"direct", "langevin", "dyson"};
        std::string worst_at;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for (std::size_t k = 0; k < s[0].size(); ++k)
                    for (auto m : {&CheckpointSummary::s2, &CheckpointSummary::s3}) {
                        const auto& x = s[a][k].*m;
                        const auto& y = s[b][k].*m;
                        const double z = std::abs(x.mean - y.mean) / combined(x, y);
                        bad += z > 3.0;
                        if (z > worst) {
                            worst = z;
                            worst_at = std::string(names[a]) + "/" + names[b] + " at Y+" + fmt(s[0][k].y) +
                                       (m == &CheckpointSummary::s2 ? " S2" : " S3");
                        }
                    }
        const double t = seconds_since(t0);
        return {bad == 0 && t < 900.0, std::to_string(bad) + " of 30 comparisons beyond 3 sigma, worst z=" +
                                           fmt(worst, 3) + " (" + worst_at + "), " + fmt(t, 3) + " s"};
    }

    Outcome element_moments() {
        Eigen::MatrixXd re(4, 4);
        re << 1.0, 0.3, -0.2, 0.1, 0.2, 0.9, 0.3, -0.1, -0.1, 0.2, 1.1, 0.25, 0.3, -0.2, 0.1, 0.8;
        std::ostringstream os;
        bool ok = true;
        for (int beta : {1, 2}) {
            CMatrix c;
            c.beta = beta;
            c.re = re;
            if (beta == 2) c.im = 0.3 * re.transpose();
            MomentCheckConfig cfg;
            cfg.delta_y = 1e-4;
            cfg.n_increments = 1000000;
            cfg.seed = 109;
            cfg.workers = workers_;
            const auto rep = element_moment_check(c, cfg);
            double worst = 0.0;
            for (const auto& ch : rep.checks) worst = std::max(worst, std::abs(ch.z()));
            std::ostringstream rows;
            rows << "check,observed,expected,se\n";
            for (const auto& ch : rep.checks)
                rows << ch.name << ',' << format_number(ch.observed, 12) << ',' << format_number(ch.expected, 12) << ','
                     << format_number(ch.se, 12) << '\n';
            artifacts["c9_beta" + std::to_string(beta)] = rows.str();
            ok = ok && rep.passed();
            os << "beta=" << beta << ": " << rep.checks.size() - rep.n_failed() << "/" << rep.checks.size()
               << " pass, max |z|=" << fmt(worst, 3) << "; ";
        }
        return {ok, os.str()};
    }

    Outcome fit_machinery() {
        std::ostringstream os;
        // Synthetic round trip with 1% relative noise.
        const GrowthParams truth{9.0, -8.5, 5.6, -75.0};
        Rng rng = make_stream(110, 0);
        std::normal_distribution<double> normal;
        std::vector<double> y, r, se;
        for (int i = 0; i < 64; ++i) {
            const double v = 0.025 + (1.6 - 0.025) * i / 63.0;
            const double m = growth_model(truth, v);
            y.push_back(v);
            r.push_back(m * (1.0 + 0.01 * normal(rng)));
            se.push_back(0.01 * std::abs(m));
        }
        bool ok = true;
        const auto f = fit_growth(y, r, se);
        const double got[] = {f.params.a, f.params.b1, f.params.b2, f.params.d};
        const double want[] = {truth.a, truth.b1, truth.b2, truth.d};
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(got[i] / want[i] - 1.0));
        ok = ok && worst <= 0.05;
        os << "round trip (" << fmt(f.params.a) << ", " << fmt(f.params.b1) << ", " << fmt(f.params.b2) << ", "
           << fmt(f.params.d) << ") max rel err " << fmt(100 * worst, 3) << "%; tracking";

        // Fits to the criterion-4 sweeps must track the means within 2 se at >= 90% of points.
        const char* names[] = {"EB", "EP", "EE"};
        for (std::size_t k = 0; k < growth_sweeps.size(); ++k) {
            for (GrowthMeasure m : {GrowthMeasure::R1, GrowthMeasure::R2}) {
                double frac = 0.0;
                try {
                    const auto fit = fit_growth(growth_sweeps[k], m);
                    frac = tracking_fraction(growth_sweeps[k], m, fit, 2.0);
                } catch (const FitFailure&) {
                    frac = 0.0;
                }
                ok = ok && frac >= 0.9;
                os << ' ' << names[k] << '/' << to_string(m) << '=' << fmt(100 * frac, 3) << '%';
            }
        }
        return {ok, os.str()};
    }

    Outcome ordering() {
        return {ordering_violations == 0 && mean_violations == 0 && sweep_points > 0,
                std::to_string(ordering_violations) + " per-sample and " + std::to_string(mean_violations) +
                    " mean violations over " + std::to_string(sweep_points) + " sweep points"};
    }

private:
    int workers_;
};

void report(int id, const std::string& title, const Outcome& o, int& failures) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << title << "): " << o.detail << std::endl;
    failures += !o.pass;
}

// Runs every criterion once; the ordering criterion is reported last because
// it aggregates the sweeps of the others.
std::map<int, Outcome> run_all(Suite& s) {
    std::map<int, Outcome> out;
    auto guarded = [&](int id, const std::function<Outcome()>& fn) {
        try {
            out[id] = fn();
        } catch (const std::exception& e) {
            out[id] = {false, std::string("error: ") + e.what()};
        }
    };
    guarded(1, [&] { return s.separable(); });
    guarded(2, [&] { return s.saturation(); });
    guarded(4, [&] { return s.monotone(); });
    guarded(5, [&] { return s.beta_sensitivity(); });
    guarded(6, [&] { return s.scaling(); });
    guarded(7, [&] { return s.conditional(); });
    guarded(8, [&] { return s.oracle_equivalence(); });
    guarded(9, [&] { return s.element_moments(); });
    guarded(10, [&] { return s.fit_machinery(); });
    guarded(3, [&] { return s.ordering(); });
    return out;
}

}  // namespace

int main() {
    const char* titles[] = {"",
                            "separable limit",
                            "saturation and universality",
                            "Renyi ordering",
                            "monotone growth",
                            "beta sensitivity",
                            "N log N scaling",
                            "conditional signs",
                            "oracle equivalence",
                            "element moments",
                            "fit machinery",
                            "determinism"};
    int failures = 0;
    Suite first(1);
    const auto outcomes = run_all(first);
    for (const auto& [id, o] : outcomes) report(id, titles[id], o, failures);

    Suite again(2);
    run_all(again);
    int differing = 0;
    std::string which;
    for (const auto& [name, text] : first.artifacts) {
        const auto it = again.artifacts.find(name);
        if (it == again.artifacts.end() || it->second != text) {
            ++differing;
            which += " " + name;
        }
    }
    Outcome det{differing == 0 && first.artifacts.size() == again.artifacts.size(),
                std::to_string(first.artifacts.size()) + " CSV artifacts rerun with 2 workers, " +
                    std::to_string(differing) + " differ" + which};
    report(11, titles[11], det, failures);
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
