#include "entgrowth/stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "entgrowth/complexity.hpp"
#include "entgrowth/errors.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/kernels.hpp"
#include "entgrowth/rng.hpp"

namespace entgrowth {

Estimate estimate(std::span<const double> values) {
    Estimate e;
    const auto n = values.size();
    if (n == 0) {
        e.mean = e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n < 2) {
        e.se = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return e;
}

SweepPoint aggregate(std::span<const MeasureSet> samples) {
    SweepPoint p;
    p.n_samples = static_cast<int>(samples.size());
    std::vector<double> r1, r2, rinf, r0, inv, s3;
    r1.reserve(samples.size());
    for (const auto& m : samples) {
        r1.push_back(m.r1);
        r2.push_back(m.r2);
        rinf.push_back(m.r_inf);
        inv.push_back(m.inv_s2());
        s3.push_back(m.s3_over_s2_sq());
        if (m.r0_floored)
            ++p.n_floored;
        else
            r0.push_back(m.r0);
        if (!m.renyi_ordered()) ++p.ordering_violations;
    }
    p.r1 = estimate(r1);
    p.r2 = estimate(r2);
    p.r_inf = estimate(rinf);
    p.r0 = estimate(r0);
    p.inv_s2 = estimate(inv);
    p.s3_s22 = estimate(s3);
    return p;
}

std::uint64_t point_stream(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(protocol) + 1);
    for (double v : {params.mu, params.a, params.b}) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
    for (int v : {n, nu0, beta}) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return h;
}

SweepCurve sweep(const SweepConfig& cfg) {
    if (cfg.n_samples < 2) throw ConfigError("sweep needs at least 2 samples per point");
    std::vector<ComplexityValue> ys;
    if (cfg.y_from_general) {
        if (cfg.grid.empty()) throw ConfigError("parameter grid is empty");
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            try {
                ys.push_back(complexity_general(build_profile(cfg.protocol, cfg.grid[i], cfg.n, cfg.nu0, cfg.beta),
                                                cfg.gamma));
            } catch (const ConfigError& e) {
                throw ConfigError("grid point " + std::to_string(i) + ": " + e.what());
            }
        }
    } else {
        ys = y_grid(cfg.protocol, cfg.grid, cfg.n, cfg.nu0, cfg.beta, cfg.gamma);
    }

    std::vector<std::size_t> order(cfg.grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ys[a].y < ys[b].y; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!(ys[order[i]].y > ys[order[i - 1]].y))
            throw ConfigError("grid points " + std::to_string(order[i - 1]) + " and " + std::to_string(order[i]) +
                              " have the same Y");
    }

    SweepCurve curve;
    for (std::size_t idx : order) {
        const ProtocolParams& pp = cfg.grid[idx];
        const VarianceProfile profile = build_profile(cfg.protocol, pp, cfg.n, cfg.nu0, cfg.beta);
        const StreamKey key{cfg.seed, point_stream(cfg.protocol, pp, cfg.n, cfg.nu0, cfg.beta)};
        std::vector<MeasureSet> samples;
        try {
            samples = measure_batch_parallel(profile_sampler(profile), cfg.n_samples, key, cfg.workers);
        } catch (const NumericalError& e) {
            throw NumericalError("sweep point " + std::to_string(idx) + ": " + e.what());
        }
        SweepPoint p = aggregate(samples);
        p.protocol = cfg.protocol;
        p.params = pp;
        p.param = cfg.protocol == Protocol::EB ? pp.mu : pp.a;
        p.y = ys[idx].y;
        p.n = cfg.n;
        p.beta = cfg.beta;
        curve.points.push_back(p);
    }
    return curve;
}

void write_sweep_csv(std::ostream& out, const SweepCurve& curve) {
    out << kSweepCsvHeader << '\n';
    for (const auto& p : curve.points) {
        out << to_string(p.protocol) << ',' << format_number(p.param) << ',' << format_number(p.y, 12) << ','
            << p.n << ',' << p.beta << ',' << p.n_samples;
        for (const Estimate* e : {&p.r1, &p.r2, &p.r0, &p.inv_s2, &p.s3_s22})
            out << ',' << format_number(e->mean) << ',' << format_number(e->se);
        out << ',' << p.n_floored << '\n';
    }
}

SweepCurve read_sweep_csv(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t proto_col = t.column("protocol");
    const auto param = t.numbers("param"), y = t.numbers("Y"), n = t.numbers("N"), beta = t.numbers("beta"),
               count = t.numbers("n"), floored = t.numbers("n_floored");
    auto est = [&](const char* name) {
        const auto m = t.numbers(name), se = t.numbers(std::string(name) + "_se");
        std::vector<Estimate> out;
        for (std::size_t i = 0; i < m.size(); ++i) out.push_back({m[i], se[i]});
        return out;
    };
    const auto r1 = est("R1"), r2 = est("R2"), r0 = est("R0"), inv = est("invS2"), s3 = est("S3S22");
    SweepCurve curve;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        SweepPoint p;
        try {
            p.protocol = parse_protocol(t.rows[i][proto_col]);
        } catch (const ConfigError& e) {
            throw IoError(t.source + ":" + std::to_string(i + 2) + ": " + e.what());
        }
        p.param = param[i];
        p.params = p.protocol == Protocol::EB ? ProtocolParams::eb(param[i]) : ProtocolParams::ab(param[i]);
        p.y = y[i];
        p.n = static_cast<int>(n[i]);
        p.beta = static_cast<int>(beta[i]);
        p.n_samples = static_cast<int>(count[i]);
        p.n_floored = static_cast<int>(floored[i]);
        p.r1 = r1[i];
        p.r2 = r2[i];
        p.r0 = r0[i];
        p.inv_s2 = inv[i];
        p.s3_s22 = s3[i];
        if (!curve.points.empty() && !(p.y > curve.points.back().y))
            throw IoError(t.source + ":" + std::to_string(i + 2) + ": Y is not strictly increasing");
        curve.points.push_back(p);
    }
    if (curve.points.empty()) throw IoError(t.source + ": no sweep rows");
    return curve;
}

double ConditionalConfig::resolved_gamma() const {
    return gamma > 0.0 ? gamma : 0.5 * beta * static_cast<double>(n) * static_cast<double>(n + nu0);
}

namespace {

// Value and derivative at x0 of the parabola through three points.
std::pair<double, double> parabola_at(const std::array<double, 3>& x, const std::array<double, 3>& y, double x0) {
    double value = 0.0, deriv = 0.0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const double denom = (x[i] - x[j]) * (x[i] - x[k]);
        value += y[i] * (x0 - x[j]) * (x0 - x[k]) / denom;
        deriv += y[i] * ((x0 - x[j]) + (x0 - x[k])) / denom;
    }
    return {value, deriv};
}

Slope weighted_line_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& se) {
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (se[i] * se[i]);
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = s * sxx - sx * sx;
    if (!(det > 0.0)) throw NumericalError("binning error: central bins do not determine a slope");
    return {(s * sxy - sx * sy) / det, std::sqrt(s / det)};
}

}  // namespace

ConditionalCurve bin_conditional(std::span<const double> s1, std::span<const double> r1, std::span<const double> r2,
                                 int n_bins) {
    if (n_bins < 3) throw ConfigError("need at least 3 bins");
    if (s1.size() != r1.size() || s1.size() != r2.size() || s1.size() < 2)
        throw ConfigError("conditional inputs must have equal length >= 2");
    ConditionalCurve out;
    const Estimate s1_est = estimate(s1);
    out.s1_mean = s1_est.mean;
    out.s1_sd = s1_est.se * std::sqrt(static_cast<double>(s1.size()));
    if (!(out.s1_sd > 0.0)) throw NumericalError("binning error: S1 has zero spread");
    const double lo = out.s1_mean - 3.0 * out.s1_sd;
    const double width = 6.0 * out.s1_sd / n_bins;

    std::vector<std::vector<double>> b0(static_cast<std::size_t>(n_bins)), b1(static_cast<std::size_t>(n_bins)),
        b2(static_cast<std::size_t>(n_bins));
    for (std::size_t i = 0; i < s1.size(); ++i) {
        const double pos = (s1[i] - lo) / width;
        if (pos < 0.0 || pos >= n_bins) continue;
        const auto b = static_cast<std::size_t>(pos);
        b0[b].push_back(s1[i]);
        b1[b].push_back(r1[i]);
        b2[b].push_back(r2[i]);
    }

    const auto central = static_cast<std::size_t>((out.s1_mean - lo) / width);
    if (b1[central].size() < 2) throw NumericalError("binning error: empty central bin");

    const double total = static_cast<double>(s1.size());
    for (int b = 0; b < n_bins; ++b) {
        const auto& v1 = b1[static_cast<std::size_t>(b)];
        if (v1.size() < 2) continue;
        ConditionalBin bin;
        bin.center = lo + (b + 0.5) * width;
        bin.width = width;
        bin.s1_mean = estimate(b0[static_cast<std::size_t>(b)]).mean;
        bin.count = static_cast<long>(v1.size());
        bin.r1 = estimate(v1);
        bin.r2 = estimate(b2[static_cast<std::size_t>(b)]);
        bin.g0 = static_cast<double>(bin.count) / (total * width);  // density, normalized below
        out.bins.push_back(bin);
    }

    // Weighted straight line over well-populated bins within two standard deviations.
    std::vector<double> x, y1, e1, y2, e2;
    for (const auto& bin : out.bins) {
        if (std::abs(bin.center - out.s1_mean) > 2.0 * out.s1_sd || bin.count < 30) continue;
        x.push_back(bin.s1_mean);
        y1.push_back(bin.r1.mean);
        e1.push_back(bin.r1.se);
        y2.push_back(bin.r2.mean);
        e2.push_back(bin.r2.se);
    }
    if (x.size() < 3) throw NumericalError("binning error: fewer than 3 populated central bins");
    out.slope_r1 = weighted_line_slope(x, y1, e1);
    out.slope_r2 = weighted_line_slope(x, y2, e2);

    // Local parabola through the three bins nearest the sample mean, evaluated at S1 = 1.
    std::vector<std::size_t> idx(out.bins.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(), [&](auto a, auto b) {
        return std::abs(out.bins[a].center - out.s1_mean) < std::abs(out.bins[b].center - out.s1_mean);
    });
    std::array<double, 3> xs{}, q1{}, q2{}, q0{};
    for (int i = 0; i < 3; ++i) {
        const auto& bin = out.bins[idx[static_cast<std::size_t>(i)]];
        xs[i] = bin.s1_mean;
        q1[i] = bin.r1.mean;
        q2[i] = bin.r2.mean;
        q0[i] = bin.g0;
    }
    const auto [v1, d1] = parabola_at(xs, q1, 1.0);
    const auto [v2, d2] = parabola_at(xs, q2, 1.0);
    const auto [v0, d0] = parabola_at(xs, q0, 1.0);
    out.r1_at_1 = v1;
    out.r2_at_1 = v2;
    out.g_slope_at_1_r1 = d1 / v1;
    out.g_slope_at_1_r2 = d2 / v2;
    out.g0_slope_at_1 = d0 / v0;
    for (auto& bin : out.bins) {
        bin.g_r1 = bin.r1.mean / v1;
        bin.g_r2 = bin.r2.mean / v2;
        bin.g0 /= v0;
    }
    return out;
}

ConditionalCurve conditional_by_trace(const ConditionalConfig& cfg) {
    if (cfg.n_samples < 10000) throw ConfigError("conditional study needs at least 1e4 samples");
    const double gamma = cfg.resolved_gamma();
    const Sampler sampler = stationary_sampler(cfg.n, cfg.nu0, cfg.beta, gamma);
    const StreamKey key{cfg.seed, splitmix64(0xc0d1ULL ^ static_cast<std::uint64_t>(cfg.n * 4 + cfg.beta))};

    // Reduce each spectrum to (S1, R1, R2) inside the parallel loop.
    struct Triple {
        double s1, r1, r2;
    };
    const double base = cfg.base;
    const auto triples = parallel_map<Triple>(cfg.n_samples, cfg.workers, [&](std::int64_t i) {
        const std::vector<double> lam = raw_spectrum_one(sampler, key, i);
        double s1 = 0.0, s2 = 0.0;
        for (double l : lam) {
            s1 += std::max(l, 0.0);
            s2 += l * l;
        }
        std::vector<double> clipped(lam.size());
        std::transform(lam.begin(), lam.end(), clipped.begin(), [](double l) { return std::max(l, 0.0); });
        return Triple{s1, von_neumann(clipped, base), -std::log(s2) / std::log(base)};
    });
    std::vector<double> s1(triples.size()), r1(triples.size()), r2(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        s1[i] = triples[i].s1;
        r1[i] = triples[i].r1;
        r2[i] = triples[i].r2;
    }
    ConditionalCurve out = bin_conditional(s1, r1, r2, cfg.n_bins);
    out.gamma = gamma;
    return out;
}

void write_conditional_csv(std::ostream& out, const ConditionalCurve& curve) {
    out << "S1,width,S1_mean,count,R1,R1_se,R2,R2_se,g_R1,g_R2,g0\n";
    for (const auto& b : curve.bins) {
        out << format_number(b.center) << ',' << format_number(b.width) << ',' << format_number(b.s1_mean) << ','
            << b.count << ','
            << format_number(b.r1.mean) << ',' << format_number(b.r1.se) << ',' << format_number(b.r2.mean) << ','
            << format_number(b.r2.se) << ',' << format_number(b.g_r1) << ',' << format_number(b.g_r2) << ','
            << format_number(b.g0) << '\n';
    }
}

nlohmann::json to_json(const ConditionalCurve& c) {
    nlohmann::json j;
    j["s1_mean"] = c.s1_mean;
    j["s1_sd"] = c.s1_sd;
    j["gamma"] = c.gamma;
    j["slope_R1"] = {{"value", c.slope_r1.value}, {"se", c.slope_r1.se}, {"z", c.slope_r1.z()}};
    j["slope_R2"] = {{"value", c.slope_r2.value}, {"se", c.slope_r2.se}, {"z", c.slope_r2.z()}};
    j["R1_at_1"] = c.r1_at_1;
    j["R2_at_1"] = c.r2_at_1;
    j["g_slope_at_1_R1"] = c.g_slope_at_1_r1;
    j["g_slope_at_1_R2"] = c.g_slope_at_1_r2;
    j["g0_slope_at_1"] = c.g0_slope_at_1;
    j["n_bins"] = c.bins.size();
    return j;
}

std::string to_string(ScalingMeasure m) { return m == ScalingMeasure::R0 ? "R0" : "invS2"; }

ScalingMeasure parse_scaling_measure(const std::string& s) {
    if (s == "R0") return ScalingMeasure::R0;
    if (s == "invS2") return ScalingMeasure::InvS2;
    throw ConfigError("unknown scaling measure '" + s + "' (expected R0 or invS2)");
}

ScalingReport scaling_fit(const ScalingConfig& cfg) {
    if (cfg.n_grid.size() < 4) throw ConfigError("scaling fit needs at least four values of N");
    if (cfg.n_samples < 2) throw ConfigError("scaling fit needs at least 2 samples per N");
    ScalingReport rep;
    rep.measure = cfg.measure;
    for (int n : cfg.n_grid) {
        const VarianceProfile profile = build_profile(cfg.protocol, cfg.params, n, cfg.nu0, cfg.beta);
        const StreamKey key{cfg.seed, point_stream(cfg.protocol, cfg.params, n, cfg.nu0, cfg.beta)};
        const auto samples = measure_batch_parallel(profile_sampler(profile), cfg.n_samples, key, cfg.workers);
        ScalingRow row;
        row.n = n;
        row.n_log2_n = n * std::log2(static_cast<double>(n));
        std::vector<double> v, v_ln;
        for (const auto& m : samples) {
            if (cfg.measure == ScalingMeasure::R0) {
                if (m.r0_floored) {
                    ++row.n_floored;
                    continue;
                }
                v.push_back(m.r0);
                v_ln.push_back(m.r0_ln);
            } else {
                v.push_back(m.inv_s2());
                v_ln.push_back(m.inv_s2());
            }
        }
        row.value = estimate(v);
        row.value_ln = estimate(v_ln);
        row.ratio = row.value.mean / row.n_log2_n;
        rep.rows.push_back(row);
    }

    const double k = static_cast<double>(rep.rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sr = 0;
    for (const auto& r : rep.rows) {
        sx += r.n_log2_n;
        sy += r.value.mean;
        sxx += r.n_log2_n * r.n_log2_n;
        sxy += r.n_log2_n * r.value.mean;
        syy += r.value.mean * r.value.mean;
        sr += r.ratio;
    }
    const double cov = sxy - sx * sy / k, varx = sxx - sx * sx / k, vary = syy - sy * sy / k;
    rep.slope = cov / varx;
    rep.intercept = (sy - rep.slope * sx) / k;
    rep.r_squared = vary > 0.0 ? cov * cov / (varx * vary) : 1.0;
    rep.ratio_mean = sr / k;
    for (const auto& r : rep.rows) rep.ratio_spread = std::max(rep.ratio_spread, std::abs(r.ratio / rep.ratio_mean - 1.0));
    return rep;
}

nlohmann::json to_json(const ScalingReport& r) {
    nlohmann::json j;
    j["measure"] = to_string(r.measure);
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["r_squared"] = r.r_squared;
    j["ratio_mean"] = r.ratio_mean;
    j["ratio_spread"] = r.ratio_spread;
    auto rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json o;
        o["N"] = row.n;
        o["N_log2_N"] = row.n_log2_n;
        o["mean"] = row.value.mean;
        o["se"] = row.value.se;
        if (r.measure == ScalingMeasure::R0) {
            o["mean_ln"] = row.value_ln.mean;
            o["se_ln"] = row.value_ln.se;
            o["n_floored"] = row.n_floored;
        }
        o["ratio"] = row.ratio;
        rows.push_back(o);
    }
    j["rows"] = rows;
    return j;
}

}  // namespace entgrowth
