// entgrowth command line front end.
//
//   entgrowth [--out DIR] [--workers N] <subcommand> [options]
//   entgrowth [--out DIR] --manifest DIR/<subcommand>.manifest.json
//
// Every successful run writes <subcommand>.manifest.json next to its outputs;
// feeding it back through --manifest repeats the run with the same resolved
// options. Exit codes: 0 ok, 2 configuration, 3 numerical, 4 i/o.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "entgrowth/complexity.hpp"
#include "entgrowth/dynamics.hpp"
#include "entgrowth/errors.hpp"
#include "entgrowth/fit.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/kernels.hpp"
#include "entgrowth/plots.hpp"
#include "entgrowth/schmidt.hpp"
#include "entgrowth/stats.hpp"
#include "entgrowth/theory.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace entgrowth;
using nlohmann::json;

namespace {

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw ConfigError(std::string(what) + ": '" + cell + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(what) + " is empty");
    return out;
}

std::vector<double> logspace(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw ConfigError("grid bounds must be positive");
    if (points < 1) throw ConfigError("grid needs at least one point");
    std::vector<double> out;
    for (int i = 0; i < points; ++i) {
        const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        out.push_back(lo * std::pow(hi / lo, f));
    }
    return out;
}

// Files written by the current run, removed again if the run fails.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    const fs::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& content) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        const fs::path p = dir_ / name;
        write_text_atomic(p, content);
        written_.push_back(p);
    }

    void track(const std::vector<fs::path>& files) { written_.insert(written_.end(), files.begin(), files.end()); }

    void rollback() {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

struct EnsembleOpts {
    std::string protocol = "EB";
    double mu = 1.0, a = 1.0, b = 0.0;  // b <= 0 means b = a
    int n = 64, nu0 = 0, beta = 1;
    double gamma = 0.25;
    std::uint64_t seed = 1;
    std::string config;
};

struct State {
    std::string out;
    int workers = 1;
    std::string manifest;

    EnsembleOpts ens;
    int samples = 200;
    bool spectra = false;
    std::string y_from = "closed";
    std::string grid;
    double grid_lo = 0.0, grid_hi = 0.0;
    int points = 12;
    int paths = 1000;
    std::string checkpoints = "0.05,0.1,0.2,0.4,0.8";
    double v2 = 0.25;
    bool with_direct = false;
    int bins = 24;
    std::string input;
    std::string measure;
    std::string n_grid = "32,64,128,256";

    std::set<std::string> flags;  // options without a value
    std::vector<std::pair<std::string, std::string>> resolved;  // values fixed during the run
    CLI::App* chosen = nullptr;
};

void add_ensemble(CLI::App* sub, State& st, bool with_params) {
    auto& e = st.ens;
    sub->add_option("--config", e.config, "ensemble JSON (protocol, mu|a|b, N, nu0, beta, gamma, seed); flags override");
    sub->add_option("--protocol", e.protocol, "EB, EP or EE")->check(CLI::IsMember({"EB", "EP", "EE"}));
    if (with_params) {
        sub->add_option("--mu", e.mu, "EB parameter");
        sub->add_option("--a", e.a, "EP/EE parameter a");
        sub->add_option("--b", e.b, "EP/EE parameter b (default: a)");
    }
    sub->add_option("--N", e.n, "rows of C")->check(CLI::Range(2, 1 << 16));
    sub->add_option("--nu0", e.nu0, "extra columns of C")->check(CLI::NonNegativeNumber);
    sub->add_option("--beta", e.beta, "1 real, 2 complex")->check(CLI::IsMember({1, 2}));
    sub->add_option("--gamma", e.gamma, "confinement")->check(CLI::PositiveNumber);
    sub->add_option("--seed", e.seed, "master seed");
}

EnsembleConfig resolve_ensemble(const State& st) {
    const auto* sub = st.chosen;
    const auto& e = st.ens;
    EnsembleConfig cfg;
    if (!e.config.empty()) cfg = load_ensemble_config(e.config);
    auto given = [&](const char* name) {
        const auto* opt = sub->get_option_no_throw(name);
        return opt != nullptr && (e.config.empty() || opt->count() > 0);
    };
    if (given("--protocol")) cfg.protocol = parse_protocol(e.protocol);
    const bool from_file = !e.config.empty();
    if (cfg.protocol == Protocol::EB) {
        const double mu = given("--mu") || !(from_file && cfg.params.mu > 0.0) ? e.mu : cfg.params.mu;
        cfg.params = ProtocolParams::eb(mu);
    } else {
        const bool ga = given("--a");
        const double a = ga || !(from_file && cfg.params.a > 0.0) ? e.a : cfg.params.a;
        double b = a;
        if (given("--b") && e.b > 0.0)
            b = e.b;
        else if (from_file && !ga && cfg.params.b > 0.0)
            b = cfg.params.b;
        cfg.params = ProtocolParams::ab(a, b);
    }
    if (given("--N")) cfg.n = e.n;
    if (given("--nu0")) cfg.nu0 = e.nu0;
    if (given("--beta")) cfg.beta = e.beta;
    if (given("--gamma")) cfg.gamma = e.gamma;
    if (given("--seed")) cfg.seed = e.seed;
    return cfg;
}

// Resolved option list of the chosen subcommand, in declaration order.
std::vector<std::pair<std::string, std::string>> resolved_options(const State& st, const EnsembleConfig* ens) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto* opt : st.chosen->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = "--" + opt->get_lnames().front();
        if (name == "--help" || name == "--config") continue;
        if (st.flags.count(name)) {
            if (opt->count() > 0) out.emplace_back(name, "");
            continue;
        }
        std::string v = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
        if (v.empty()) continue;
        out.emplace_back(name, v);
    }
    auto set = [&](const std::string& name, const std::string& v) {
        for (auto& kv : out)
            if (kv.first == name) {
                kv.second = v;
                return;
            }
        out.emplace_back(name, v);
    };
    for (const auto& [k, v] : st.resolved) set(k, v);
    if (ens != nullptr) {
        set("--protocol", to_string(ens->protocol));
        if (st.chosen->get_option_no_throw("--mu") != nullptr) {
            set("--mu", exact(ens->protocol == Protocol::EB ? ens->params.mu : 1.0));
            set("--a", exact(ens->protocol == Protocol::EB ? 1.0 : ens->params.a));
            set("--b", exact(ens->protocol == Protocol::EB ? 0.0 : ens->params.b));
        }
        set("--N", std::to_string(ens->n));
        set("--nu0", std::to_string(ens->nu0));
        set("--beta", std::to_string(ens->beta));
        set("--gamma", exact(ens->gamma));
        set("--seed", std::to_string(ens->seed));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_manifest(Outputs& out, const State& st, const EnsembleConfig* ens) {
    json m;
    m["tool"] = "entgrowth";
    m["version"] = ENTGROWTH_VERSION;
    m["subcommand"] = st.chosen->get_name();
    m["workers"] = st.workers;
    json args = json::array({st.chosen->get_name()});
    json config = json::object();
    for (const auto& [k, v] : resolved_options(st, ens)) {
        args.push_back(k);
        if (!v.empty()) args.push_back(v);
        config[k.substr(2)] = v.empty() ? json(true) : json(v);
    }
    m["args"] = args;
    m["config"] = config;
    out.write(st.chosen->get_name() + ".manifest.json", m.dump(2) + "\n");
}

double y_of(const EnsembleConfig& cfg, const std::string& y_from) {
    if (y_from == "general") return complexity_general(cfg.profile(), cfg.gamma).y;
    return complexity_closed_form(cfg.protocol, cfg.params, cfg.n, cfg.nu0, cfg.beta, cfg.gamma).y;
}

void run_sample(State& st, Outputs& out) {
    const EnsembleConfig cfg = resolve_ensemble(st);
    if (st.samples < 1) throw ConfigError("--samples must be >= 1");
    const VarianceProfile profile = cfg.profile();
    const double y = y_of(cfg, st.y_from);
    const Sampler sampler = profile_sampler(profile);
    const StreamKey key{cfg.seed, point_stream(cfg.protocol, cfg.params, cfg.n, cfg.nu0, cfg.beta)};
    const auto spectra = parallel_map<Spectrum>(st.samples, st.workers, [&](std::int64_t i) {
        Rng rng = make_stream(key.seed, key.major, static_cast<std::uint64_t>(i));
        return spectrum(reduce(sampler(rng)), i);
    });

    std::ostringstream csv, raw;
    csv << "index,R1,R2,Rinf,R0,S2,S3\n";
    std::vector<MeasureSet> measures;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const MeasureSet m = measure_all(spectra[i].values);
        measures.push_back(m);
        csv << i << ',' << format_number(m.r1, 12) << ',' << format_number(m.r2, 12) << ','
            << format_number(m.r_inf, 12) << ',' << format_number(m.r0, 12) << ',' << format_number(m.s2, 12) << ','
            << format_number(m.s3, 12) << '\n';
    }
    out.write("samples.csv", csv.str());
    if (st.spectra) {
        raw << "index";
        for (int k = 1; k <= cfg.n; ++k) raw << ",lambda_" << k;
        raw << '\n';
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            raw << i;
            for (double v : spectra[i].values) raw << ',' << format_number(v, 17);
            raw << '\n';
        }
        out.write("spectra.csv", raw.str());
    }
    const SweepPoint agg = aggregate(measures);
    json s = to_json(cfg);
    s["Y"] = y;
    s["y_from"] = st.y_from;
    s["samples"] = st.samples;
    s["R1"] = {agg.r1.mean, agg.r1.se};
    s["R2"] = {agg.r2.mean, agg.r2.se};
    s["Rinf"] = {agg.r_inf.mean, agg.r_inf.se};
    s["R0"] = {agg.r0.mean, agg.r0.se};
    s["n_floored"] = agg.n_floored;
    s["ordering_violations"] = agg.ordering_violations;
    out.write("sample.json", s.dump(2) + "\n");
    write_manifest(out, st, &cfg);
    std::cout << "Y=" << format_number(y, 12) << " <R1>=" << format_number(agg.r1.mean, 6) << " +- "
              << format_number(agg.r1.se, 3) << " bits, " << st.samples << " samples\n";
}

void run_sweep(State& st, Outputs& out) {
    const EnsembleConfig cfg = resolve_ensemble(st);
    SweepConfig sc;
    sc.protocol = cfg.protocol;
    sc.n = cfg.n;
    sc.nu0 = cfg.nu0;
    sc.beta = cfg.beta;
    sc.gamma = cfg.gamma;
    sc.seed = cfg.seed;
    sc.n_samples = st.samples;
    sc.workers = st.workers;
    sc.y_from_general = st.y_from == "general";
    std::vector<double> values;
    if (!st.grid.empty()) {
        values = parse_doubles(st.grid, "--grid");
    } else {
        const bool eb = cfg.protocol == Protocol::EB;
        // EE variances underflow for a b below ~1e-3, so its default grid starts higher.
        const double lo = st.grid_lo > 0.0 ? st.grid_lo : (eb ? 1e6 : cfg.protocol == Protocol::EE ? 0.1 : 1e-3);
        const double hi = st.grid_hi > 0.0 ? st.grid_hi : (eb ? 1e-3 : 1e2);
        values = logspace(lo, hi, st.points);
    }
    std::string joined;
    for (double v : values) joined += (joined.empty() ? "" : ",") + exact(v);
    st.resolved.emplace_back("--grid", joined);
    for (double v : values)
        sc.grid.push_back(cfg.protocol == Protocol::EB ? ProtocolParams::eb(v) : ProtocolParams::ab(v));
    const SweepCurve curve = sweep(sc);
    std::ostringstream csv;
    write_sweep_csv(csv, curve);
    out.write("sweep.csv", csv.str());
    long violations = 0;
    for (const auto& p : curve.points) violations += p.ordering_violations;
    json s = to_json(cfg);
    s["points"] = curve.points.size();
    s["samples"] = st.samples;
    s["y_from"] = st.y_from;
    s["ordering_violations"] = violations;
    out.write("sweep.json", s.dump(2) + "\n");
    write_manifest(out, st, &cfg);
    std::cout << "sweep: " << curve.points.size() << " points, Y in [" << format_number(curve.points.front().y, 4)
              << ", " << format_number(curve.points.back().y, 4) << "], ordering violations " << violations << '\n';
    if (violations > 0) throw NumericalError("Renyi ordering violated on " + std::to_string(violations) + " samples");
}

void run_paths(State& st, Outputs& out, Route route) {
    const EnsembleConfig cfg = resolve_ensemble(st);
    TrajectoryConfig tc;
    tc.protocol = cfg.protocol;
    tc.params = cfg.params;
    tc.n = cfg.n;
    tc.nu0 = cfg.nu0;
    tc.beta = cfg.beta;
    tc.gamma = cfg.gamma;
    tc.v2 = st.v2;
    tc.checkpoints = parse_doubles(st.checkpoints, "--checkpoints");
    tc.n_paths = st.paths;
    tc.seed = cfg.seed;
    tc.workers = st.workers;
    std::vector<Route> routes{route};
    if (st.with_direct) routes.push_back(Route::Direct);
    std::ostringstream summary;
    summary << "route,Y,S2,S2_se,S3,S3_se\n";
    for (Route r : routes) {
        const auto rows = run_trajectories(tc, r);
        std::ostringstream csv;
        write_trajectory_csv(csv, rows);
        out.write(to_string(r) + ".csv", csv.str());
        for (const auto& c : summarize(rows))
            summary << to_string(r) << ',' << format_number(c.y, 12) << ',' << format_number(c.s2.mean) << ','
                    << format_number(c.s2.se) << ',' << format_number(c.s3.mean) << ',' << format_number(c.s3.se)
                    << '\n';
    }
    out.write(to_string(route) + "_summary.csv", summary.str());
    write_manifest(out, st, &cfg);
    std::cout << summary.str();
}

void run_conditional(State& st, Outputs& out) {
    ConditionalConfig cc;
    cc.n = st.ens.n;
    cc.nu0 = st.ens.nu0;
    cc.beta = st.ens.beta;
    cc.gamma = st.ens.gamma;
    cc.n_samples = st.samples;
    cc.n_bins = st.bins;
    cc.seed = st.ens.seed;
    cc.workers = st.workers;
    const ConditionalCurve curve = conditional_by_trace(cc);
    std::ostringstream csv;
    write_conditional_csv(csv, curve);
    out.write("conditional.csv", csv.str());
    json j = to_json(curve);
    j["N"] = cc.n;
    j["nu0"] = cc.nu0;
    j["beta"] = cc.beta;
    j["samples"] = cc.n_samples;
    out.write("conditional.json", j.dump(2) + "\n");
    write_manifest(out, st, nullptr);
    std::cout << "slope R1|S1 " << format_number(curve.slope_r1.value, 4) << " (z=" << format_number(curve.slope_r1.z(), 3)
              << "), slope R2|S1 " << format_number(curve.slope_r2.value, 4)
              << " (z=" << format_number(curve.slope_r2.z(), 3) << ")\n";
}

void run_fit(State& st, Outputs& out) {
    const fs::path input = st.input.empty() ? out.dir() / "sweep.csv" : fs::path(st.input);
    const SweepCurve curve = read_sweep_csv(input);
    const GrowthMeasure m = parse_growth_measure(st.measure.empty() ? "R1" : st.measure);
    const FitResult f = fit_growth(curve, m);
    json j = to_json(f);
    j["measure"] = to_string(m);
    j["input"] = input.string();
    j["tracking_fraction_2se"] = tracking_fraction(curve, m, f, 2.0);
    out.write("fit_" + to_string(m) + ".json", j.dump(2) + "\n");
    write_manifest(out, st, nullptr);
    std::cout << "A=" << format_number(f.params.a, 6) << " b1=" << format_number(f.params.b1, 6)
              << " b2=" << format_number(f.params.b2, 6) << " d=" << format_number(f.params.d, 6)
              << (f.degenerate ? " (degenerate)" : "") << '\n';
}

void run_scaling(State& st, Outputs& out) {
    EnsembleConfig cfg = resolve_ensemble(st);
    ScalingConfig sc;
    sc.measure = parse_scaling_measure(st.measure.empty() ? "R0" : st.measure);
    sc.n_grid.clear();
    for (double v : parse_doubles(st.n_grid, "--N-grid")) {
        if (v != std::floor(v) || v < 2) throw ConfigError("--N-grid entries must be integers >= 2");
        sc.n_grid.push_back(static_cast<int>(v));
    }
    sc.protocol = cfg.protocol;
    sc.params = cfg.params;
    sc.nu0 = cfg.nu0;
    sc.beta = cfg.beta;
    sc.gamma = cfg.gamma;
    sc.n_samples = st.samples;
    sc.seed = cfg.seed;
    sc.workers = st.workers;
    const ScalingReport rep = scaling_fit(sc);
    const std::string tag = to_string(sc.measure);
    std::ostringstream csv;
    csv << "N,N_log2_N,mean,se,ratio\n";
    for (const auto& r : rep.rows)
        csv << r.n << ',' << format_number(r.n_log2_n) << ',' << format_number(r.value.mean) << ','
            << format_number(r.value.se) << ',' << format_number(r.ratio) << '\n';
    out.write("scaling_" + tag + ".csv", csv.str());
    out.write("scaling_" + tag + ".json", to_json(rep).dump(2) + "\n");
    write_manifest(out, st, &cfg);
    std::cout << tag << ": ratio spread " << format_number(rep.ratio_spread, 4) << ", R^2 "
              << format_number(rep.r_squared, 6) << '\n';
}

void run_report(State& st, Outputs& out) {
    const fs::path dir = out.dir();
    if (fs::exists(dir / "sweep.csv") && fs::exists(dir / "conditional.json")) {
        const SweepCurve curve = read_sweep_csv(dir / "sweep.csv");
        const json cond = read_json(dir / "conditional.json");
        const SweepPoint& deep = curve.points.back();
        if (cond.value("N", 0) == deep.n && cond.value("beta", 0) == deep.beta) {
            TheoryInputs in;
            in.n = deep.n;
            in.beta = deep.beta;
            in.nu0 = cond.value("nu0", 0);
            in.r0_bar = deep.r0.mean;
            in.inv_s2_bar = deep.inv_s2.mean;
            in.g1_slope_r1 = cond.at("g_slope_at_1_R1").get<double>();
            in.g1_slope_r2 = cond.at("g_slope_at_1_R2").get<double>();
            std::vector<double> ys;
            for (const auto& p : curve.points) ys.push_back(p.y);
            const TheoryCurve r1 = predict_r1(in, ys), r2 = predict_r2(in, ys);
            std::ostringstream csv;
            write_theory_csv(csv, in, deep.protocol, r1, r2);
            out.write("theory.csv", csv.str());
            std::cout << "theory: saturation R1 " << format_number(r1.saturation, 4) << ", R2 "
                      << format_number(r2.saturation, 4) << " (measured deep-Y R1 " << format_number(deep.r1.mean, 4)
                      << ", R2 " << format_number(deep.r2.mean, 4) << ")\n";
        } else {
            std::cout << "theory: skipped, sweep and conditional study use different N or beta\n";
        }
    }
    const auto plots = emit_plots(dir);
    out.track(plots);
    write_manifest(out, st, nullptr);
    for (const auto& p : plots) std::cout << "wrote " << p.string() << '\n';
}

std::unique_ptr<CLI::App> build_app(State& st) {
    auto app = std::make_unique<CLI::App>("Random-matrix Monte Carlo for entanglement growth", "entgrowth");
    app->option_defaults()->always_capture_default();
    const char* env = std::getenv("ENTGROWTH_OUT");
    st.out = env != nullptr && *env != '\0' ? env : "entgrowth_out";
    st.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app->add_option("--out", st.out, "output directory (default: $ENTGROWTH_OUT or ./entgrowth_out)");
    app->add_option("--workers", st.workers, "OpenMP threads; never changes results")->check(CLI::PositiveNumber);
    app->add_option("--manifest", st.manifest, "rerun from a manifest written by an earlier run");
    app->require_subcommand(0, 1);

    auto flag = [&](CLI::App* sub, const std::string& name, bool& target, const std::string& help) {
        sub->add_flag(name, target, help);
        st.flags.insert(name);
    };
    auto y_from = [&](CLI::App* sub) {
        sub->add_option("--y-from", st.y_from, "complexity code path")->check(CLI::IsMember({"general", "closed"}));
    };

    auto* sample = app->add_subcommand("sample", "sample one ensemble point and write per-sample measures");
    add_ensemble(sample, st, true);
    sample->add_option("--samples", st.samples)->check(CLI::PositiveNumber);
    y_from(sample);
    flag(sample, "--spectra", st.spectra, "also write the Schmidt spectra");

    auto* sw = app->add_subcommand("sweep", "ensemble averages over a parameter grid");
    add_ensemble(sw, st, false);
    sw->add_option("--samples", st.samples)->check(CLI::Range(2, 1 << 30));
    sw->add_option("--grid", st.grid, "comma-separated mu (EB) or a=b (EP/EE) values");
    sw->add_option("--grid-lo", st.grid_lo, "first value of a log-spaced grid");
    sw->add_option("--grid-hi", st.grid_hi, "last value of a log-spaced grid");
    sw->add_option("--points", st.points, "points of the log-spaced grid")->check(CLI::PositiveNumber);
    y_from(sw);

    for (const char* name : {"langevin", "dyson"}) {
        auto* sub = app->add_subcommand(name, std::string(name) == "dyson" ? "eigenvalue diffusion trajectories"
                                                                          : "matrix Langevin trajectories");
        add_ensemble(sub, st, true);
        sub->add_option("--paths", st.paths)->check(CLI::PositiveNumber);
        sub->add_option("--checkpoints", st.checkpoints, "comma-separated Y increments");
        sub->add_option("--v2", st.v2, "perturbation variance")->check(CLI::PositiveNumber);
        flag(sub, "--with-direct", st.with_direct, "also sample the evolved ensemble directly");
    }

    auto* cond = app->add_subcommand("conditional", "trace-conditioned entropies of stationary Wishart spectra");
    cond->add_option("--N", st.ens.n)->check(CLI::Range(2, 1 << 16));
    cond->add_option("--nu0", st.ens.nu0)->check(CLI::NonNegativeNumber);
    cond->add_option("--beta", st.ens.beta)->check(CLI::IsMember({1, 2}));
    cond->add_option("--gamma", st.ens.gamma, "0 centers Tr C C^dagger at 1")->check(CLI::NonNegativeNumber);
    cond->add_option("--samples", st.samples)->check(CLI::Range(10000, 1 << 30));
    cond->add_option("--bins", st.bins)->check(CLI::Range(3, 100000));
    cond->add_option("--seed", st.ens.seed);

    auto* fit = app->add_subcommand("fit", "fit the saturating growth model to a sweep");
    fit->add_option("--input", st.input, "sweep CSV (default: <out>/sweep.csv)");
    fit->add_option("--measure", st.measure, "R1 or R2")->check(CLI::IsMember({"R1", "R2"}));

    auto* sc = app->add_subcommand("scaling", "deep-Y averages against N log2 N");
    add_ensemble(sc, st, true);
    sc->add_option("--measure", st.measure, "R0 or invS2")->check(CLI::IsMember({"R0", "invS2"}));
    sc->add_option("--N-grid", st.n_grid, "comma-separated N values");
    sc->add_option("--samples", st.samples)->check(CLI::Range(2, 1 << 30));

    app->add_subcommand("report", "plots of the artifacts in --out, plus theory curves when possible");
    return app;
}

void set_defaults_for(const std::string& sub, State& st) {
    if (sub == "langevin" || sub == "dyson") {
        st.ens.mu = 20.0;
        st.ens.n = 8;
    } else if (sub == "scaling") {
        st.ens.protocol = "EE";
        st.ens.a = 1e4;
    } else if (sub == "conditional") {
        st.ens.gamma = 0.0;
        st.samples = 50000;
    }
}

int dispatch(State& st) {
    Outputs out(st.out);
    try {
        const std::string name = st.chosen->get_name();
        if (name == "sample") run_sample(st, out);
        else if (name == "sweep") run_sweep(st, out);
        else if (name == "langevin") run_paths(st, out, Route::Langevin);
        else if (name == "dyson") run_paths(st, out, Route::Dyson);
        else if (name == "conditional") run_conditional(st, out);
        else if (name == "fit") run_fit(st, out);
        else if (name == "scaling") run_scaling(st, out);
        else if (name == "report") run_report(st, out);
        return 0;
    } catch (...) {
        out.rollback();
        throw;
    }
}

// Parses argv once to find the subcommand, then again with its defaults.
int parse_and_run(const std::vector<std::string>& args) {
    std::string sub;
    for (const auto& a : args)
        if (a == "sample" || a == "sweep" || a == "langevin" || a == "dyson" || a == "conditional" || a == "fit" ||
            a == "scaling" || a == "report") {
            sub = a;
            break;
        }
    State st;
    set_defaults_for(sub, st);
    auto app = build_app(st);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app->parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app->exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::config);
    }
    if (!st.manifest.empty()) {
        if (!sub.empty()) throw ConfigError("--manifest cannot be combined with a subcommand");
        const json m = read_json(st.manifest);
        std::vector<std::string> again;
        if (app->get_option("--out")->count() > 0) again.insert(again.end(), {"--out", st.out});
        if (app->get_option("--workers")->count() > 0)
            again.insert(again.end(), {"--workers", std::to_string(st.workers)});
        try {
            for (const auto& a : m.at("args")) again.push_back(a.get<std::string>());
        } catch (const json::exception& e) {
            throw ConfigError(st.manifest + ": " + e.what());
        }
        return parse_and_run(again);
    }
    for (auto* s : app->get_subcommands()) st.chosen = s;
    if (st.chosen == nullptr) {
        std::cerr << app->help();
        return static_cast<int>(ExitCode::config);
    }
    return dispatch(st);
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return parse_and_run(args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numerical);
    }
}
