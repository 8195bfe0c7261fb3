#include "entgrowth/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "entgrowth/errors.hpp"
#include "entgrowth/fit.hpp"
#include "entgrowth/io.hpp"
#include "entgrowth/stats.hpp"

namespace entgrowth {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += ch;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(hi > lo)) {
            const double d = std::abs(lo) > 0 ? 0.1 * std::abs(lo) : 1.0;
            lo -= d;
            hi += d;
            return;
        }
        const double d = 0.05 * (hi - lo);
        lo -= d;
        hi += d;
    }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    Range xr, yr;
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            xr.add(tx(s.x[i]));
            const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
            yr.add(s.y[i] - e);
            yr.add(s.y[i] + e);
        }
    }
    if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) throw IoError("plot '" + spec.title + "' has no finite data");
    xr.pad();
    yr.pad();
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (tx(x) - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o.precision(5);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
      << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const double sx = kLeft + pw * i / 4.0, sy = kTop + ph - ph * i / 4.0;
        std::ostringstream lx;
        lx.precision(3);
        lx << (spec.log_x ? std::pow(10.0, fx) : fx);
        o << "<text x=\"" << sx << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << lx.str()
          << "</text>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << format_number(fy, 3)
          << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(spec.xlabel) << (spec.log_x ? " (log scale)" : "") << "</text>\n";
    o << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.ylabel) << "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        if (s.line) {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if ((spec.log_x && !(s.x[i] > 0.0)) || !std::isfinite(s.y[i])) continue;
                o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            o << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if ((spec.log_x && !(s.x[i] > 0.0)) || !std::isfinite(s.y[i])) continue;
                const double cx = px(s.x[i]), cy = py(s.y[i]);
                if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0.0)
                    o << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << py(s.y[i] - s.err[i]) << "\" y2=\""
                      << py(s.y[i] + s.err[i]) << "\" stroke=\"" << color << "\"/>\n";
                o << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            }
        }
        const double ly = kTop + 14 + 16 * static_cast<double>(k);
        o << "<rect x=\"" << kLeft + 10 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
          << "\"/>\n";
        o << "<text x=\"" << kLeft + 26 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

namespace {

Series fit_series(const std::filesystem::path& path, const std::string& label, double ylo, double yhi, bool log_x) {
    const auto j = read_json(path);
    GrowthParams p;
    try {
        p = {j.at("A").get<double>(), j.at("b1").get<double>(), j.at("b2").get<double>(), j.at("d").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    Series s;
    s.label = label;
    s.line = true;
    constexpr int kPoints = 200;
    for (int i = 0; i < kPoints; ++i) {
        const double f = static_cast<double>(i) / (kPoints - 1);
        const double y = log_x ? ylo * std::pow(yhi / ylo, f) : ylo + (yhi - ylo) * f;
        s.x.push_back(y);
        s.y.push_back(growth_model(p, y));
    }
    return s;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("artifact directory " + dir.string() + " does not exist");
    std::vector<fs::path> written;

    if (fs::exists(dir / "sweep.csv")) {
        const SweepCurve curve = read_sweep_csv(dir / "sweep.csv");
        PlotSpec spec;
        spec.title = "Entropy growth, N=" + std::to_string(curve.points.front().n) +
                     ", beta=" + std::to_string(curve.points.front().beta);
        spec.xlabel = "Y";
        spec.ylabel = "<R> (bits)";
        const double ylo = curve.points.front().y, yhi = curve.points.back().y;
        spec.log_x = ylo > 0.0 && yhi / ylo > 100.0;
        Series r1{"<R1>", {}, {}, {}, false}, r2{"<R2>", {}, {}, {}, false};
        for (const auto& p : curve.points) {
            r1.x.push_back(p.y);
            r1.y.push_back(p.r1.mean);
            r1.err.push_back(p.r1.se);
            r2.x.push_back(p.y);
            r2.y.push_back(p.r2.mean);
            r2.err.push_back(p.r2.se);
        }
        spec.series = {r1, r2};
        for (const char* m : {"R1", "R2"}) {
            const fs::path f = dir / (std::string("fit_") + m + ".json");
            if (fs::exists(f)) spec.series.push_back(fit_series(f, std::string("fit ") + m, ylo, yhi, spec.log_x));
        }
        write_text_atomic(dir / "growth.svg", render_svg(spec));
        written.push_back(dir / "growth.svg");
    }

    PlotSpec scaling;
    scaling.title = "Deep-Y scaling";
    scaling.xlabel = "N log2 N";
    scaling.ylabel = "ensemble average";
    for (const char* m : {"R0", "invS2"}) {
        const fs::path f = dir / (std::string("scaling_") + m + ".json");
        if (!fs::exists(f)) continue;
        const auto j = read_json(f);
        Series pts{std::string("<") + m + ">", {}, {}, {}, false}, line{std::string("linear fit ") + m, {}, {}, {}, true};
        try {
            for (const auto& row : j.at("rows")) {
                pts.x.push_back(row.at("N_log2_N").get<double>());
                pts.y.push_back(row.at("mean").get<double>());
                pts.err.push_back(row.at("se").get<double>());
            }
            const double slope = j.at("slope").get<double>(), icpt = j.at("intercept").get<double>();
            for (double x : pts.x) {
                line.x.push_back(x);
                line.y.push_back(icpt + slope * x);
            }
        } catch (const nlohmann::json::exception& e) {
            throw IoError(f.string() + ": " + e.what());
        }
        scaling.series.push_back(pts);
        scaling.series.push_back(line);
    }
    if (!scaling.series.empty()) {
        write_text_atomic(dir / "scaling.svg", render_svg(scaling));
        written.push_back(dir / "scaling.svg");
    }

    if (fs::exists(dir / "conditional.csv")) {
        const CsvTable t = read_csv(dir / "conditional.csv");
        PlotSpec spec;
        spec.title = "Trace-conditioned entropies";
        spec.xlabel = "S1";
        spec.ylabel = "g(S1)";
        const auto s1 = t.numbers("S1");
        spec.series = {{"g for R1", s1, t.numbers("g_R1"), {}, false},
                       {"g for R2", s1, t.numbers("g_R2"), {}, false},
                       {"g0 (bin mass)", s1, t.numbers("g0"), {}, true}};
        write_text_atomic(dir / "conditional.svg", render_svg(spec));
        written.push_back(dir / "conditional.svg");
    }

    if (written.empty())
        throw IoError("no plottable artifacts in " + dir.string() +
                      " (expected sweep.csv, scaling_R0.json, scaling_invS2.json or conditional.csv)");
    return written;
}

}  // namespace entgrowth
