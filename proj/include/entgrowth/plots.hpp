#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace entgrowth {

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> err;  // optional symmetric error bars
    bool line = false;        // polyline instead of markers
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool log_x = false;
    std::vector<Series> series;
};

std::string render_svg(const PlotSpec& spec);

// Renders every figure whose inputs exist in `dir`:
//   sweep.csv (+ fit_R1.json, fit_R2.json)  -> growth.svg
//   scaling_R0.json, scaling_invS2.json     -> scaling.svg
//   conditional.csv                         -> conditional.svg
// Returns the files written; throws IoError when none of the inputs exist.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

}  // namespace entgrowth
