#include "entgrowth/measures.hpp"

#include <algorithm>
#include <cmath>

#include "entgrowth/errors.hpp"

namespace entgrowth {

namespace {

void check_base(double base) {
    if (!(base > 1.0)) throw ConfigError("log base must be > 1");
}

}  // namespace

double renyi(std::span<const double> lambdas, double alpha, double base) {
    check_base(base);
    if (!(alpha > 0.0)) throw ConfigError("Renyi order must be positive");
    if (alpha == 1.0) throw ConfigError("Renyi order 1 is the von Neumann entropy; use von_neumann()");
    double sum = 0.0;
    for (double l : lambdas)
        if (l > 0.0) sum += std::pow(l, alpha);
    return std::log(sum) / ((1.0 - alpha) * std::log(base));
}

double von_neumann(std::span<const double> lambdas, double base) {
    check_base(base);
    double s = 0.0;
    for (double l : lambdas)
        if (l > 0.0) s -= l * std::log(l);
    return s / std::log(base);
}

double min_entropy(std::span<const double> lambdas, double base) {
    check_base(base);
    if (lambdas.empty()) throw ConfigError("empty spectrum");
    return -std::log(*std::max_element(lambdas.begin(), lambdas.end())) / std::log(base);
}

LogSum log_sum_r0(std::span<const double> lambdas, double floor, double base) {
    check_base(base);
    if (!(floor > 0.0)) throw ConfigError("R0 floor must be positive");
    LogSum out;
    for (double l : lambdas) {
        if (l < floor) out.floored = true;
        out.value -= std::log(std::max(l, floor));
    }
    out.value /= std::log(base);
    return out;
}

std::vector<double> power_sums(std::span<const double> lambdas, int k_max) {
    if (k_max < 2) throw ConfigError("k_max must be >= 2");
    std::vector<double> s(static_cast<std::size_t>(k_max), 0.0);
    for (double l : lambdas) {
        double p = l;
        for (int k = 0; k < k_max; ++k) {
            s[static_cast<std::size_t>(k)] += p;
            p *= l;
        }
    }
    return s;
}

MeasureSet measure_all(std::span<const double> lambdas, double base, double r0_floor) {
    check_base(base);
    if (lambdas.empty()) throw ConfigError("empty spectrum");
    const double ln_b = std::log(base);

    double total = 0.0;
    for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) total += *it;
    if (!(total > 0.0)) throw NumericalError("spectrum has zero trace");

    // Tail mass and tail power sums, accumulated from the smallest values up.
    double tail = 0.0, tail_sq = 0.0, tail_cube = 0.0, tail_ent = 0.0;
    for (std::size_t i = lambdas.size(); i-- > 1;) {
        const double p = lambdas[i] / total;
        if (p <= 0.0) continue;
        tail += p;
        tail_sq += p * p;
        tail_cube += p * p * p;
        tail_ent -= p * std::log(p);
    }
    tail = std::min(tail, 1.0);
    const double head = 1.0 - tail;
    const double log_head = std::log1p(-tail);

    MeasureSet m;
    m.r_inf = -log_head / ln_b;
    // 1 - S2 = 1 - head^2 - tail_sq = tail (2 - tail) - tail_sq
    const double one_minus_s2 = tail * (2.0 - tail) - tail_sq;
    m.s2 = 1.0 - one_minus_s2;
    m.r2 = -std::log1p(-one_minus_s2) / ln_b;
    m.r1 = (tail_ent - (head > 0.0 ? head * log_head : 0.0)) / ln_b;
    m.s3 = head * head * head + tail_cube;

    double r0 = 0.0;
    for (double l : lambdas) {
        const double p = l / total;
        if (p < r0_floor) m.r0_floored = true;
        r0 -= std::log(std::max(p, r0_floor));
    }
    m.r0_ln = r0;
    m.r0 = r0 / ln_b;
    return m;
}

}  // namespace entgrowth
