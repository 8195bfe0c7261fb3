#include "entgrowth/complexity.hpp"

#include <cmath>
#include <sstream>

#include "entgrowth/errors.hpp"

namespace entgrowth {

namespace {

void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
}

// ln|1 - 2 gamma h|, rejecting the singular point.
double log_term(double gamma, double h) {
    const double x = 1.0 - 2.0 * gamma * h;
    if (std::abs(x) < 1e-15) {
        std::ostringstream os;
        os << "singular complexity term: 1 - 2*gamma*h = 0 (gamma=" << gamma << ", h=" << h << ")";
        throw ConfigError(os.str());
    }
    // log1p keeps full precision in the separable corner where h is tiny.
    return std::log1p(-2.0 * gamma * h);
}

}  // namespace

ComplexityValue complexity_general(const VarianceProfile& profile, double gamma) {
    check_gamma(gamma);
    profile.validate();
    const bool complex_mean = profile.mean_im.size() > 0;

    long m = 0;
    double sum = 0.0;
    for (int l = 0; l < profile.n_cols; ++l) {
        for (int k = 0; k < profile.n_rows; ++k) {
            for (int s = 0; s < profile.beta; ++s) {
                const double h = profile.h(k, l);
                const double b = s == 0 ? profile.mean(k, l) : (complex_mean ? profile.mean_im(k, l) : 0.0);
                const double lt = log_term(gamma, h);
                ++m;
                if (l > 0) sum += lt;
                if (b != 0.0) {
                    ++m;
                    if (l > 0) sum += std::log(b * b);
                }
            }
        }
    }
    if (m == 0) throw NumericalError("degenerate profile: no nonzero complexity terms");
    ComplexityValue v;
    v.m_count = m;
    v.gamma = gamma;
    v.y = -sum / (2.0 * static_cast<double>(m) * gamma);
    return v;
}

ComplexityValue complexity_closed_form(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta,
                                       double gamma) {
    check_gamma(gamma);
    // Shape and parameter checks are shared with the profile builder.
    if (protocol == Protocol::Custom) throw ConfigError("no closed form for Custom profiles; use complexity_general");
    (void)build_profile(protocol, params, 2, 0, beta);
    if (n < 2 || nu0 < 0) throw ConfigError("invalid matrix shape");

    const long cols = n + nu0;
    const long m = static_cast<long>(beta) * n * cols;
    double sum = 0.0;
    switch (protocol) {
        case Protocol::EB:
            sum = static_cast<double>(n) * static_cast<double>(cols - 1) * log_term(gamma, 1.0 / (1.0 + params.mu));
            break;
        case Protocol::EP: {
            const double ab = params.a * params.b;
            for (long r1 = 1; r1 < cols; ++r1)
                for (long r2 = 1; r2 <= n; ++r2) sum += log_term(gamma, 1.0 / (1.0 + r1 * r2 / ab));
            break;
        }
        case Protocol::EE: {
            const double ab = params.a * params.b;
            for (long r1 = 1; r1 < cols; ++r1)
                for (long r2 = 1; r2 <= n; ++r2) sum += log_term(gamma, std::exp(-static_cast<double>(r1 * r2) / ab));
            break;
        }
        case Protocol::Custom:
            break;
    }
    // Both real components of a complex entry contribute the same term.
    sum *= beta;
    ComplexityValue v;
    v.m_count = m;
    v.gamma = gamma;
    v.y = -sum / (2.0 * static_cast<double>(m) * gamma);
    return v;
}

std::vector<ComplexityValue> y_grid(Protocol protocol, std::span<const ProtocolParams> grid, int n, int nu0,
                                    int beta, double gamma) {
    if (grid.empty()) throw ConfigError("parameter grid is empty");
    std::vector<ComplexityValue> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            out.push_back(complexity_closed_form(protocol, grid[i], n, nu0, beta, gamma));
        } catch (const ConfigError& e) {
            throw ConfigError("grid point " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace entgrowth
