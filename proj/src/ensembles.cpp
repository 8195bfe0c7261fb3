#include "entgrowth/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "entgrowth/errors.hpp"

namespace entgrowth {

namespace {

void check_shape(int n, int nu0, int beta) {
    if (n < 2) throw ConfigError("N must be >= 2, got " + std::to_string(n));
    if (nu0 < 0) throw ConfigError("nu0 must be >= 0, got " + std::to_string(nu0));
    if (beta != 1 && beta != 2) throw ConfigError("beta must be 1 or 2, got " + std::to_string(beta));
}

void check_positive(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "parameter " << name << " must be positive and finite, got " << v;
        throw ConfigError(os.str());
    }
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::EB: return "EB";
        case Protocol::EP: return "EP";
        case Protocol::EE: return "EE";
        case Protocol::Custom: return "Custom";
    }
    return "Custom";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "EB") return Protocol::EB;
    if (name == "EP") return Protocol::EP;
    if (name == "EE") return Protocol::EE;
    if (name == "Custom") return Protocol::Custom;
    throw ConfigError("unknown protocol '" + std::string(name) + "' (expected EB, EP, EE or Custom)");
}

bool VarianceProfile::has_mean() const {
    return (mean.size() > 0 && (mean.array() != 0.0).any()) ||
           (mean_im.size() > 0 && (mean_im.array() != 0.0).any());
}

void VarianceProfile::validate() const {
    check_shape(n_rows, n_cols - n_rows, beta);
    if (h.rows() != n_rows || h.cols() != n_cols) throw ConfigError("variance matrix has the wrong shape");
    if (mean.rows() != n_rows || mean.cols() != n_cols) throw ConfigError("mean matrix has the wrong shape");
    if (mean_im.size() > 0) {
        if (beta != 2) throw ConfigError("imaginary means require beta = 2");
        if (mean_im.rows() != n_rows || mean_im.cols() != n_cols)
            throw ConfigError("imaginary mean matrix has the wrong shape");
        if (!mean_im.allFinite()) throw ConfigError("imaginary means must be finite");
    }
    if (!h.allFinite() || !mean.allFinite()) throw ConfigError("profile entries must be finite");
    if ((h.array() <= 0.0).any()) throw ConfigError("variances must be strictly positive");
    if (protocol != Protocol::Custom) {
        if ((h.array() > 1.0).any()) throw ConfigError("protocol variances must not exceed 1");
        if (has_mean()) throw ConfigError("protocol profiles have zero mean");
    }
}

VarianceProfile build_profile(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta) {
    check_shape(n, nu0, beta);
    VarianceProfile p;
    p.n_rows = n;
    p.n_cols = n + nu0;
    p.beta = beta;
    p.protocol = protocol;
    p.params = params;
    p.h.resize(n, n + nu0);
    p.mean = Eigen::MatrixXd::Zero(n, n + nu0);

    switch (protocol) {
        case Protocol::EB: {
            check_positive("mu", params.mu);
            const double rest = 1.0 / (1.0 + params.mu);
            p.h.setConstant(rest);
            p.h.col(0).setOnes();
            break;
        }
        case Protocol::EP: {
            check_positive("a", params.a);
            check_positive("b", params.b);
            for (int l = 0; l < p.n_cols; ++l) {
                for (int k = 0; k < n; ++k) {
                    const double kk = k + 1;
                    p.h(k, l) = 1.0 / (1.0 + (kk / params.b) * (static_cast<double>(l) / params.a));
                }
            }
            break;
        }
        case Protocol::EE: {
            check_positive("a", params.a);
            check_positive("b", params.b);
            const double ab = params.a * params.b;
            for (int l = 0; l < p.n_cols; ++l) {
                for (int k = 0; k < n; ++k) {
                    const double v = std::exp(-static_cast<double>(k + 1) * l / ab);
                    p.h(k, l) = std::max(v, kVarianceFloor);
                }
            }
            break;
        }
        case Protocol::Custom:
            throw ConfigError("Custom profiles are built with custom_profile()");
    }
    p.validate();
    return p;
}

VarianceProfile custom_profile(Eigen::MatrixXd h, Eigen::MatrixXd mean, int beta, Eigen::MatrixXd mean_im) {
    VarianceProfile p;
    p.n_rows = static_cast<int>(h.rows());
    p.n_cols = static_cast<int>(h.cols());
    p.beta = beta;
    p.protocol = Protocol::Custom;
    p.h = std::move(h);
    p.mean = mean.size() == 0 ? Eigen::MatrixXd::Zero(p.n_rows, p.n_cols) : std::move(mean);
    p.mean_im = std::move(mean_im);
    p.validate();
    return p;
}

CMatrix sample_c(const VarianceProfile& profile, Rng& rng) {
    std::normal_distribution<double> normal;
    CMatrix c;
    c.beta = profile.beta;
    c.source = to_string(profile.protocol);
    c.re.resize(profile.n_rows, profile.n_cols);
    if (profile.beta == 2) c.im.resize(profile.n_rows, profile.n_cols);
    const bool complex_mean = profile.mean_im.size() > 0;

    for (int l = 0; l < profile.n_cols; ++l) {
        for (int k = 0; k < profile.n_rows; ++k) {
            const double var = profile.h(k, l);
            const double sd = var > kVarianceFloor ? std::sqrt(var) : 0.0;
            // Draw unconditionally so the stream layout does not depend on h.
            c.re(k, l) = profile.mean(k, l) + sd * normal(rng);
            if (profile.beta == 2) {
                const double m = complex_mean ? profile.mean_im(k, l) : 0.0;
                c.im(k, l) = m + sd * normal(rng);
            }
        }
    }
    return c;
}

CMatrix sample_stationary(int n, int nu0, int beta, double gamma, Rng& rng) {
    check_shape(n, nu0, beta);
    check_positive("gamma", gamma);
    std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / (2.0 * gamma)));
    CMatrix c;
    c.beta = beta;
    c.source = "stationary";
    c.re.resize(n, n + nu0);
    if (beta == 2) c.im.resize(n, n + nu0);
    for (int l = 0; l < n + nu0; ++l) {
        for (int k = 0; k < n; ++k) {
            c.re(k, l) = normal(rng);
            if (beta == 2) c.im(k, l) = normal(rng);
        }
    }
    return c;
}

nlohmann::json to_json(const EnsembleConfig& cfg) {
    nlohmann::json j;
    j["protocol"] = to_string(cfg.protocol);
    if (cfg.protocol == Protocol::EB) {
        j["mu"] = cfg.params.mu;
    } else if (cfg.protocol == Protocol::EP || cfg.protocol == Protocol::EE) {
        j["a"] = cfg.params.a;
        j["b"] = cfg.params.b;
    }
    j["N"] = cfg.n;
    j["nu0"] = cfg.nu0;
    j["beta"] = cfg.beta;
    j["gamma"] = cfg.gamma;
    j["seed"] = cfg.seed;
    return j;
}

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

template <typename T>
T optional_key(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? required<T>(j, key) : fallback;
}

}  // namespace

EnsembleConfig ensemble_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("ensemble config must be a JSON object");
    EnsembleConfig cfg;
    cfg.protocol = parse_protocol(required<std::string>(j, "protocol"));
    if (cfg.protocol == Protocol::EB) {
        cfg.params = ProtocolParams::eb(required<double>(j, "mu"));
    } else if (cfg.protocol == Protocol::EP || cfg.protocol == Protocol::EE) {
        const double a = required<double>(j, "a");
        cfg.params = ProtocolParams::ab(a, optional_key<double>(j, "b", a));
    } else {
        throw ConfigError("key 'protocol': Custom profiles cannot be described by a config file");
    }
    cfg.n = required<int>(j, "N");
    cfg.nu0 = optional_key<int>(j, "nu0", 0);
    cfg.beta = optional_key<int>(j, "beta", 1);
    cfg.gamma = optional_key<double>(j, "gamma", 0.25);
    cfg.seed = optional_key<std::uint64_t>(j, "seed", 1);
    if (!(cfg.gamma > 0.0)) throw ConfigError("key 'gamma': must be > 0");
    // Surface parameter-domain errors at load time.
    (void)cfg.profile();
    return cfg;
}

void save_ensemble_config(const std::filesystem::path& path, const EnsembleConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(cfg).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

EnsembleConfig load_ensemble_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return ensemble_config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace entgrowth
