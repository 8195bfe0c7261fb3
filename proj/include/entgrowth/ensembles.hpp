#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "entgrowth/rng.hpp"
#include "json.hpp"

namespace entgrowth {

// Variance protocols for the coefficient matrix C (rows: subsystem A,
// columns: subsystem B). All three named protocols keep the first column at
// unit variance and push the remaining columns towards zero in the separable
// limit.
//   EB: constant variance 1/(1+mu) on every column but the first.
//   EP: h_kl = 1 / (1 + (k/b)(l-1)/a), power-law decay along the row.
//   EE: h_kl = exp(-k|l-1|/(ab)), exponential decay along the row.
enum class Protocol { EB, EP, EE, Custom };

std::string to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

struct ProtocolParams {
    double mu = 0.0;  // EB
    double a = 0.0;   // EP, EE
    double b = 0.0;   // EP, EE

    static ProtocolParams eb(double mu) { return {mu, 0.0, 0.0}; }
    static ProtocolParams ab(double a, double b) { return {0.0, a, b}; }
    static ProtocolParams ab(double a) { return {0.0, a, a}; }
};

// Variances below this are treated as exactly zero when sampling.
inline constexpr double kVarianceFloor = 1e-300;

struct VarianceProfile {
    int n_rows = 0;  // N
    int n_cols = 0;  // N + nu0
    int beta = 1;
    Eigen::MatrixXd h;        // variance of each real component
    Eigen::MatrixXd mean;     // mean of the real component
    Eigen::MatrixXd mean_im;  // mean of the imaginary component (beta = 2 only, may be empty)
    Protocol protocol = Protocol::Custom;
    ProtocolParams params;

    int nu0() const { return n_cols - n_rows; }
    bool has_mean() const;

    // Throws ConfigError when an invariant is broken.
    void validate() const;
};

VarianceProfile build_profile(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta);

// Arbitrary variances and means. Variances must be positive and finite; the
// <= 1 bound of the named protocols is not required.
VarianceProfile custom_profile(Eigen::MatrixXd h, Eigen::MatrixXd mean, int beta,
                               Eigen::MatrixXd mean_im = Eigen::MatrixXd());

// One sampled coefficient matrix. `im` is empty for beta = 1.
struct CMatrix {
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;
    int beta = 1;
    std::string source;

    Eigen::Index rows() const { return re.rows(); }
    Eigen::Index cols() const { return re.cols(); }
    bool is_complex() const { return beta == 2; }
};

CMatrix sample_c(const VarianceProfile& profile, Rng& rng);

// Every real component i.i.d. N(0, 1/(2 gamma)).
CMatrix sample_stationary(int n, int nu0, int beta, double gamma, Rng& rng);

// Serializable description of one ensemble point.
struct EnsembleConfig {
    Protocol protocol = Protocol::EB;
    ProtocolParams params = ProtocolParams::eb(1.0);
    int n = 64;
    int nu0 = 0;
    int beta = 1;
    double gamma = 0.25;
    std::uint64_t seed = 1;

    VarianceProfile profile() const { return build_profile(protocol, params, n, nu0, beta); }
};

nlohmann::json to_json(const EnsembleConfig& cfg);
EnsembleConfig ensemble_config_from_json(const nlohmann::json& j);
void save_ensemble_config(const std::filesystem::path& path, const EnsembleConfig& cfg);
EnsembleConfig load_ensemble_config(const std::filesystem::path& path);

}  // namespace entgrowth
