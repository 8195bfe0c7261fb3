#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "entgrowth/ensembles.hpp"
#include "entgrowth/errors.hpp"
#include "entgrowth/stats.hpp"

using namespace entgrowth;

TEST_CASE("protocol profiles at N=2") {
    SUBCASE("EB mu=1") {
        auto p = build_profile(Protocol::EB, ProtocolParams::eb(1.0), 2, 0, 1);
        Eigen::Matrix2d want;
        want << 1, 0.5, 1, 0.5;
        CHECK(p.h.isApprox(want, 1e-15));
        CHECK_FALSE(p.has_mean());
    }
    SUBCASE("EP a=b=1") {
        auto p = build_profile(Protocol::EP, ProtocolParams::ab(1.0), 2, 0, 1);
        Eigen::Matrix2d want;
        want << 1, 0.5, 1, 1.0 / 3.0;
        CHECK(p.h.isApprox(want, 1e-15));
    }
    SUBCASE("EE a=b=1") {
        auto p = build_profile(Protocol::EE, ProtocolParams::ab(1.0), 2, 0, 1);
        Eigen::Matrix2d want;
        want << 1, std::exp(-1.0), 1, std::exp(-2.0);
        CHECK(p.h.isApprox(want, 1e-15));
    }
}

TEST_CASE("profile shape and validation") {
    auto p = build_profile(Protocol::EP, ProtocolParams::ab(3.0, 2.0), 5, 2, 2);
    CHECK(p.n_rows == 5);
    CHECK(p.n_cols == 7);
    CHECK(p.nu0() == 2);
    CHECK((p.h.col(0).array() == 1.0).all());
    CHECK((p.h.array() <= 1.0).all());
    CHECK((p.h.array() > 0.0).all());

    CHECK_THROWS_AS(build_profile(Protocol::EB, ProtocolParams::eb(0.0), 4, 0, 1), ConfigError);
    CHECK_THROWS_AS(build_profile(Protocol::EP, ProtocolParams::ab(-1.0, 1.0), 4, 0, 1), ConfigError);
    CHECK_THROWS_AS(build_profile(Protocol::EB, ProtocolParams::eb(1.0), 1, 0, 1), ConfigError);
    CHECK_THROWS_AS(build_profile(Protocol::EB, ProtocolParams::eb(1.0), 4, -1, 1), ConfigError);
    CHECK_THROWS_AS(build_profile(Protocol::EB, ProtocolParams::eb(1.0), 4, 0, 4), ConfigError);
}

TEST_CASE("EE underflow is floored, not an error") {
    auto p = build_profile(Protocol::EE, ProtocolParams::ab(1e-3), 8, 0, 1);
    CHECK(p.h.minCoeff() == kVarianceFloor);
    Rng rng = make_stream(1, 0);
    auto c = sample_c(p, rng);
    for (int l = 1; l < 8; ++l) CHECK(c.re(7, l) == 0.0);
}

TEST_CASE("separable EB limit leaves only the first column") {
    auto p = build_profile(Protocol::EB, ProtocolParams::eb(1e12), 6, 0, 1);
    Rng rng = make_stream(11, 0);
    for (int s = 0; s < 20; ++s) {
        auto c = sample_c(p, rng);
        CHECK(c.re.rightCols(5).cwiseAbs().maxCoeff() < 1e-5);
        CHECK(c.re.col(0).cwiseAbs().maxCoeff() > 1e-3);
    }
}

TEST_CASE("unit-variance entries have the right moments") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(2, 2);
    auto p = custom_profile(h, Eigen::MatrixXd::Zero(2, 2), 1);
    Rng rng = make_stream(3, 0);
    const int m = 100000;
    std::vector<double> x(m), y(m), xy(m);
    for (int i = 0; i < m; ++i) {
        auto c = sample_c(p, rng);
        x[i] = c.re(0, 0);
        y[i] = c.re(0, 0) * c.re(0, 0);
        xy[i] = c.re(0, 0) * c.re(1, 1);
    }
    auto mean = estimate(x);
    auto var = estimate(y);
    CHECK(std::abs(mean.mean) < 0.01);
    CHECK(std::abs(var.mean - 1.0) < 0.02);
    auto cross = estimate(xy);
    CHECK(std::abs(cross.mean) < 5.0 * cross.se);
}

TEST_CASE("EE variance ratio across rows is e") {
    auto p = build_profile(Protocol::EE, ProtocolParams::ab(1.0), 2, 0, 1);
    Rng rng = make_stream(5, 0);
    double s12 = 0.0, s22 = 0.0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        auto c = sample_c(p, rng);
        s12 += c.re(0, 1) * c.re(0, 1);
        s22 += c.re(1, 1) * c.re(1, 1);
    }
    CHECK(std::abs(s12 / s22 / std::exp(1.0) - 1.0) < 0.03);
}

TEST_CASE("custom profile means are honoured") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(2, 3, 0.25);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 3);
    mean(1, 2) = 3.0;
    Eigen::MatrixXd mean_im = Eigen::MatrixXd::Zero(2, 3);
    mean_im(0, 1) = -2.0;
    auto p = custom_profile(h, mean, 2, mean_im);
    Rng rng = make_stream(9, 0);
    double re = 0.0, im = 0.0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
        auto c = sample_c(p, rng);
        re += c.re(1, 2);
        im += c.im(0, 1);
    }
    CHECK(re / m == doctest::Approx(3.0).epsilon(0.01));
    CHECK(im / m == doctest::Approx(-2.0).epsilon(0.01));
    CHECK_THROWS_AS(custom_profile(h, mean, 1, mean_im), ConfigError);
    CHECK_THROWS_AS(custom_profile(-h, mean, 1), ConfigError);
}

TEST_CASE("stationary components have variance 1/(2 gamma)") {
    for (double gamma : {0.25, 0.5}) {
        Rng rng = make_stream(21, 0);
        double s = 0.0;
        long count = 0;
        for (int i = 0; i < 20000; ++i) {
            auto c = sample_stationary(3, 1, 1, gamma, rng);
            s += c.re.squaredNorm();
            count += c.re.size();
        }
        CHECK(s / count == doctest::Approx(1.0 / (2.0 * gamma)).epsilon(0.02));
    }
    Rng rng = make_stream(22, 0);
    double s = 0.0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        auto c = sample_stationary(2, 0, 2, 0.25, rng);
        s += c.re(0, 0) * c.re(0, 0) + c.im(0, 0) * c.im(0, 0);
    }
    CHECK(s / m == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("sampling is deterministic per seed") {
    auto p = build_profile(Protocol::EP, ProtocolParams::ab(2.0), 6, 1, 2);
    Rng a = make_stream(77, 3), b = make_stream(77, 3), c = make_stream(77, 4);
    auto x = sample_c(p, a), y = sample_c(p, b), z = sample_c(p, c);
    CHECK(x.re == y.re);
    CHECK(x.im == y.im);
    CHECK_FALSE(x.re == z.re);
}

TEST_CASE("ensemble config round-trips exactly") {
    EnsembleConfig cfg;
    cfg.protocol = Protocol::EE;
    cfg.params = ProtocolParams::ab(0.1 + 0.2, 1.0 / 3.0);
    cfg.n = 12;
    cfg.nu0 = 3;
    cfg.beta = 2;
    cfg.gamma = 0.1;
    cfg.seed = 0xffffffffffffull;
    auto path = std::filesystem::temp_directory_path() / "entgrowth_cfg_roundtrip.json";
    save_ensemble_config(path, cfg);
    auto back = load_ensemble_config(path);
    CHECK(back.protocol == cfg.protocol);
    CHECK(back.params.a == cfg.params.a);
    CHECK(back.params.b == cfg.params.b);
    CHECK(back.n == cfg.n);
    CHECK(back.nu0 == cfg.nu0);
    CHECK(back.beta == cfg.beta);
    CHECK(back.gamma == cfg.gamma);
    CHECK(back.seed == cfg.seed);
    std::filesystem::remove(path);

    auto j = to_json(cfg);
    j["gamma"] = 0.0;
    CHECK_THROWS_AS(ensemble_config_from_json(j), ConfigError);
    j = to_json(cfg);
    j.erase("N");
    CHECK_THROWS_AS(ensemble_config_from_json(j), ConfigError);
}
