#include <doctest.h>

#include <cmath>
#include <vector>

#include "entgrowth/complexity.hpp"
#include "entgrowth/errors.hpp"

using namespace entgrowth;

TEST_CASE("hand-evaluated complexity values") {
    auto eb = build_profile(Protocol::EB, ProtocolParams::eb(1.0), 4, 0, 1);
    const double want_eb = -(12.0 / (2.0 * 16.0 * 0.25)) * std::log(0.75);
    CHECK(complexity_general(eb, 0.25).y == doctest::Approx(want_eb).epsilon(1e-12));
    CHECK(complexity_general(eb, 0.25).y == doctest::Approx(0.43152).epsilon(1e-4));
    CHECK(complexity_general(eb, 0.25).m_count == 16);

    auto ee = build_profile(Protocol::EE, ProtocolParams::ab(1.0), 2, 0, 1);
    const double want_ee = -0.5 * (std::log(1.0 - std::exp(-1.0) / 2.0) + std::log(1.0 - std::exp(-2.0) / 2.0));
    CHECK(complexity_general(ee, 0.25).y == doctest::Approx(want_ee).epsilon(1e-12));
    CHECK(want_ee == doctest::Approx(0.13667).epsilon(1e-4));

    const double want_ep = -0.5 * (std::log(0.75) + std::log(5.0 / 6.0));
    CHECK(complexity_closed_form(Protocol::EP, ProtocolParams::ab(1.0), 2, 0, 1, 0.25).y ==
          doctest::Approx(want_ep).epsilon(1e-12));
    CHECK(want_ep == doctest::Approx(0.23498).epsilon(1e-4));
}

TEST_CASE("separable limits give zero") {
    CHECK(std::abs(complexity_closed_form(Protocol::EB, ProtocolParams::eb(1e12), 16, 0, 1, 0.25).y) < 1e-9);
    CHECK(std::abs(complexity_general(build_profile(Protocol::EB, ProtocolParams::eb(1e12), 16, 0, 1), 0.25).y) <
          1e-9);
    CHECK(complexity_closed_form(Protocol::EE, ProtocolParams::ab(1e-6), 16, 0, 1, 0.25).y < 1e-9);
}

TEST_CASE("general and closed forms agree") {
    CHECK(complexity_general(build_profile(Protocol::EB, ProtocolParams::eb(3.0), 8, 0, 1), 0.25).y ==
          doctest::Approx(complexity_closed_form(Protocol::EB, ProtocolParams::eb(3.0), 8, 0, 1, 0.25).y)
              .epsilon(1e-12));
    for (Protocol p : {Protocol::EB, Protocol::EP, Protocol::EE}) {
        for (int beta : {1, 2}) {
            for (int nu0 : {0, 3}) {
                const auto lo = p == Protocol::EB ? ProtocolParams::eb(5.0) : ProtocolParams::ab(0.7, 1.3);
                const auto hi = p == Protocol::EB ? ProtocolParams::eb(0.2) : ProtocolParams::ab(6.0, 4.0);
                const double dg = complexity_general(build_profile(p, hi, 7, nu0, beta), 0.25).y -
                                  complexity_general(build_profile(p, lo, 7, nu0, beta), 0.25).y;
                const double dc = complexity_closed_form(p, hi, 7, nu0, beta, 0.25).y -
                                  complexity_closed_form(p, lo, 7, nu0, beta, 0.25).y;
                CHECK(std::abs(dg - dc) < 1e-10);
            }
        }
    }
}

TEST_CASE("beta leaves Y unchanged and doubles M") {
    auto c1 = complexity_closed_form(Protocol::EP, ProtocolParams::ab(2.0), 6, 1, 1, 0.25);
    auto c2 = complexity_closed_form(Protocol::EP, ProtocolParams::ab(2.0), 6, 1, 2, 0.25);
    CHECK(c1.y == doctest::Approx(c2.y).epsilon(1e-14));
    CHECK(c2.m_count == 2 * c1.m_count);
    CHECK(c1.m_count == 6 * 7);
}

TEST_CASE("Y is monotone in the protocol parameter") {
    std::vector<ProtocolParams> eb{ProtocolParams::eb(1e6), ProtocolParams::eb(10), ProtocolParams::eb(1),
                                   ProtocolParams::eb(0.1)};
    auto ys = y_grid(Protocol::EB, eb, 16, 0, 1, 0.25);
    REQUIRE(ys.size() == 4);
    for (std::size_t i = 1; i < ys.size(); ++i) CHECK(ys[i].y > ys[i - 1].y);

    for (Protocol p : {Protocol::EP, Protocol::EE}) {
        double prev = -1.0;
        for (double a : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            const double y = complexity_closed_form(p, ProtocolParams::ab(a), 16, 0, 1, 0.25).y;
            CHECK(y > prev);
            prev = y;
        }
    }

    std::vector<ProtocolParams> one{ProtocolParams::eb(2.0)};
    CHECK(y_grid(Protocol::EB, one, 4, 0, 1, 0.25).size() == 1);
    CHECK_THROWS_AS(y_grid(Protocol::EB, std::span<const ProtocolParams>{}, 4, 0, 1, 0.25), ConfigError);
}

TEST_CASE("singular and degenerate inputs") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(2, 2);
    auto p = custom_profile(h, Eigen::MatrixXd::Zero(2, 2), 1);
    CHECK_THROWS_AS(complexity_general(p, 0.5), ConfigError);
    CHECK_THROWS_AS(complexity_general(p, 0.0), ConfigError);
    CHECK_THROWS_AS(complexity_closed_form(Protocol::Custom, {}, 4, 0, 1, 0.25), ConfigError);
}

TEST_CASE("mean terms enter custom profiles") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(2, 2, 0.5);
    auto zero = complexity_general(custom_profile(h, Eigen::MatrixXd::Zero(2, 2), 1), 0.25);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 2);
    mean(0, 1) = 1.0;
    auto shifted = complexity_general(custom_profile(h, mean, 1), 0.25);
    CHECK(shifted.m_count > zero.m_count);
    CHECK(std::isfinite(shifted.y));
}
