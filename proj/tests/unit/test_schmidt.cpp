#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "entgrowth/errors.hpp"
#include "entgrowth/schmidt.hpp"

using namespace entgrowth;

namespace {

CMatrix real_c(const Eigen::MatrixXd& m) {
    CMatrix c;
    c.re = m;
    c.beta = 1;
    return c;
}

// Characteristic polynomial coefficients of a real symmetric matrix by
// cofactor expansion of det(A - x I) with polynomial entries.
using Poly = std::vector<double>;

Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

void add_to(Poly& acc, const Poly& p, double sign) {
    if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) acc[i] += sign * p[i];
}

Poly det(const std::vector<std::vector<Poly>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Poly acc{0.0};
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<std::vector<Poly>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Poly> row;
            for (std::size_t c = 0; c < n; ++c)
                if (c != col) row.push_back(m[r][c]);
            minor.push_back(row);
        }
        add_to(acc, mul(m[0][col], det(minor)), col % 2 == 0 ? 1.0 : -1.0);
    }
    return acc;
}

double eval(const Poly& p, double x) {
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

}  // namespace

TEST_CASE("reduce on hand-built states") {
    Eigen::Matrix2d m;
    m << 1, 0, 0, 0;
    CHECK(reduce(real_c(m)).re.isApprox(m));
    m = Eigen::Matrix2d::Identity() / std::sqrt(2.0);
    CHECK(reduce(real_c(m)).re.isApprox(Eigen::Matrix2d::Identity() / 2.0));
    m << 1, 1, 0, 0;
    Eigen::Matrix2d want;
    want << 1, 0, 0, 0;
    CHECK(reduce(real_c(m)).re.isApprox(want));
    CHECK_THROWS_AS(reduce(real_c(Eigen::MatrixXd::Zero(3, 3))), NumericalError);
}

TEST_CASE("spectrum of small density matrices") {
    DensityMatrix d;
    d.re = Eigen::Vector2d(0.7, 0.3).asDiagonal();
    auto s = spectrum(d);
    CHECK(s.values[0] == doctest::Approx(0.7));
    CHECK(s.values[1] == doctest::Approx(0.3));
    d.re << 0.5, 0.5, 0.5, 0.5;
    s = spectrum(d);
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(std::abs(s.values[1]) < 1e-15);
}

TEST_CASE("8x8 spectrum matches characteristic polynomial roots") {
    Rng rng = make_stream(2024, 0);
    auto c = sample_stationary(8, 0, 1, 0.25, rng);
    auto rho = reduce(c);
    auto s = spectrum(rho);
    CHECK(std::abs(s.sum() - 1.0) < 1e-10);

    std::vector<std::vector<Poly>> m(8, std::vector<Poly>(8));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) m[i][j] = i == j ? Poly{rho.re(i, j), -1.0} : Poly{rho.re(i, j)};
    const Poly p = det(m);
    for (double lam : s.values) {
        // Newton polish from the solver's value must stay within 1e-8.
        double x = lam;
        for (int it = 0; it < 50; ++it) {
            const double h = 1e-7;
            const double f = eval(p, x);
            const double df = (eval(p, x + h) - eval(p, x - h)) / (2 * h);
            if (df == 0.0) break;
            const double dx = f / df;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        CHECK(std::abs(x - lam) < 1e-8);
    }
}

TEST_CASE("density matrix invariants on random complex samples") {
    Rng rng = make_stream(5, 1);
    for (int t = 0; t < 10; ++t) {
        auto c = sample_stationary(6, 2, 2, 0.25, rng);
        auto rho = reduce(c);
        CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
        auto z = rho.as_complex();
        CHECK((z - z.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        auto s = spectrum(rho);
        CHECK(std::abs(s.sum() - 1.0) < 1e-10);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.values[i - 1] >= s.values[i]);
        CHECK(s.values.back() >= 0.0);
        CHECK(max_eigen_residual(rho) < 1e-10);
    }
}

TEST_CASE("spectrum invariant under right unitary rotation") {
    Rng rng = make_stream(8, 0);
    auto c = sample_stationary(5, 2, 2, 0.25, rng);
    Eigen::MatrixXcd g(7, 7);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) g(i, j) = {normal(rng), normal(rng)};
    Eigen::MatrixXcd w = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
    Eigen::MatrixXcd rotated = (c.re.cast<std::complex<double>>() + std::complex<double>(0, 1) * c.im.cast<std::complex<double>>()) * w;
    CMatrix c2;
    c2.beta = 2;
    c2.re = rotated.real();
    c2.im = rotated.imag();
    auto a = spectrum(reduce(c)).values, b = spectrum(reduce(c2)).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);

    auto r = sample_stationary(4, 0, 1, 0.25, rng);
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(4, 4)).householderQ();
    CMatrix r2 = r;
    r2.re = r.re * q;
    a = spectrum(reduce(r)).values;
    b = spectrum(reduce(r2)).values;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("rank is bounded by the smaller dimension") {
    Rng rng = make_stream(4, 0);
    CMatrix c;
    c.beta = 1;
    c.re = Eigen::MatrixXd::Random(6, 2);
    auto s = spectrum(reduce(c));
    int nonzero = 0;
    for (double v : s.values) nonzero += v > 1e-12;
    CHECK(nonzero <= 2);
}

TEST_CASE("separable EB sample has one dominant Schmidt value") {
    Rng rng = make_stream(6, 0);
    auto c = sample_c(build_profile(Protocol::EB, ProtocolParams::eb(1e12), 16, 0, 1), rng);
    CHECK(spectrum(reduce(c)).values[0] >= 1.0 - 1e-6);
}
