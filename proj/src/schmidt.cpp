#include "entgrowth/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "entgrowth/errors.hpp"

namespace entgrowth {

namespace {

constexpr double kNegativeTolerance = 1e-12;

std::string sample_label(std::int64_t id) { return id >= 0 ? " (sample " + std::to_string(id) + ")" : ""; }

// Fills `out` with a a^T using a symmetric rank update on the lower triangle.
void add_outer(Eigen::MatrixXd& out, const Eigen::MatrixXd& a) {
    out.selfadjointView<Eigen::Lower>().rankUpdate(a);
}

void mirror_lower(Eigen::MatrixXd& m) {
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
}

}  // namespace

Eigen::MatrixXcd DensityMatrix::as_complex() const {
    Eigen::MatrixXcd z(re.rows(), re.cols());
    z.real() = re;
    if (im.size() > 0)
        z.imag() = im;
    else
        z.imag().setZero();
    return z;
}

double Spectrum::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

DensityMatrix gram(const CMatrix& c) {
    DensityMatrix rho;
    rho.beta = c.beta;
    const auto n = c.rows();
    rho.re = Eigen::MatrixXd::Zero(n, n);
    add_outer(rho.re, c.re);
    if (c.beta == 2) {
        add_outer(rho.re, c.im);
        // (A + iB)(A - iB)^T = AA^T + BB^T + i(BA^T - AB^T)
        rho.im.noalias() = c.im * c.re.transpose();
        rho.im -= rho.im.transpose().eval();
    }
    mirror_lower(rho.re);
    return rho;
}

DensityMatrix reduce(const CMatrix& c) {
    if (!c.re.allFinite() || (c.im.size() > 0 && !c.im.allFinite()))
        throw NumericalError("coefficient matrix has non-finite entries");
    DensityMatrix rho = gram(c);
    const double tr = rho.trace();
    if (!(tr > 0.0)) throw NumericalError("degenerate state: coefficient matrix is identically zero");
    rho.re /= tr;
    if (rho.im.size() > 0) rho.im /= tr;
    return rho;
}

std::vector<double> eigenvalues(const DensityMatrix& m, std::int64_t sample_id) {
    Eigen::VectorXd ev;
    if (m.beta == 2 && m.im.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m.as_complex(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigensolver did not converge" + sample_label(sample_id));
        ev = solver.eigenvalues();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.re, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigensolver did not converge" + sample_label(sample_id));
        ev = solver.eigenvalues();
    }
    // Eigen returns ascending order.
    std::vector<double> out(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = ev(ev.size() - 1 - i);
    return out;
}

Spectrum spectrum(const DensityMatrix& rho, std::int64_t sample_id) {
    Spectrum s;
    s.values = eigenvalues(rho, sample_id);
    for (double& v : s.values) {
        if (v < 0.0) {
            if (v < -kNegativeTolerance) {
                std::ostringstream os;
                os << "negative Schmidt eigenvalue " << v << sample_label(sample_id);
                throw NumericalError(os.str());
            }
            v = 0.0;
        }
        v = std::min(v, 1.0);
    }
    return s;
}

double max_eigen_residual(const DensityMatrix& rho) {
    double worst = 0.0;
    if (rho.beta == 2 && rho.im.size() > 0) {
        const Eigen::MatrixXcd z = rho.as_complex();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(z);
        if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const Eigen::VectorXcd v = solver.eigenvectors().col(i);
            worst = std::max(worst, (z * v - solver.eigenvalues()(i) * v).norm());
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(rho.re);
        if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
        for (Eigen::Index i = 0; i < rho.re.rows(); ++i) {
            const Eigen::VectorXd v = solver.eigenvectors().col(i);
            worst = std::max(worst, (rho.re * v - solver.eigenvalues()(i) * v).norm());
        }
    }
    return worst;
}

}  // namespace entgrowth
