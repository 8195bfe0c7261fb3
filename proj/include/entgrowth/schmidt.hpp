#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "entgrowth/ensembles.hpp"

namespace entgrowth {

// Self-adjoint N x N matrix stored as real and imaginary parts; `im` is empty
// for beta = 1. Only used for rho_A = C C^dagger and its unnormalized variant.
struct DensityMatrix {
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;
    int beta = 1;

    Eigen::Index size() const { return re.rows(); }
    double trace() const { return re.trace(); }
    Eigen::MatrixXcd as_complex() const;
};

// Eigenvalues sorted in descending order.
struct Spectrum {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double sum() const;
};

// C C^dagger without trace normalization.
DensityMatrix gram(const CMatrix& c);

// rho_A = C C^dagger / Tr(C C^dagger). Throws NumericalError for an all-zero C.
DensityMatrix reduce(const CMatrix& c);

// Full spectrum of a trace-one density matrix. Values in [-1e-12, 0) are
// clamped to zero, anything more negative is reported as a solver failure.
Spectrum spectrum(const DensityMatrix& rho, std::int64_t sample_id = -1);

// Descending eigenvalues of an arbitrary self-adjoint matrix (no clamping,
// no trace assumption).
std::vector<double> eigenvalues(const DensityMatrix& m, std::int64_t sample_id = -1);

// Largest ||rho v - lambda v|| over all eigenpairs; used to audit the solver.
double max_eigen_residual(const DensityMatrix& rho);

}  // namespace entgrowth
