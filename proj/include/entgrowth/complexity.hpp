#pragma once

#include <span>
#include <vector>

#include "entgrowth/ensembles.hpp"

namespace entgrowth {

// Ensemble complexity parameter Y. The additive constant is chosen so that
// the separable ensemble (only the first column populated) sits at Y0 = 0,
// which amounts to dropping the first-column terms from the sum; they do not
// depend on the protocol parameters.
struct ComplexityValue {
    double y = 0.0;
    double y0 = 0.0;
    long m_count = 0;  // M, number of nonzero terms
    double gamma = 0.0;
};

// Y = -(1/(2 M gamma)) * sum' ln|1 - 2 gamma h_kl;s| (+ ln|b_kl;s|^2 for
// nonzero means), evaluated entry by entry from the profile matrices.
ComplexityValue complexity_general(const VarianceProfile& profile, double gamma);

// Closed forms of the same sum for the named protocols, evaluated from the
// protocol parameters only.
ComplexityValue complexity_closed_form(Protocol protocol, const ProtocolParams& params, int n, int nu0, int beta,
                                       double gamma);

std::vector<ComplexityValue> y_grid(Protocol protocol, std::span<const ProtocolParams> grid, int n, int nu0,
                                    int beta, double gamma);

}  // namespace entgrowth
