#pragma once

#include <array>
#include <stdexcept>

#include "fracpm/mesh.hpp"

namespace fracpm {

/// Lower/upper clamp levels for the entropy regularisation, 0 < delta < 1 < L.
struct CutoffParams {
    double delta;
    double L;

    CutoffParams(double delta_, double L_) : delta(delta_), L(L_) {
        if (!(delta > 0.0 && delta < 1.0 && L > 1.0))
            throw std::invalid_argument("CutoffParams: need 0 < delta < 1 < L");
    }
};

/// Two-sided clamp of s to [delta, L]; monotone, Lipschitz-1.
double betaDeltaL(double s, const CutoffParams& p);

/// Upper clamp only: min(s, L).
double betaL(double s, double L);

/// Entropy density G(s) = s(log s - 1) + 1 for s > 0, G(0) = 1.
double entropyG(double s);

/// C^{2,1} regularisation of G: quadratic below delta and above L, equal to
/// G in between. Second derivative is 1/clamp(s), so betaDeltaL * ddGReg = 1
/// identically.
double gReg(double s, const CutoffParams& p);
double dGReg(double s, const CutoffParams& p);
double ddGReg(double s, const CutoffParams& p);

struct ThetaElement {
    std::array<double, 2> theta_tilde;          // diagonal, local vertices 1 and 2
    std::array<std::array<double, 2>, 2> theta; // (B^T)^{-1} diag(theta_tilde) B^T
};

/// Per-element difference-quotient matrix. theta_tilde_j equals
/// (phi_j - phi_0) / (dGReg(phi_j) - dGReg(phi_0)) when the nodal values
/// differ, and betaDeltaL(phi_j) otherwise; both branches lie in [delta, L].
/// Values are treated as equal when they agree to a relative 1e-12, where
/// the two branches coincide up to rounding.
ThetaElement thetaElement(const std::array<double, 3>& phi_local,
                          const ElementGeometry& geo, const CutoffParams& p);

/// theta * v for the full conjugated matrix.
std::array<double, 2> applyTheta(const ThetaElement& t, const std::array<double, 2>& v);

}  // namespace fracpm
