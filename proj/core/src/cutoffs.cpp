#include "fracpm/cutoffs.hpp"

#include <algorithm>
#include <cmath>

namespace fracpm {

double betaDeltaL(double s, const CutoffParams& p) {
    return std::clamp(s, p.delta, p.L);
}

double betaL(double s, double L) { return std::min(s, L); }

double entropyG(double s) {
    if (s < 0.0) throw std::invalid_argument("entropyG: negative argument");
    if (s == 0.0) return 1.0;
    return s * (std::log(s) - 1.0) + 1.0;
}

double gReg(double s, const CutoffParams& p) {
    if (s <= p.delta)
        return (s * s - p.delta * p.delta) / (2.0 * p.delta) + (std::log(p.delta) - 1.0) * s + 1.0;
    if (s >= p.L)
        return (s * s - p.L * p.L) / (2.0 * p.L) + (std::log(p.L) - 1.0) * s + 1.0;
    return s * (std::log(s) - 1.0) + 1.0;
}

double dGReg(double s, const CutoffParams& p) {
    if (s <= p.delta) return s / p.delta + std::log(p.delta) - 1.0;
    if (s >= p.L) return s / p.L + std::log(p.L) - 1.0;
    return std::log(s);
}

double ddGReg(double s, const CutoffParams& p) {
    return 1.0 / betaDeltaL(s, p);
}

ThetaElement thetaElement(const std::array<double, 3>& phi, const ElementGeometry& geo,
                          const CutoffParams& p) {
    ThetaElement t{};
    for (int j = 1; j <= 2; ++j) {
        const double a = phi[j], b = phi[0];
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        if (std::abs(a - b) <= 1e-12 * scale) {
            t.theta_tilde[j - 1] = betaDeltaL(a, p);
        } else {
            // The divided difference is the harmonic mean of G'' and lies in
            // [delta, L] exactly; clamp away the roundoff spill (cancellation
            // near a = b can otherwise push it outside the interval).
            t.theta_tilde[j - 1] =
                std::clamp((a - b) / (dGReg(a, p) - dGReg(b, p)), p.delta, p.L);
        }
    }

    // theta = (B^T)^{-1} diag(theta_tilde) B^T
    const double b00 = geo.b[0][0], b01 = geo.b[0][1];
    const double b10 = geo.b[1][0], b11 = geo.b[1][1];
    const double det = b00 * b11 - b01 * b10;
    // B^T = [[b00, b10], [b01, b11]]; (B^T)^{-1} = 1/det [[b11, -b10], [-b01, b00]]
    const double d0 = t.theta_tilde[0], d1 = t.theta_tilde[1];
    // M = diag(d) * B^T
    const double m00 = d0 * b00, m01 = d0 * b10;
    const double m10 = d1 * b01, m11 = d1 * b11;
    t.theta[0][0] = (b11 * m00 - b10 * m10) / det;
    t.theta[0][1] = (b11 * m01 - b10 * m11) / det;
    t.theta[1][0] = (-b01 * m00 + b00 * m10) / det;
    t.theta[1][1] = (-b01 * m01 + b00 * m11) / det;
    return t;
}

std::array<double, 2> applyTheta(const ThetaElement& t, const std::array<double, 2>& v) {
    return {t.theta[0][0] * v[0] + t.theta[0][1] * v[1],
            t.theta[1][0] * v[0] + t.theta[1][1] * v[1]};
}

}  // namespace fracpm
