#include "fracpm/rational.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracpm {

namespace {

std::vector<double> logSpaced(double lo, double hi, int n) {
    std::vector<double> z(n);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i)
        z[i] = std::exp(la + (lb - la) * i / static_cast<double>(n - 1));
    z.front() = lo;
    z.back() = hi;
    return z;
}

double validateMaxRelError(const RationalApprox& r, double lo, double hi, double s) {
    const auto grid = logSpaced(lo, hi, 10000);
    double err = 0.0;
    for (double z : grid)
        err = std::max(err, std::abs(r.evaluate(z) * std::pow(z, s) - 1.0));
    return err;
}

// Extended precision for the fit internals: the Loewner least-squares and
// the pole/residue extraction lose ~8 digits on intervals spanning 1e6+, so
// plain double saturates near 1e-8 relative error.
using Real = long double;
using MatrixXr = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXr = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Barycentric fit with a fixed number of support points. The greedy point
/// selection and the Loewner least-squares both work in a relative metric
/// (rows scaled by 1/f), since the target spans several decades. Returns
/// false when the pole/residue extraction is unusable (complex or interval
/// poles), which the caller treats as "try a higher degree".
bool fitWithSupportCount(double s, double lo, double hi, int m_support,
                         RationalApprox& out) {
    const int n_fit = 4000;
    const auto Zd = logSpaced(lo, hi, n_fit);
    std::vector<Real> Z(Zd.begin(), Zd.end());
    std::vector<Real> F(n_fit);
    for (int i = 0; i < n_fit; ++i) F[i] = std::pow(Z[i], static_cast<Real>(-s));

    std::vector<int> support;
    std::vector<char> is_support(n_fit, 0);
    std::vector<Real> R(n_fit, 0.0);
    {
        Real favg = 0.0;
        for (Real f : F) favg += f;
        favg /= n_fit;
        std::fill(R.begin(), R.end(), favg);
    }
    std::vector<Real> w;

    for (int m = 1; m <= m_support; ++m) {
        // Greedy: largest relative deviation among non-support points.
        int pick = -1;
        Real worst = -1.0;
        for (int i = 0; i < n_fit; ++i) {
            if (is_support[i]) continue;
            const Real e = std::abs(F[i] - R[i]) / F[i];
            if (e > worst) {
                worst = e;
                pick = i;
            }
        }
        if (pick < 0) return false;
        support.push_back(pick);
        is_support[pick] = 1;

        // Loewner matrix over the remaining points, rows scaled by 1/F_i.
        std::vector<int> rest;
        rest.reserve(n_fit - m);
        for (int i = 0; i < n_fit; ++i)
            if (!is_support[i]) rest.push_back(i);

        MatrixXr A(static_cast<int>(rest.size()), m);
        for (std::size_t r = 0; r < rest.size(); ++r) {
            const int i = rest[r];
            for (int j = 0; j < m; ++j) {
                const int sj = support[j];
                A(static_cast<int>(r), j) = (F[i] - F[sj]) / ((Z[i] - Z[sj]) * F[i]);
            }
        }
        // Null vector of the tall Loewner matrix via thin QR first: A and its
        // triangular factor share right singular vectors, and the SVD of the
        // small m-by-m factor is far cheaper than of A itself.
        const MatrixXr R_factor = Eigen::HouseholderQR<MatrixXr>(A)
                                      .matrixQR()
                                      .topRows(m)
                                      .template triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<MatrixXr> svd(R_factor, Eigen::ComputeFullV);
        VectorXr wv = svd.matrixV().col(m - 1);
        w.assign(wv.data(), wv.data() + m);

        // Update R on the remaining points.
        for (int i : rest) {
            Real num = 0.0, den = 0.0;
            for (int j = 0; j < m; ++j) {
                const Real c = w[j] / (Z[i] - Z[support[j]]);
                num += c * F[support[j]];
                den += c;
            }
            R[i] = num / den;
        }
    }

    const int m = m_support;

    // Poles: finite generalized eigenvalues of the (m+1)x(m+1) arrowhead
    // pencil built from the barycentric weights and support points.
    MatrixXr E = MatrixXr::Zero(m + 1, m + 1);
    MatrixXr B = MatrixXr::Zero(m + 1, m + 1);
    for (int j = 0; j < m; ++j) {
        E(0, j + 1) = w[j];
        E(j + 1, 0) = 1.0;
        E(j + 1, j + 1) = Z[support[j]];
        B(j + 1, j + 1) = 1.0;
    }
    Eigen::GeneralizedEigenSolver<MatrixXr> ges(E, B, false);
    if (ges.info() != Eigen::Success) return false;

    std::vector<Real> poles;
    for (int k = 0; k <= m; ++k) {
        const Real beta = ges.betas()(k);
        const std::complex<Real> alpha = ges.alphas()(k);
        if (std::abs(beta) < 1e-16L * (1.0L + std::abs(alpha))) continue;  // at infinity
        const std::complex<Real> p = alpha / beta;
        if (std::abs(p.imag()) > 1e-10L * std::max<Real>(1.0L, std::abs(p.real())))
            return false;
        if (p.real() >= 0.0L) return false;  // must stay off the positive axis
        poles.push_back(p.real());
    }
    std::sort(poles.begin(), poles.end());

    Real wsum = 0.0, wfsum = 0.0;
    for (int j = 0; j < m; ++j) {
        wsum += w[j];
        wfsum += w[j] * F[support[j]];
    }
    if (wsum == 0.0L) return false;

    // Residues: res = N(p)/D'(p) with N, D the barycentric numerator and
    // denominator.
    std::vector<double> weights(poles.size());
    for (std::size_t q = 0; q < poles.size(); ++q) {
        const Real p = poles[q];
        Real num = 0.0, dden = 0.0;
        for (int j = 0; j < m; ++j) {
            const Real d = p - Z[support[j]];
            num += w[j] * F[support[j]] / d;
            dden -= w[j] / (d * d);
        }
        weights[q] = static_cast<double>(num / dden);
    }

    out.s = s;
    out.lo = lo;
    out.hi = hi;
    out.poles.assign(poles.begin(), poles.end());
    out.weights = std::move(weights);
    out.offset = static_cast<double>(wfsum / wsum);
    out.degree = static_cast<int>(out.poles.size());
    out.max_rel_error = validateMaxRelError(out, lo, hi, s);
    return std::isfinite(out.max_rel_error);
}

bool degenerateInterval(double lo, double hi) {
    return hi - lo <= 1e-12 * std::abs(hi);
}

RationalApprox pointApprox(double s, double lo, double hi) {
    RationalApprox r;
    r.s = s;
    r.lo = lo;
    r.hi = hi;
    r.offset = std::pow(lo, -s);
    r.degree = 0;
    r.max_rel_error = std::abs(r.evaluate(hi) * std::pow(hi, s) - 1.0);
    return r;
}

}  // namespace

double RationalApprox::evaluate(double z) const {
    double v = offset;
    for (std::size_t j = 0; j < poles.size(); ++j) v += weights[j] / (z - poles[j]);
    return v;
}

RationalApprox buildRationalApprox(double s, double lo, double hi, double tol,
                                   int max_degree) {
    if (!(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("buildRationalApprox: need 0 < lo <= hi");
    if (degenerateInterval(lo, hi)) return pointApprox(s, lo, hi);

    RationalApprox best;
    best.max_rel_error = std::numeric_limits<double>::infinity();
    for (int m = 2; m <= max_degree + 1; ++m) {
        RationalApprox cand;
        if (!fitWithSupportCount(s, lo, hi, m, cand)) continue;
        if (cand.max_rel_error < best.max_rel_error) best = cand;
        if (best.max_rel_error <= tol) return best;
    }
    throw std::runtime_error(
        "buildRationalApprox: tolerance unreachable at max degree " +
        std::to_string(max_degree) + " (best error " +
        std::to_string(best.max_rel_error) + "); loosen tol or raise the degree cap");
}

RationalApprox buildRationalApproxFixedDegree(double s, double lo, double hi,
                                              int degree) {
    if (degenerateInterval(lo, hi)) return pointApprox(s, lo, hi);
    RationalApprox out;
    // Support count m yields a rational of degree up to m-1; spurious or
    // discarded poles can lower it, so report what was achieved.
    if (!fitWithSupportCount(s, lo, hi, degree + 1, out))
        throw std::runtime_error("buildRationalApproxFixedDegree: fit failed");
    return out;
}

}  // namespace fracpm
