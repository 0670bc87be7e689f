#include "fracpm/fracop.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace fracpm {

namespace {

// Deterministic pseudo-random start vector for the power iteration.
NodalField seededVector(std::size_t n) {
    NodalField v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < n; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v[i] = static_cast<double>(state >> 11) / static_cast<double>(1ull << 53) - 0.5;
    }
    return v;
}

double dot(const NodalField& a, const NodalField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

int workerCountFromEnv() {
    const char* env = std::getenv("FRACPM_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    if (v < 1) return 1;
    return std::min(v, 64);
}

FracOperator buildFracOperator(const Mesh& mesh, const CoefficientSet& coeff, double s,
                               MassType mass_type, bool force_s) {
    if (!force_s && !(s > 0.5 && s < 1.0))
        throw std::invalid_argument(
            "buildFracOperator: fractional order must lie in (1/2, 1)");

    FracOperator op;
    const SparseOperator ka = assembleStiffnessA(mesh, coeff);
    op.k_total = coeff.q_is_zero ? ka : SparseOperator::add(ka, assembleQMass(mesh, coeff));
    op.lumped = assembleMassLumped(mesh);
    op.mass = (mass_type == MassType::Consistent) ? assembleMassConsistent(mesh)
                                                  : op.lumped;
    op.kernel_mode = coeff.q_is_zero ? KernelMode::K1 : KernelMode::K0;
    op.s = s;
    return op;
}

double lumpedMean(const FracOperator& op, const NodalField& f) {
    const auto& d = op.lumped.values();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        num += d[i] * f[i];
        den += d[i];
    }
    return num / den;
}

NodalField projectDiamond(const FracOperator& op, const NodalField& f) {
    if (op.kernel_mode == KernelMode::K0) return f;
    const double mean = lumpedMean(op, f);
    NodalField out = f;
    for (double& v : out) v -= mean;
    return out;
}

std::pair<double, double> estimateSpectralInterval(const FracOperator& op, double tol) {
    const std::size_t n = op.k_total.size();

    // Upper bound. With the lumped diagonal D, Gershgorin on D^{-1/2}KD^{-1/2}
    // gives lambda_max(K, D) <= max_i sum_j |K_ij| / D_ii. The consistent P1
    // mass dominates D/4 elementwise in the quadratic-form sense (local
    // eigenvalues |K|/12 {1,1,4} against |K|/3), hence the extra factor 4.
    const auto& d = op.lumped.values();
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s_abs = 0.0;
        for (int k = op.k_total.rowPtr()[i]; k < op.k_total.rowPtr()[i + 1]; ++k)
            s_abs += std::abs(op.k_total.values()[k]);
        hi = std::max(hi, s_abs / d[i]);
    }
    const bool lumped_pencil = op.mass.nonzeroCount() == n;
    if (!lumped_pencil) hi *= 4.0;

    // Smallest nonzero eigenvalue: inverse power iteration on the shifted
    // pencil, deflating constants in K1 mode.
    const double sigma = 1e-6 * hi;
    const SparseOperator shifted = SparseOperator::add(op.k_total, op.mass, sigma);

    NodalField x = seededVector(n);
    auto deflate = [&](NodalField& v) {
        if (op.kernel_mode != KernelMode::K1) return;
        // Remove the M-mean so v stays M-orthogonal to the kernel.
        const NodalField mv = op.mass.apply(v);
        double num = 0.0;
        for (double m : mv) num += m;
        double den = 0.0;
        const NodalField ones(n, 1.0);
        const NodalField mo = op.mass.apply(ones);
        for (double m : mo) den += m;
        const double mean = num / den;
        for (double& c : v) c -= mean;
    };
    deflate(x);

    double lambda = 0.0;
    const int max_outer = 500;
    for (int it = 0; it < max_outer; ++it) {
        NodalField rhs = op.mass.apply(x);
        NodalField y = cgSolve(shifted, rhs, 1e-12, 0).x;
        deflate(y);
        const double ynorm = std::sqrt(dot(y, op.mass.apply(y)));
        if (ynorm == 0.0)
            throw SolverError("estimateSpectralInterval: iteration collapsed", 0.0, it);
        for (double& c : y) c /= ynorm;
        const double lambda_new = dot(y, op.k_total.apply(y));
        const bool done = std::abs(lambda_new - lambda) <= tol * std::abs(lambda_new);
        lambda = lambda_new;
        x = std::move(y);
        if (done && it > 0) break;
        if (it == max_outer - 1)
            throw SolverError("estimateSpectralInterval: power iteration stagnated",
                              std::abs(lambda_new - lambda), it);
    }
    if (!(lambda > 0.0))
        throw SolverError("estimateSpectralInterval: nonpositive eigenvalue estimate",
                          lambda, 0);
    return {lambda, std::max(hi, lambda)};
}

void attachRationalApprox(FracOperator& op, double tol, int max_degree) {
    if (!(op.lambda_lo > 0.0) || !(op.lambda_hi >= op.lambda_lo))
        throw std::invalid_argument("attachRationalApprox: spectral interval not set");
    op.rational = buildRationalApprox(op.s, op.lambda_lo, op.lambda_hi, tol, max_degree);
    op.shifted.clear();
    op.shifted.reserve(op.rational->poles.size());
    for (double p : op.rational->poles)
        op.shifted.push_back(SparseOperator::add(op.k_total, op.mass, -p));
}

void attachDeflation(FracOperator& op, int k) {
    op.defl_psi.clear();
    op.defl_mpsi.clear();
    op.defl_lambda.clear();
    if (k <= 0) return;
    const std::size_t n = op.k_total.size();
    const int m = std::min<int>(std::max(6 * k, 96), static_cast<int>(n) - 1);

    const double sigma = 1e-6 * std::max(op.lambda_hi, 1.0);
    const SparseOperator shifted = SparseOperator::add(op.k_total, op.mass, sigma);

    auto mdot = [&](const NodalField& a, const NodalField& b) {
        return dot(a, op.mass.apply(b));
    };
    auto deflateKernel = [&](NodalField& v) {
        if (op.kernel_mode != KernelMode::K1) return;
        const NodalField ones(n, 1.0);
        const double mean = mdot(ones, v) / mdot(ones, ones);
        for (double& c : v) c -= mean;
    };

    // M-Lanczos for B = (K + sigma M)^{-1} M with full reorthogonalisation;
    // the lowest pencil modes are B's dominant, well-separated eigenvalues.
    std::vector<NodalField> v;
    std::vector<double> alpha, beta;
    NodalField v1 = seededVector(n);
    deflateKernel(v1);
    {
        const double nrm = std::sqrt(mdot(v1, v1));
        for (double& c : v1) c /= nrm;
    }
    v.push_back(std::move(v1));
    for (int j = 0; j < m; ++j) {
        const NodalField rhs = op.mass.apply(v[j]);
        NodalField w = cgSolve(shifted, rhs, 1e-13, 0, &v[j]).x;
        deflateKernel(w);
        const double a = mdot(w, v[j]);
        alpha.push_back(a);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] -= a * v[j][i];
            if (j > 0) w[i] -= beta[j - 1] * v[j - 1][i];
        }
        for (int pass = 0; pass < 2; ++pass)
            for (int l = 0; l <= j; ++l) {
                const double c = mdot(w, v[l]);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * v[l][i];
            }
        const double b = std::sqrt(std::max(mdot(w, w), 0.0));
        if (b < 1e-14) break;
        beta.push_back(b);
        for (double& c : w) c /= b;
        v.push_back(std::move(w));
    }

    const int steps = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
        throw SolverError("attachDeflation: tridiagonal eigensolve failed", 0.0, steps);

    // Largest Ritz values of B first (smallest pencil eigenvalues).
    for (int q = steps - 1; q >= 0 && static_cast<int>(op.defl_psi.size()) < k; --q) {
        const double theta = es.eigenvalues()(q);
        if (!(theta > 0.0)) continue;
        const double lambda = 1.0 / theta - sigma;
        if (!(lambda > 0.0)) continue;
        NodalField psi(n, 0.0);
        for (int j = 0; j < steps; ++j) {
            const double c = es.eigenvectors()(j, q);
            for (std::size_t i = 0; i < n; ++i) psi[i] += c * v[j][i];
        }
        const double nrm = std::sqrt(mdot(psi, psi));
        if (!(nrm > 0.0)) continue;
        for (double& c : psi) c /= nrm;

        // Keep only pairs accurate enough that the undeflated leftover is
        // negligible against the 1e-11 CG tolerance of the shifted solves.
        NodalField res = op.k_total.apply(psi);
        const NodalField mpsi = op.mass.apply(psi);
        double rnorm = 0.0, mnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res[i] -= lambda * mpsi[i];
            rnorm += res[i] * res[i];
            mnorm += mpsi[i] * mpsi[i];
        }
        // Inaccurate pairs leak their mode back into the deflated solves, so
        // only keep pairs converged in the relative eigen-residual sense.
        if (std::sqrt(rnorm) > 1e-7 * lambda * std::sqrt(mnorm)) continue;

        op.defl_psi.push_back(std::move(psi));
        op.defl_mpsi.push_back(mpsi);
        op.defl_lambda.push_back(lambda);
    }
}

NodalField fracInverseApply(const FracOperator& op, const NodalField& f, int threads,
                            FracApplyCache* cache) {
    if (!op.rational)
        throw std::logic_error("fracInverseApply: rational approximant not built");
    const RationalApprox& r = *op.rational;
    const std::size_t n = op.k_total.size();
    if (f.size() != n) throw std::invalid_argument("fracInverseApply: size mismatch");
    if (threads <= 0) threads = workerCountFromEnv();

    const NodalField fd = projectDiamond(op, f);
    const NodalField g = op.mass.apply(fd);

    // Split off the deflated low modes: their component of every shifted
    // solve is a_i / (lambda_i - p) psi_i exactly, so CG only has to resolve
    // the well-conditioned remainder.
    const int nd = static_cast<int>(op.defl_psi.size());
    std::vector<double> defl_coeff(nd);
    NodalField g_rem = g;
    for (int i = 0; i < nd; ++i) {
        defl_coeff[i] = dot(op.defl_psi[i], g);
        for (std::size_t q = 0; q < n; ++q)
            g_rem[q] -= defl_coeff[i] * op.defl_mpsi[i][q];
    }

    const int np = static_cast<int>(r.poles.size());
    if (cache) cache->pole_starts.resize(np);
    std::vector<NodalField> pole_solutions(np);

    // Primal projector onto the complement of the deflated modes and its
    // dual for residuals; applying both inside CG keeps the iteration
    // confined to the complement with a symmetric preconditioned system.
    auto projectComplement = [&](NodalField& z) {
        for (int i = 0; i < nd; ++i) {
            const double c = dot(op.defl_mpsi[i], z);
            for (std::size_t q = 0; q < n; ++q) z[q] -= c * op.defl_psi[i][q];
        }
    };
    const CgProjectors projector{
        [&](NodalField& r_vec) {
            for (int i = 0; i < nd; ++i) {
                const double c = dot(op.defl_psi[i], r_vec);
                for (std::size_t q = 0; q < n; ++q) r_vec[q] -= c * op.defl_mpsi[i][q];
            }
        },
        [&](NodalField& z) { projectComplement(z); }};
    // Large shifts are well conditioned on their own; the projection only
    // pays for itself where lambda_lo governs the iteration count.
    const double defl_cut =
        nd > 0 ? 16.0 * op.defl_lambda.back() : 0.0;

    auto solvePole = [&](int j) {
        const bool deflate = nd > 0 && -r.poles[j] < defl_cut;
        const NodalField& rhs = deflate ? g_rem : g;
        NodalField start;
        const NodalField* x0 = nullptr;
        if (cache && cache->pole_starts[j].size() == n) {
            start = cache->pole_starts[j];
            if (deflate) projectComplement(start);
            x0 = &start;
        }
        const auto* proj = deflate ? &projector : nullptr;
        NodalField y;
        if (op.shifted.size() == static_cast<std::size_t>(np)) {
            y = cgSolve(op.shifted[j], rhs, op.cg_tol, 0, x0, proj).x;
        } else {
            const SparseOperator shifted =
                SparseOperator::add(op.k_total, op.mass, -r.poles[j]);
            y = cgSolve(shifted, rhs, op.cg_tol, 0, x0, proj).x;
        }
        if (deflate) {
            // The deflated system determines y only up to the low modes;
            // strip them before adding the closed-form contribution.
            projectComplement(y);
            for (int i = 0; i < nd; ++i) {
                const double c = defl_coeff[i] / (op.defl_lambda[i] - r.poles[j]);
                for (std::size_t q = 0; q < n; ++q) y[q] += c * op.defl_psi[i][q];
            }
        }
        pole_solutions[j] = std::move(y);
        if (cache) cache->pole_starts[j] = pole_solutions[j];
    };
    if (threads <= 1 || np <= 1) {
        for (int j = 0; j < np; ++j) solvePole(j);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int nw = std::min(threads, np);
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (int j = next.fetch_add(1); j < np; j = next.fetch_add(1)) solvePole(j);
            });
        for (auto& t : pool) t.join();
    }

    // Fixed pole order keeps the sum bitwise reproducible across worker counts.
    NodalField c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) c[i] = r.offset * fd[i];
    for (int j = 0; j < np; ++j)
        for (std::size_t i = 0; i < n; ++i) c[i] += r.weights[j] * pole_solutions[j][i];

    for (double& v : c) v = -v;
    if (op.kernel_mode == KernelMode::K1) {
        const double mean = lumpedMean(op, c);
        for (double& v : c) v -= mean;
    }
    return c;
}

NodalField fracInverseDenseOracle(const FracOperator& op, const NodalField& f) {
    const std::size_t n = op.k_total.size();
    if (n > 5000)
        throw std::invalid_argument("fracInverseDenseOracle: size guard (5000) exceeded");
    if (f.size() != n)
        throw std::invalid_argument("fracInverseDenseOracle: size mismatch");

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = op.k_total.rowPtr()[i]; k < op.k_total.rowPtr()[i + 1]; ++k)
            K(i, op.k_total.colIdx()[k]) = op.k_total.values()[k];
        for (int k = op.mass.rowPtr()[i]; k < op.mass.rowPtr()[i + 1]; ++k)
            M(i, op.mass.colIdx()[k]) = op.mass.values()[k];
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("fracInverseDenseOracle: eigendecomposition failed");
    const Eigen::VectorXd& lambda = es.eigenvalues();  // M-orthonormal eigenvectors
    const Eigen::MatrixXd& psi = es.eigenvectors();

    const NodalField fd = projectDiamond(op, f);
    Eigen::Map<const Eigen::VectorXd> fdv(fd.data(), n);
    const Eigen::VectorXd mf = M * fdv;

    const double kernel_cut =
        (op.kernel_mode == KernelMode::K1) ? 1e-12 * std::abs(lambda(n - 1)) : 0.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (lambda(k) <= kernel_cut) continue;
        const double coeff = psi.col(k).dot(mf) * std::pow(lambda(k), -op.s);
        c -= coeff * psi.col(k);
    }
    return NodalField(c.data(), c.data() + n);
}

}  // namespace fracpm
