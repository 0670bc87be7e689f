#pragma once

#include <optional>

#include "fracpm/fem.hpp"
#include "fracpm/rational.hpp"

namespace fracpm {

/// Kernel of the elliptic pencil: K0 = potential present, trivial kernel;
/// K1 = zero potential, constants in the kernel.
enum class KernelMode { K0, K1 };

enum class MassType { Consistent, Lumped };

/// Discrete elliptic pencil (K_A + M_Q, M) with its spectral interval and a
/// rational approximant of z^{-s}. Immutable once the approximant is built.
struct FracOperator {
    SparseOperator k_total;  // stiffness_A + Q-mass, symmetric PSD
    SparseOperator mass;     // pencil mass (consistent by default)
    SparseOperator lumped;   // diagonal, used for means and diagnostics
    KernelMode kernel_mode = KernelMode::K0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double s = 0.0;
    std::optional<RationalApprox> rational;
    std::vector<SparseOperator> shifted;  // K - p_j M, built with the approximant
    double cg_tol = 1e-11;

    // Optional low-mode deflation basis: M-orthonormal eigenvectors of the
    // pencil with their eigenvalues and precomputed M psi products. The
    // low-mode component of every shifted solve is known in closed form, so
    // CG only sees the remainder, whose conditioning no longer depends on
    // lambda_lo.
    std::vector<NodalField> defl_psi;
    std::vector<NodalField> defl_mpsi;
    std::vector<double> defl_lambda;
};

/// Warm starts for the per-pole solves. Reusing one cache across the fixed
/// point and across time steps cuts the CG iteration count sharply; the
/// evolution is deterministic, so results stay reproducible.
struct FracApplyCache {
    std::vector<NodalField> pole_starts;
};

/// Assembles the pencil. s must lie in (1/2, 1) unless force_s is set.
FracOperator buildFracOperator(const Mesh& mesh, const CoefficientSet& coeff, double s,
                               MassType mass_type = MassType::Consistent,
                               bool force_s = false);

/// lambda_lo: smallest nonzero generalized eigenvalue via inverse power
/// iteration on (K + sigma M, M), with constant-vector deflation in K1 mode.
/// lambda_hi: certified Gershgorin-style upper bound through the lumped
/// mass (consistent P1 mass dominates a quarter of the lumped one).
std::pair<double, double> estimateSpectralInterval(const FracOperator& op,
                                                   double tol = 1e-6);

/// Builds and stores the rational approximant; call after the spectral
/// interval is set.
void attachRationalApprox(FracOperator& op, double tol = 1e-9, int max_degree = 30);

/// Computes up to k of the lowest nonzero eigenpairs of the pencil by
/// shift-invert Lanczos (every inner solve is a Jacobi-CG solve) and stores
/// them on the operator for deflated shifted solves. Only pairs whose
/// residual passes a strict check are kept; deterministic.
void attachDeflation(FracOperator& op, int k = 6);

/// K0: identity. K1: removes the lumped-mass integral mean.
NodalField projectDiamond(const FracOperator& op, const NodalField& f);

/// Lumped-mass integral mean of a field.
double lumpedMean(const FracOperator& op, const NodalField& f);

/// c = -L^{-s} f_diamond via the partial-fraction form: shifted SPD solves
/// (K - p_j M) x_j = M f_diamond summed in fixed pole order. In K1 mode the
/// result is re-projected to mean zero. Worker count (per-pole parallelism)
/// never changes the result; threads <= 0 reads FRACPM_THREADS.
NodalField fracInverseApply(const FracOperator& op, const NodalField& f,
                            int threads = 0, FracApplyCache* cache = nullptr);

/// Dense generalized eigendecomposition reference; guarded to <= 5000
/// unknowns. c = -sum_k lambda_k^{-s} (f' M psi_k) psi_k over nonzero modes.
NodalField fracInverseDenseOracle(const FracOperator& op, const NodalField& f);

/// Effective worker count from FRACPM_THREADS (>=1).
int workerCountFromEnv();

}  // namespace fracpm
