#pragma once

#include <functional>
#include <vector>

#include "fracpm/fracop.hpp"

namespace fracpm {

struct SchemeParams {
    double dt;
    double t_final;
    double mu = 1.0;          // parabolic regularisation coefficient
    CutoffParams cutoffs;
    double s;
    double fp_tol = 1e-10;    // fixed-point tolerance, max norm
    int fp_maxiter = 200;
    double relaxation = 1.0;  // omega in (0, 1]; auto-halved on residual growth
};

struct SimState {
    int step = 0;
    NodalField rho;
    NodalField c;
    int fp_iters_last = 0;
};

struct Diagnostics {
    double t = 0.0;
    double mass = 0.0;      // lumped integral mean
    double min_rho = 0.0;
    double max_rho = 0.0;
    double entropy = 0.0;   // sum_i D_ii G(max(rho_i, 0))
    double l1_dist = 0.0;
    int fp_iters = 0;
};

/// Smoothed initial datum: solves (D + dt K_iso) rho0 = b with
/// b_i = int rho0 phi_i by the edge-midpoint rule. With normalize set the
/// result is rescaled to unit lumped mean.
NodalField smoothInitial(const Mesh& mesh, const ScalarCoefficient& rho0, double dt,
                         bool normalize = false);

/// One implicit Euler step; the Theta/fractional-pressure nonlinearity is
/// resolved by damped fixed-point iteration. Throws SolverError with the
/// last residual when fp_maxiter is exceeded.
SimState step(const Mesh& mesh, const CoefficientSet& coeff, const FracOperator& fracop,
              const SchemeParams& params, const SimState& state);

Diagnostics computeDiagnostics(const FracOperator& fracop, const SimState& state,
                               double t, const NodalField& reference);

using StepCallback = std::function<void(const SimState&, const Diagnostics&)>;

/// Runs the scheme from the given initial field over n = 1..N steps,
/// invoking the callback after each. The l1 reference is either a fixed
/// field (steady-state distance) or, when null, the previous step.
void run(const Mesh& mesh, const CoefficientSet& coeff, const FracOperator& fracop,
         const SchemeParams& params, const NodalField& rho0,
         const NodalField* l1_reference, const StepCallback& callback);

/// Least-squares slope of log(l1) against t on [t_start, t_end].
double fitDecayRate(const std::vector<std::pair<double, double>>& series, double t_start,
                    double t_end);

}  // namespace fracpm
