#include "fracpm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracpm {

namespace {

double maxNormDiff(const NodalField& a, const NodalField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Work that is constant across steps: the SPD time-step system and the
// warm-start cache for the per-pole fractional solves.
struct StepContext {
    SparseOperator d_over_dt;
    SparseOperator system;
    FracApplyCache frac_cache;
};

StepContext makeStepContext(const Mesh& mesh, const FracOperator& fracop,
                            const SchemeParams& params) {
    StepContext ctx;
    ctx.d_over_dt = fracop.lumped.scaled(1.0 / params.dt);
    ctx.system = params.mu > 0.0
                     ? SparseOperator::add(ctx.d_over_dt, assembleStiffnessIso(mesh),
                                           params.mu)
                     : ctx.d_over_dt;
    return ctx;
}

SimState stepWith(const Mesh& mesh, const CoefficientSet& coeff,
                  const FracOperator& fracop, const SchemeParams& params,
                  const SimState& state, StepContext& ctx) {
    const std::size_t n = state.rho.size();

    // (D/dt + mu K_iso) rho_hat = D rho_prev / dt + conv(rho_k, c_k)
    const NodalField base_rhs = ctx.d_over_dt.apply(state.rho);

    NodalField rho_k = state.rho;
    NodalField c_k;
    double omega = params.relaxation;
    double prev_residual = std::numeric_limits<double>::infinity();

    int it = 0;
    for (; it < params.fp_maxiter; ++it) {
        NodalField beta_rho(n);
        for (std::size_t i = 0; i < n; ++i)
            beta_rho[i] = betaL(rho_k[i], params.cutoffs.L);
        c_k = fracInverseApply(fracop, beta_rho, 0, &ctx.frac_cache);

        NodalField rhs = assembleConvectionRhs(mesh, rho_k, c_k, params.cutoffs, coeff);
        for (std::size_t i = 0; i < n; ++i) rhs[i] += base_rhs[i];

        const NodalField rho_hat = cgSolve(ctx.system, rhs, 1e-12, 0, &rho_k).x;

        NodalField rho_next(n);
        for (std::size_t i = 0; i < n; ++i)
            rho_next[i] = omega * rho_hat[i] + (1.0 - omega) * rho_k[i];

        const double residual = maxNormDiff(rho_next, rho_k);
        rho_k = std::move(rho_next);
        if (residual <= params.fp_tol) {
            ++it;
            break;
        }
        if (residual > prev_residual && omega > 1.0 / 64.0) omega /= 2.0;
        prev_residual = residual;
        if (it == params.fp_maxiter - 1)
            throw SolverError(
                "step: fixed point did not converge; reduce dt or the relaxation",
                residual, it);
    }

    SimState next;
    next.step = state.step + 1;
    next.rho = std::move(rho_k);
    next.c = std::move(c_k);
    next.fp_iters_last = it;
    return next;
}

}  // namespace

NodalField smoothInitial(const Mesh& mesh, const ScalarCoefficient& rho0, double dt,
                         bool normalize) {
    if (!(dt > 0.0)) throw std::invalid_argument("smoothInitial: dt must be positive");
    const SparseOperator d = assembleMassLumped(mesh);
    const SparseOperator k = assembleStiffnessIso(mesh);
    const SparseOperator system = SparseOperator::add(d, k, dt);
    const NodalField b = assembleLoadMidpoint(mesh, rho0);
    NodalField rho = cgSolve(system, b, 1e-12, 0).x;
    if (normalize) {
        const auto& dv = d.values();
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            num += dv[i] * rho[i];
            den += dv[i];
        }
        const double mean = num / den;
        if (mean <= 0.0) throw std::runtime_error("smoothInitial: nonpositive mass");
        for (double& v : rho) v /= mean;
    }
    return rho;
}

SimState step(const Mesh& mesh, const CoefficientSet& coeff, const FracOperator& fracop,
              const SchemeParams& params, const SimState& state) {
    StepContext ctx = makeStepContext(mesh, fracop, params);
    return stepWith(mesh, coeff, fracop, params, state, ctx);
}

Diagnostics computeDiagnostics(const FracOperator& fracop, const SimState& state,
                               double t, const NodalField& reference) {
    Diagnostics d;
    d.t = t;
    d.mass = lumpedMean(fracop, state.rho);
    d.min_rho = *std::min_element(state.rho.begin(), state.rho.end());
    d.max_rho = *std::max_element(state.rho.begin(), state.rho.end());
    const auto& lumped = fracop.lumped.values();
    for (std::size_t i = 0; i < state.rho.size(); ++i) {
        d.entropy += lumped[i] * entropyG(std::max(state.rho[i], 0.0));
        d.l1_dist += lumped[i] * std::abs(state.rho[i] - reference[i]);
    }
    d.fp_iters = state.fp_iters_last;
    return d;
}

void run(const Mesh& mesh, const CoefficientSet& coeff, const FracOperator& fracop,
         const SchemeParams& params, const NodalField& rho0,
         const NodalField* l1_reference, const StepCallback& callback) {
    const int n_steps = static_cast<int>(std::llround(params.t_final / params.dt));
    if (n_steps < 1) throw std::invalid_argument("run: t_final shorter than one step");

    SimState state;
    state.rho = rho0;
    state.c.assign(rho0.size(), 0.0);

    StepContext ctx = makeStepContext(mesh, fracop, params);
    for (int n = 1; n <= n_steps; ++n) {
        const NodalField previous = state.rho;
        state = stepWith(mesh, coeff, fracop, params, state, ctx);
        const NodalField& ref = l1_reference ? *l1_reference : previous;
        callback(state, computeDiagnostics(fracop, state, n * params.dt, ref));
    }
}

double fitDecayRate(const std::vector<std::pair<double, double>>& series, double t_start,
                    double t_end) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const auto& [t, v] : series) {
        if (t < t_start || t > t_end) continue;
        if (!(v > 0.0))
            throw std::invalid_argument("fitDecayRate: nonpositive value in window");
        const double y = std::log(v);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++m;
    }
    if (m < 2) throw std::invalid_argument("fitDecayRate: fewer than two points in window");
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fitDecayRate: degenerate time window");
    return (m * sxy - sx * sy) / denom;
}

}  // namespace fracpm
