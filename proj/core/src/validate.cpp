#include "fracpm/validate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fracpm/config.hpp"
#include "fracpm/cutoffs.hpp"
#include "fracpm/fem.hpp"
#include "fracpm/fracop.hpp"
#include "fracpm/stepper.hpp"

namespace fracpm {

namespace {

class Reporter {
public:
    explicit Reporter(ValidationReport& r) : report_(r) {}

    void check(const std::string& name, bool ok, const std::string& detail = "") {
        report_.checks.push_back({name, ok, detail});
    }

    template <typename F>
    void checkNoThrow(const std::string& name, F&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            report_.checks.push_back({name, false, e.what()});
            return;
        }
        report_.checks.push_back({name, true, ""});
    }

private:
    ValidationReport& report_;
};

double maxAngle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                const std::array<double, 2>& c) {
    auto angle = [](const std::array<double, 2>& p, const std::array<double, 2>& q,
                    const std::array<double, 2>& r) {
        const double ux = q[0] - p[0], uy = q[1] - p[1];
        const double vx = r[0] - p[0], vy = r[1] - p[1];
        return std::acos((ux * vx + uy * vy) /
                         (std::hypot(ux, uy) * std::hypot(vx, vy)));
    };
    return std::max({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

void meshChecks(Reporter& rep) {
    const Mesh unit = Mesh::buildRect(0, 1, 0, 1, 1, 1);
    rep.check("mesh.unit_counts", unit.vertexCount() == 4 && unit.elementCount() == 2);

    for (int n : {4, 16, 33}) {
        const Mesh m = Mesh::buildRect(-2, 2, -2, 2, n, n);
        double area = 0.0, worst_angle = 0.0, min_inradius = 1e300, max_diam = 0.0;
        double max_grad_sum = 0.0;
        for (std::size_t k = 0; k < m.elementCount(); ++k) {
            const auto& g = m.geometry(k);
            area += g.area;
            const auto& t = m.triangle(k);
            worst_angle = std::max(
                worst_angle, maxAngle(m.vertex(t[0]), m.vertex(t[1]), m.vertex(t[2])));
            double edges[3];
            for (int e = 0; e < 3; ++e) {
                const auto& p = m.vertex(t[e]);
                const auto& q = m.vertex(t[(e + 1) % 3]);
                edges[e] = std::hypot(q[0] - p[0], q[1] - p[1]);
            }
            const double perim = edges[0] + edges[1] + edges[2];
            min_inradius = std::min(min_inradius, 2.0 * g.area / perim);
            max_diam = std::max(max_diam, *std::max_element(edges, edges + 3));
            double gx = 0.0, gy = 0.0;
            for (int j = 0; j < 3; ++j) {
                gx += g.grad[j][0];
                gy += g.grad[j][1];
            }
            max_grad_sum = std::max(max_grad_sum, std::hypot(gx, gy));
        }
        std::ostringstream tag;
        tag << "mesh.n" << n;
        rep.check(tag.str() + ".area", std::abs(area - 16.0) <= 1e-12 * 16.0);
        rep.check(tag.str() + ".weakly_acute", worst_angle <= M_PI / 2.0 + 1e-12);
        rep.check(tag.str() + ".quasi_uniform", max_diam / min_inradius <= 10.0);
        rep.check(tag.str() + ".partition_of_unity", max_grad_sum <= 1e-12);
    }
}

void cutoffChecks(Reporter& rep, int grid_points) {
    const CutoffParams p(0.1, 2.0);

    double worst_identity = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double s = -1.0 + 4.0 * i / static_cast<double>(grid_points - 1);
        worst_identity =
            std::max(worst_identity, std::abs(betaDeltaL(s, p) * ddGReg(s, p) - 1.0));
    }
    rep.check("cutoffs.beta_ddG_identity", worst_identity <= 1e-14);
    rep.check("cutoffs.G_values", entropyG(1.0) == 0.0 && entropyG(0.0) == 1.0 &&
                                      std::abs(gReg(1.0, p)) <= 1e-15);

    bool ddg_floor = true, monotone = true;
    for (int i = 0; i < 1000; ++i) {
        const double s = -2.0 + 6.0 * i / 999.0;
        if (ddGReg(s, p) < 1.0 / p.L - 1e-14) ddg_floor = false;
        if (i > 0 && dGReg(s, p) <= dGReg(s - 6.0 / 999.0, p)) monotone = false;
    }
    rep.check("cutoffs.ddG_floor", ddg_floor);
    rep.check("cutoffs.dG_monotone", monotone);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> val(-1.0, 3.0);
    double worst_fe1 = 0.0;
    bool tilde_bounds = true;
    const int n_elems = 1000;
    for (int trial = 0; trial < n_elems; ++trial) {
        std::array<double, 2> a{coord(rng), coord(rng)};
        std::array<double, 2> b{coord(rng), coord(rng)};
        std::array<double, 2> c{coord(rng), coord(rng)};
        const double det =
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (std::abs(det) < 1e-3) continue;
        if (det < 0.0) std::swap(b, c);
        const ElementGeometry geo = computeElementGeometry(a, b, c);

        const std::array<double, 3> phi{val(rng), val(rng), val(rng)};
        const ThetaElement th = thetaElement(phi, geo, p);
        for (double d : th.theta_tilde)
            if (d < p.delta - 1e-12 || d > p.L + 1e-12) tilde_bounds = false;

        // theta * grad(pi_h dGReg(phi)) == grad(phi) on the element
        std::array<double, 2> grad_g{0.0, 0.0}, grad_phi{0.0, 0.0};
        for (int j = 0; j < 3; ++j) {
            grad_g[0] += dGReg(phi[j], p) * geo.grad[j][0];
            grad_g[1] += dGReg(phi[j], p) * geo.grad[j][1];
            grad_phi[0] += phi[j] * geo.grad[j][0];
            grad_phi[1] += phi[j] * geo.grad[j][1];
        }
        const auto lhs = applyTheta(th, grad_g);
        const double scale = std::max(1.0, std::hypot(grad_phi[0], grad_phi[1]));
        worst_fe1 = std::max(worst_fe1, std::hypot(lhs[0] - grad_phi[0],
                                                   lhs[1] - grad_phi[1]) / scale);
    }
    rep.check("cutoffs.theta_tilde_bounds", tilde_bounds);
    rep.check("cutoffs.theta_gradient_identity", worst_fe1 <= 1e-12);

    // Jensen at random interior points of random elements.
    bool jensen = true;
    std::uniform_real_distribution<double> bary(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        double l0 = bary(rng), l1 = bary(rng);
        if (l0 + l1 > 1.0) {
            l0 = 1.0 - l0;
            l1 = 1.0 - l1;
        }
        const double l2 = 1.0 - l0 - l1;
        const std::array<double, 3> phi{val(rng), val(rng), val(rng)};
        const double interp = phi[0] * l0 + phi[1] * l1 + phi[2] * l2;
        const double interp_sq =
            phi[0] * phi[0] * l0 + phi[1] * phi[1] * l1 + phi[2] * phi[2] * l2;
        if (interp * interp > interp_sq + 1e-14) jensen = false;
    }
    rep.check("cutoffs.vertex_quadrature_jensen", jensen);
}

void femChecks(Reporter& rep) {
    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 12, 12);
    CoefficientSet aniso = CoefficientSet::diagonal(
        10.0, 0.1, [](double x, double y) { return 100.0 * (x * x + y * y); }, false);

    const SparseOperator ka = assembleStiffnessA(m, aniso);
    const SparseOperator kiso = assembleStiffnessIso(m);
    const SparseOperator mass = assembleMassConsistent(m);
    const SparseOperator lumped = assembleMassLumped(m);

    double worst_row = 0.0;
    for (std::size_t i = 0; i < ka.size(); ++i)
        worst_row = std::max(worst_row, std::abs(ka.rowSum(i)));
    rep.check("fem.stiffness_row_sums", worst_row <= 1e-10 * ka.maxAbsEntry());
    rep.check("fem.mass_total", std::abs(mass.sumAllEntries() - 16.0) <= 1e-12 * 16.0);
    double trace = 0.0;
    for (double v : lumped.values()) trace += v;
    rep.check("fem.lumped_trace", std::abs(trace - 16.0) <= 1e-12 * 16.0);
    rep.check("fem.symmetry", ka.symmetryDefect() <= 1e-12 && mass.symmetryDefect() == 0.0);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    bool elliptic = true;
    for (int trial = 0; trial < 20; ++trial) {
        NodalField v(m.vertexCount());
        double mean = 0.0;
        for (double& x : v) mean += (x = gauss(rng));
        mean /= v.size();
        for (double& x : v) x -= mean;
        double viso = 0.0, va = 0.0;
        const NodalField kiv = kiso.apply(v), kav = ka.apply(v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            viso += v[i] * kiv[i];
            va += v[i] * kav[i];
        }
        if (va < aniso.lambda1 * viso - 1e-10 || va > aniso.lambda2 * viso + 1e-10)
            elliptic = false;
    }
    rep.check("fem.ellipticity_transfer", elliptic);

    CoefficientSet q_one = CoefficientSet::isotropicLaplacian();
    q_one.q = [](double, double) { return 1.0; };
    q_one.q_is_zero = false;
    const SparseOperator qm = assembleQMass(m, q_one);
    const SparseOperator diff = SparseOperator::add(qm, mass, -1.0);
    rep.check("fem.qmass_unit_equals_mass", diff.maxAbsEntry() <= 1e-14);
}

void fracopChecks(Reporter& rep) {
    struct Preset {
        const char* name;
        CoefficientSet coeff;
    };
    std::vector<Preset> presets;
    presets.push_back({"iso_q0", CoefficientSet::isotropicLaplacian()});
    presets.push_back(
        {"aniso_qquad",
         CoefficientSet::diagonal(
             10.0, 0.1, [](double x, double y) { return 100.0 * (x * x + y * y); },
             false)});
    presets.push_back(
        {"iso_qstep",
         CoefficientSet::diagonal(
             1.0, 1.0, [](double, double y) { return y > 0.0 ? 100.0 : 1.0; }, false)});

    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 8, 8);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;

    for (auto& preset : presets) {
        FracOperator op = buildFracOperator(m, preset.coeff, 0.75);
        auto [lo, hi] = estimateSpectralInterval(op);
        op.lambda_lo = lo;
        op.lambda_hi = hi;
        attachRationalApprox(op, 1e-9);

        double worst = 0.0;
        bool stable = true;
        for (int trial = 0; trial < 5; ++trial) {
            NodalField f(m.vertexCount());
            for (double& x : f) x = gauss(rng);
            const NodalField fast = fracInverseApply(op, f);
            const NodalField exact = fracInverseDenseOracle(op, f);
            double num = 0.0, den = 0.0, fd_norm = 0.0, c_norm = 0.0;
            const NodalField me = op.mass.apply(exact);
            const NodalField fd = projectDiamond(op, f);
            const NodalField mfd = op.mass.apply(fd);
            const NodalField mc = op.mass.apply(fast);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = fast[i] - exact[i];
                num += d * d;
                den += exact[i] * me[i];
                fd_norm += fd[i] * mfd[i];
                c_norm += fast[i] * mc[i];
            }
            worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
            if (std::sqrt(c_norm) >
                1.05 * std::pow(op.lambda_lo, -op.s) * std::sqrt(fd_norm))
                stable = false;
        }
        rep.check(std::string("fracop.oracle_agreement.") + preset.name, worst <= 1e-7,
                  "rel M-norm err " + std::to_string(worst));
        rep.check(std::string("fracop.stability_bound.") + preset.name, stable);
    }

    RationalApprox r = buildRationalApprox(0.75, 0.6, 2.6e4, 1e-8);
    rep.check("fracop.rational_certificate", r.max_rel_error <= 1e-8,
              "degree " + std::to_string(r.degree));
}

void fullChecks(Reporter& rep) {
    // First nonzero Neumann eigenvalue of the Laplacian on (-2,2)^2.
    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 64, 64);
    FracOperator op = buildFracOperator(m, CoefficientSet::isotropicLaplacian(), 0.75);
    auto [lo, hi] = estimateSpectralInterval(op, 1e-8);
    const double exact = M_PI * M_PI / 16.0;
    rep.check("spectral.neumann_eigenvalue", std::abs(lo - exact) <= 0.01 * exact,
              "lambda_lo " + std::to_string(lo));
    rep.check("spectral.interval_order", hi >= lo);

    // Constant steady state in the zero-potential case.
    const Mesh ms = Mesh::buildRect(-2, 2, -2, 2, 16, 16);
    const CoefficientSet coeff =
        CoefficientSet::diagonal(10.0, 0.1, [](double, double) { return 0.0; }, true);
    FracOperator fop = buildFracOperator(ms, coeff, 0.75);
    auto [lo2, hi2] = estimateSpectralInterval(fop);
    fop.lambda_lo = lo2;
    fop.lambda_hi = hi2;
    attachRationalApprox(fop, 1e-9);

    SchemeParams params{.dt = 0.05,
                        .t_final = 0.25,
                        .mu = 1.0,
                        .cutoffs = CutoffParams(1e-3, 2.0),
                        .s = 0.75};
    bool steady = true, mass_ok = true;
    const NodalField ones(ms.vertexCount(), 1.0);
    run(ms, coeff, fop, params, ones, nullptr,
        [&](const SimState& st, const Diagnostics& d) {
            for (double v : st.rho)
                if (std::abs(v - 1.0) > 1e-8) steady = false;
            if (std::abs(d.mass - 1.0) > 1e-9) mass_ok = false;
        });
    rep.check("stepper.constant_steady_state", steady);
    rep.check("stepper.mass_conserved", mass_ok);
}

}  // namespace

bool ValidationReport::allPassed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport runValidation(ValidationLevel level) {
    ValidationReport report;
    Reporter rep(report);
    meshChecks(rep);
    cutoffChecks(rep, level == ValidationLevel::Fast ? 10000 : 100000);
    femChecks(rep);
    fracopChecks(rep);
    if (level == ValidationLevel::Full) fullChecks(rep);
    return report;
}

}  // namespace fracpm
