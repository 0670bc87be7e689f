#include "fracpm/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace fracpm {

CoefficientSet CoefficientSet::isotropicLaplacian() {
    CoefficientSet c;
    c.a = [](double, double) { return std::array<double, 3>{1.0, 0.0, 1.0}; };
    c.q = [](double, double) { return 0.0; };
    c.lambda1 = 1.0;
    c.lambda2 = 1.0;
    c.q_is_zero = true;
    return c;
}

CoefficientSet CoefficientSet::diagonal(double a11, double a22, ScalarCoefficient q,
                                        bool q_is_zero) {
    CoefficientSet c;
    c.a = [a11, a22](double, double) { return std::array<double, 3>{a11, 0.0, a22}; };
    c.q = std::move(q);
    c.lambda1 = std::min(a11, a22);
    c.lambda2 = std::max(a11, a22);
    c.q_is_zero = q_is_zero;
    return c;
}

SparseOperator assembleStiffnessA(const Mesh& mesh, const CoefficientSet& coeff) {
    std::vector<SparseOperator::Triplet> t;
    t.reserve(mesh.elementCount() * 9);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        const auto& tri = mesh.triangle(k);
        const auto bc = mesh.barycenter(k);
        const auto a = coeff.a(bc[0], bc[1]);
        for (int i = 0; i < 3; ++i) {
            const auto& gi = g.grad[i];
            for (int j = 0; j < 3; ++j) {
                const auto& gj = g.grad[j];
                // grad_j . A grad_i with A = [[a11,a12],[a12,a22]]
                const double v = g.area * (a[0] * gj[0] * gi[0] +
                                           a[1] * (gj[0] * gi[1] + gj[1] * gi[0]) +
                                           a[2] * gj[1] * gi[1]);
                t.push_back({tri[i], tri[j], v});
            }
        }
    }
    return SparseOperator::fromTriplets(mesh.vertexCount(), std::move(t), true);
}

SparseOperator assembleStiffnessIso(const Mesh& mesh) {
    return assembleStiffnessA(mesh, CoefficientSet::isotropicLaplacian());
}

SparseOperator assembleMassConsistent(const Mesh& mesh) {
    std::vector<SparseOperator::Triplet> t;
    t.reserve(mesh.elementCount() * 9);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        const auto& tri = mesh.triangle(k);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                t.push_back({tri[i], tri[j], g.area / 12.0 * (i == j ? 2.0 : 1.0)});
    }
    return SparseOperator::fromTriplets(mesh.vertexCount(), std::move(t), true);
}

SparseOperator assembleMassLumped(const Mesh& mesh) {
    std::vector<double> d(mesh.vertexCount(), 0.0);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        for (int i = 0; i < 3; ++i) d[mesh.triangle(k)[i]] += g.area / 3.0;
    }
    return SparseOperator::diagonal(std::move(d));
}

SparseOperator assembleQMass(const Mesh& mesh, const CoefficientSet& coeff) {
    std::vector<SparseOperator::Triplet> t;
    t.reserve(mesh.elementCount() * 9);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        const auto& tri = mesh.triangle(k);
        const auto bc = mesh.barycenter(k);
        const double qv = coeff.q(bc[0], bc[1]);
        if (qv == 0.0) continue;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                t.push_back({tri[i], tri[j], qv * g.area / 12.0 * (i == j ? 2.0 : 1.0)});
    }
    return SparseOperator::fromTriplets(mesh.vertexCount(), std::move(t), true);
}

std::array<double, 2> elementGradient(const Mesh& mesh, const NodalField& v,
                                      std::size_t k) {
    const auto& g = mesh.geometry(k);
    const auto& tri = mesh.triangle(k);
    std::array<double, 2> out{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        out[0] += v[tri[i]] * g.grad[i][0];
        out[1] += v[tri[i]] * g.grad[i][1];
    }
    return out;
}

NodalField assembleConvectionRhs(const Mesh& mesh, const NodalField& rho,
                                 const NodalField& c, const CutoffParams& p,
                                 const CoefficientSet& coeff) {
    if (rho.size() != mesh.vertexCount() || c.size() != mesh.vertexCount())
        throw std::invalid_argument("assembleConvectionRhs: field size mismatch");
    NodalField out(mesh.vertexCount(), 0.0);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        const auto& tri = mesh.triangle(k);
        const auto bc = mesh.barycenter(k);
        const auto a = coeff.a(bc[0], bc[1]);

        const auto grad_c = elementGradient(mesh, c, k);
        const std::array<double, 2> a_grad_c = {a[0] * grad_c[0] + a[1] * grad_c[1],
                                                a[1] * grad_c[0] + a[2] * grad_c[1]};
        const ThetaElement th =
            thetaElement({rho[tri[0]], rho[tri[1]], rho[tri[2]]}, g, p);
        const auto flux = applyTheta(th, a_grad_c);

        for (int i = 0; i < 3; ++i)
            out[tri[i]] += g.area * (flux[0] * g.grad[i][0] + flux[1] * g.grad[i][1]);
    }
    return out;
}

NodalField assembleLoadMidpoint(const Mesh& mesh, const ScalarCoefficient& f) {
    NodalField b(mesh.vertexCount(), 0.0);
    for (std::size_t k = 0; k < mesh.elementCount(); ++k) {
        const auto& g = mesh.geometry(k);
        const auto& tri = mesh.triangle(k);
        const std::array<double, 2>* p[3] = {&mesh.vertex(tri[0]), &mesh.vertex(tri[1]),
                                             &mesh.vertex(tri[2])};
        // Edge midpoints opposite local vertices 0,1,2; phi_i equals 1/2 at the
        // two midpoints of edges containing i and 0 at the opposite one.
        double fm[3];
        for (int e = 0; e < 3; ++e) {
            const auto& u = *p[(e + 1) % 3];
            const auto& v = *p[(e + 2) % 3];
            fm[e] = f((u[0] + v[0]) / 2.0, (u[1] + v[1]) / 2.0);
        }
        for (int i = 0; i < 3; ++i)
            b[tri[i]] += g.area / 3.0 * 0.5 * (fm[(i + 1) % 3] + fm[(i + 2) % 3]);
    }
    return b;
}

}  // namespace fracpm
