#pragma once

#include <array>
#include <functional>

#include "fracpm/cutoffs.hpp"
#include "fracpm/mesh.hpp"
#include "fracpm/sparse.hpp"

namespace fracpm {

/// Symmetric 2x2 diffusion tensor sampled at a point: (a11, a12, a22).
using MatrixCoefficient = std::function<std::array<double, 3>(double, double)>;
using ScalarCoefficient = std::function<double(double, double)>;

/// Diffusion tensor A, potential Q and the declared ellipticity bounds
/// Lambda1 |v|^2 <= v'Av <= Lambda2 |v|^2. q_is_zero selects the kernel
/// case: with Q == 0 the operator annihilates constants.
struct CoefficientSet {
    MatrixCoefficient a;
    ScalarCoefficient q;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    bool q_is_zero = false;

    static CoefficientSet isotropicLaplacian();
    static CoefficientSet diagonal(double a11, double a22, ScalarCoefficient q,
                                   bool q_is_zero);
};

/// Stiffness with the full tensor A sampled at element barycenters:
/// entry (i,j) = sum_K |K| grad phi_j . A(bary) grad phi_i.
SparseOperator assembleStiffnessA(const Mesh& mesh, const CoefficientSet& coeff);

/// Stiffness with A = identity.
SparseOperator assembleStiffnessIso(const Mesh& mesh);

/// Consistent P1 mass, local block |K|/12 [[2,1,1],[1,2,1],[1,1,2]].
SparseOperator assembleMassConsistent(const Mesh& mesh);

/// Lumped (vertex-quadrature) mass, D_ii = sum_{K owning i} |K|/3.
SparseOperator assembleMassLumped(const Mesh& mesh);

/// Q-weighted mass: Q(bary_K) times the local consistent mass block.
SparseOperator assembleQMass(const Mesh& mesh, const CoefficientSet& coeff);

/// Convection load vector of the scheme: component
/// i = sum_K |K| (Theta(rho)|_K A(bary) grad c|_K) . grad phi_i.
/// Exact for P1 data since all gradients are element-constant.
NodalField assembleConvectionRhs(const Mesh& mesh, const NodalField& rho,
                                 const NodalField& c, const CutoffParams& p,
                                 const CoefficientSet& coeff);

/// Element-constant gradient of a nodal field on element k.
std::array<double, 2> elementGradient(const Mesh& mesh, const NodalField& v,
                                      std::size_t k);

/// Load vector b_i = int f phi_i via the 3-point edge-midpoint rule (exact
/// for quadratics).
NodalField assembleLoadMidpoint(const Mesh& mesh, const ScalarCoefficient& f);

}  // namespace fracpm
