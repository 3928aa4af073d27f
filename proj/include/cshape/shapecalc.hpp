#pragma once

#include "cshape/fem.hpp"

namespace cshape {

// Assembled coefficients of the linear functional V |-> J'(Omega; V) on
// nodal displacement fields, vertex-major like VectorFieldP1.
struct ShapeGradient {
    MeshPtr mesh;
    Eigen::VectorXd coeffs;  // d*nv
};

// Integral of j(x, u_h, grad u_h) with the same quadrature rule as the
// load assembly; the gradient is the per-cell constant one.
double evaluate_objective(const SimplicialMesh& mesh, const ScalarFieldP1& u,
                          const Integrand& integrand);

// Discrete adjoint state. Sign convention: the right side is
// -(j_u, w) - (j_v, grad w), which together with the derivative formula
// below is the pairing validated by finite differences.
ScalarFieldP1 solve_adjoint(MeshPtr mesh, const ScalarFieldP1& u, const ProblemSpec& problem,
                            double tol, const ScalarFieldP1* warm_start = nullptr);

// Exact derivative of the discrete objective-with-quadrature pipeline
// with respect to vertex displacements. For the Neumann reaction problem
// the reaction term contributes an extra u p div(V) integral.
ShapeGradient shape_derivative(MeshPtr mesh, const ScalarFieldP1& u, const ScalarFieldP1& p,
                               const ProblemSpec& problem);

double pair(const ShapeGradient& grad, const VectorFieldP1& V);

}  // namespace cshape
