#pragma once

#include "cshape/convexity.hpp"
#include "cshape/fem.hpp"
#include "cshape/qp.hpp"
#include "cshape/shapecalc.hpp"

namespace cshape {

// Lame parameters and damping of the elasticity inner product
//   E(V,W) = int 2 mu eps(V):eps(W) + lambda tr(eps V) tr(eps W) + delta V.W dx.
// mu and delta must be positive for coercivity; lambda may be zero.
struct ElasticityParams {
    double mu = 1.0;
    double lambda = 0.0;
    double delta = 0.2;
};

// Vector P1 elasticity matrix over stacked vertex displacements
// (vertex-major layout matching VectorFieldP1).
SparseSymmetricOperator assemble_elasticity(const SimplicialMesh& mesh,
                                            const ElasticityParams& params);

// Normal-trace operator N: boundary scalars F -> dual of vector fields,
// <N F, V> = int_boundary F (V . n) ds, columns indexed by the ascending
// boundary vertex list.
Eigen::SparseMatrix<double> assemble_normal_trace(const SimplicialMesh& mesh);

// Direction-finding QP over z = (V, F):
//   minimize 1/2 E(V,V) + <grad, V>
//   s.t.     C_i + t0 DC_i V <= 0     (one row per convexity constraint)
//            E V - N F = 0            (normal-force restriction)
// Pass an empty ConstraintSystem to drop the convexity rows.
QuadraticProgram build_direction_qp(const SparseSymmetricOperator& elasticity,
                                    const Eigen::SparseMatrix<double>& normal_trace,
                                    const ShapeGradient& grad,
                                    const ConstraintSystem& constraints, double t0);

}  // namespace cshape
