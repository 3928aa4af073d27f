#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "cshape/mesh.hpp"

namespace cshape {

// Convexity constraints C_i(X) <= 0 on the boundary vertex coordinates.
// 2D: one cross-product value per boundary vertex of the CCW loop
// (quadratic in X, 6 Jacobian nonzeros). 3D: one negated triple product
// per outer edge (cubic in X, 12 nonzeros); the mesh is convex iff all
// values are <= 0.
struct ConstraintSystem {
    Eigen::VectorXd values;                  // N
    Eigen::SparseMatrix<double> jacobian;    // N x (d*nv); empty when values-only
    std::vector<std::vector<int>> index_map; // constraint -> involved vertex ids
};

ConstraintSystem constraint_values(const SimplicialMesh& mesh);
ConstraintSystem constraint_jacobian(const SimplicialMesh& mesh);

bool is_convex(const SimplicialMesh& mesh, double tol);

// 2D repair: boundary vertices strictly inside the convex hull of the
// boundary vertex set are projected onto the hull boundary; interior
// vertices and already-convex meshes are untouched.
MeshPtr convexify(const SimplicialMesh& mesh);

}  // namespace cshape
