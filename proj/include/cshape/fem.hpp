#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <optional>

#include "cshape/integrand.hpp"
#include "cshape/mesh.hpp"

namespace cshape {

struct ScalarFieldP1 {
    MeshPtr mesh;
    Eigen::VectorXd coeffs;  // one per vertex
};

// Symmetric sparse matrix; assembly guarantees exact symmetry of the
// stored pattern.
class SparseSymmetricOperator {
public:
    SparseSymmetricOperator() = default;
    explicit SparseSymmetricOperator(Eigen::SparseMatrix<double> m) : m_(std::move(m)) {
        m_.makeCompressed();
    }

    int size() const { return static_cast<int>(m_.rows()); }
    const Eigen::SparseMatrix<double>& matrix() const { return m_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_ * x; }
    double quadratic_form(const Eigen::VectorXd& x) const { return x.dot(m_ * x); }

private:
    Eigen::SparseMatrix<double> m_;
};

// Spatial coefficient function; gradient may be empty, in which case a
// central difference with step 1e-6 * diam is substituted where needed.
struct SpatialFunction {
    std::function<double(const Eigen::Vector3d&)> value;
    std::function<Eigen::Vector3d(const Eigen::Vector3d&)> gradient;
};

enum class BoundaryCondition { dirichlet_zero, neumann_reaction };

struct ProblemSpec {
    int dim = 2;
    SpatialFunction rhs;
    Integrand integrand;
    BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
};

// Second-order interior quadrature rule on the reference simplex
// (3 points in 2D, 4 points in 3D); weights sum to one.
struct QuadratureRule {
    Eigen::MatrixXd barycentric;  // npts x (d+1)
    Eigen::VectorXd weights;
};
const QuadratureRule& interior_quadrature(int dim);

SparseSymmetricOperator assemble_stiffness(const SimplicialMesh& mesh);
SparseSymmetricOperator assemble_mass(const SimplicialMesh& mesh);
Eigen::VectorXd assemble_load(const SimplicialMesh& mesh, const SpatialFunction& f);

// Preconditioned conjugate gradients; terminates when the residual
// 2-norm drops below tol * ||b||, errors after 10n iterations.
Eigen::VectorXd cg_solve(const SparseSymmetricOperator& A, const Eigen::VectorXd& b, double tol,
                         const Eigen::VectorXd* x0 = nullptr, bool jacobi_preconditioner = true);

// Solves the state equation on the mesh: the Dirichlet Poisson problem by
// symmetric elimination of boundary vertices, or the Neumann
// reaction-diffusion problem (A + M) u = b over all vertices.
ScalarFieldP1 solve_state(MeshPtr mesh, const ProblemSpec& problem, double tol,
                          const ScalarFieldP1* warm_start = nullptr);

// Solves the bc-dependent state operator against an already assembled
// dual vector (used for both the state and the adjoint equation).
ScalarFieldP1 solve_state_operator(MeshPtr mesh, const Eigen::VectorXd& rhs,
                                   BoundaryCondition bc, double tol,
                                   const ScalarFieldP1* warm_start = nullptr);

// Wraps an expression over x1..xd as a coefficient function with its
// symbolic gradient.
SpatialFunction spatial_from_expression(const Expression& f);

}  // namespace cshape
