#include "cshape/deform.hpp"

#include <vector>

#include "cshape/errors.hpp"

namespace cshape {

SparseSymmetricOperator assemble_elasticity(const SimplicialMesh& mesh,
                                            const ElasticityParams& params) {
    if (!(params.mu > 0) || !(params.delta > 0) || params.lambda < 0)
        fail(ErrorKind::invalid_argument,
             "elasticity parameters must satisfy mu > 0, delta > 0, lambda >= 0");
    const int d = mesh.dim();
    const int nv = mesh.num_vertices();
    const double mass_denom = (d + 1.0) * (d + 2.0);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.num_cells()) * (d + 1) * (d + 1) * d * d);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        const Eigen::MatrixXd& grads = mesh.hat_gradients(c);
        const double vol = mesh.cell_volume(c);
        for (int i = 0; i <= d; ++i) {
            for (int j = 0; j <= d; ++j) {
                const double gij = grads.row(i).dot(grads.row(j));
                const double mass = vol * (i == j ? 2.0 : 1.0) / mass_denom;
                for (int a = 0; a < d; ++a) {
                    for (int b = 0; b < d; ++b) {
                        // 2 mu sym(e_a grad_i) : sym(e_b grad_j)
                        double val = params.mu * vol *
                                     ((a == b ? gij : 0.0) + grads(i, b) * grads(j, a));
                        val += params.lambda * vol * grads(i, a) * grads(j, b);
                        if (a == b) val += params.delta * mass;
                        trip.emplace_back(d * cell[i] + a, d * cell[j] + b, val);
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> E(static_cast<Eigen::Index>(d) * nv,
                                  static_cast<Eigen::Index>(d) * nv);
    E.setFromTriplets(trip.begin(), trip.end());
    return SparseSymmetricOperator(std::move(E));
}

Eigen::SparseMatrix<double> assemble_normal_trace(const SimplicialMesh& mesh) {
    const int d = mesh.dim();
    const BoundaryTopology& bnd = mesh.boundary();
    const int nb = static_cast<int>(bnd.boundary_vertices.size());
    std::vector<int> bindex(mesh.num_vertices(), -1);
    for (int i = 0; i < nb; ++i) bindex[bnd.boundary_vertices[i]] = i;

    // facet trace mass: measure * (1 + delta_ij) / (d (d+1))
    const double denom = d * (d + 1.0);
    std::vector<Eigen::Triplet<double>> trip;
    for (int f = 0; f < bnd.facets.rows(); ++f) {
        const double meas = bnd.facet_measures[f];
        for (int i = 0; i < d; ++i) {
            const int vi = bnd.facets(f, i);
            for (int j = 0; j < d; ++j) {
                const int vj = bnd.facets(f, j);
                const double mass = meas * (i == j ? 2.0 : 1.0) / denom;
                for (int k = 0; k < d; ++k)
                    trip.emplace_back(d * vi + k, bindex[vj], mass * bnd.facet_normals(f, k));
            }
        }
    }
    Eigen::SparseMatrix<double> N(static_cast<Eigen::Index>(d) * mesh.num_vertices(), nb);
    N.setFromTriplets(trip.begin(), trip.end());
    N.makeCompressed();
    return N;
}

QuadraticProgram build_direction_qp(const SparseSymmetricOperator& elasticity,
                                    const Eigen::SparseMatrix<double>& normal_trace,
                                    const ShapeGradient& grad,
                                    const ConstraintSystem& constraints, double t0) {
    if (!(t0 > 0)) fail(ErrorKind::invalid_argument, "build_direction_qp: t0 must be positive");
    const Eigen::Index nV = grad.coeffs.size();
    const Eigen::Index nF = normal_trace.cols();
    if (elasticity.size() != nV || normal_trace.rows() != nV)
        fail(ErrorKind::invalid_argument, "build_direction_qp: operator dimension mismatch");
    const Eigen::Index nz = nV + nF;
    const Eigen::Index nc = constraints.values.size();
    if (nc > 0 && constraints.jacobian.cols() != nV)
        fail(ErrorKind::invalid_argument, "build_direction_qp: constraint Jacobian mismatch");

    QuadraticProgram qp;
    qp.hessian.resize(nz, nz);
    {
        std::vector<Eigen::Triplet<double>> trip;
        const auto& E = elasticity.matrix();
        trip.reserve(E.nonZeros());
        for (int k = 0; k < E.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(E, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
        qp.hessian.setFromTriplets(trip.begin(), trip.end());
    }
    qp.linear = Eigen::VectorXd::Zero(nz);
    qp.linear.head(nV) = grad.coeffs;

    // t0 * DC_i V <= -C_i
    qp.ineq_matrix.resize(nc, nz);
    if (nc > 0) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(constraints.jacobian.nonZeros());
        for (int k = 0; k < constraints.jacobian.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(constraints.jacobian, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  t0 * it.value());
        qp.ineq_matrix.setFromTriplets(trip.begin(), trip.end());
        qp.ineq_bound = -constraints.values;
    } else {
        qp.ineq_bound.resize(0);
    }

    // E V - N F = 0
    qp.eq_matrix.resize(nV, nz);
    {
        std::vector<Eigen::Triplet<double>> trip;
        const auto& E = elasticity.matrix();
        trip.reserve(E.nonZeros() + normal_trace.nonZeros());
        for (int k = 0; k < E.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(E, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
        for (int k = 0; k < normal_trace.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(normal_trace, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(nV + it.col()),
                                  -it.value());
        qp.eq_matrix.setFromTriplets(trip.begin(), trip.end());
    }
    qp.eq_rhs = Eigen::VectorXd::Zero(nV);
    return qp;
}

}  // namespace cshape
