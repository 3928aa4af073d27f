#include "cshape/fem.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "cshape/errors.hpp"

namespace cshape {

const QuadratureRule& interior_quadrature(int dim) {
    static const QuadratureRule rule2 = [] {
        QuadratureRule r;
        r.barycentric.resize(3, 3);
        const double a = 2.0 / 3.0, b = 1.0 / 6.0;
        r.barycentric << a, b, b, b, a, b, b, b, a;
        r.weights = Eigen::Vector3d::Constant(1.0 / 3.0);
        return r;
    }();
    static const QuadratureRule rule3 = [] {
        QuadratureRule r;
        r.barycentric.resize(4, 4);
        const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
        const double b = (5.0 - std::sqrt(5.0)) / 20.0;
        r.barycentric << a, b, b, b, b, a, b, b, b, b, a, b, b, b, b, a;
        r.weights = Eigen::Vector4d::Constant(0.25);
        return r;
    }();
    if (dim == 2) return rule2;
    if (dim == 3) return rule3;
    fail(ErrorKind::invalid_argument, "quadrature only defined for dim 2 or 3");
}

SparseSymmetricOperator assemble_stiffness(const SimplicialMesh& mesh) {
    const int d = mesh.dim();
    const int nv = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.num_cells()) * (d + 1) * (d + 1));
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        const Eigen::MatrixXd& grads = mesh.hat_gradients(c);
        const double vol = mesh.cell_volume(c);
        for (int i = 0; i <= d; ++i)
            for (int j = 0; j <= d; ++j)
                trip.emplace_back(cell[i], cell[j], vol * grads.row(i).dot(grads.row(j)));
    }
    Eigen::SparseMatrix<double> A(nv, nv);
    A.setFromTriplets(trip.begin(), trip.end());
    return SparseSymmetricOperator(std::move(A));
}

SparseSymmetricOperator assemble_mass(const SimplicialMesh& mesh) {
    const int d = mesh.dim();
    const int nv = mesh.num_vertices();
    // exact P1 mass: |T| (1 + delta_ij) / ((d+1)(d+2))
    const double denom = (d + 1.0) * (d + 2.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.num_cells()) * (d + 1) * (d + 1));
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        const double vol = mesh.cell_volume(c);
        for (int i = 0; i <= d; ++i)
            for (int j = 0; j <= d; ++j)
                trip.emplace_back(cell[i], cell[j], vol * (i == j ? 2.0 : 1.0) / denom);
    }
    Eigen::SparseMatrix<double> M(nv, nv);
    M.setFromTriplets(trip.begin(), trip.end());
    return SparseSymmetricOperator(std::move(M));
}

Eigen::VectorXd assemble_load(const SimplicialMesh& mesh, const SpatialFunction& f) {
    const int d = mesh.dim();
    const QuadratureRule& quad = interior_quadrature(d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        const double vol = mesh.cell_volume(c);
        for (int q = 0; q < quad.weights.size(); ++q) {
            Eigen::Vector3d x = Eigen::Vector3d::Zero();
            for (int k = 0; k <= d; ++k)
                x.head(d) += quad.barycentric(q, k) * mesh.vertices().row(cell[k]).transpose();
            double val;
            try {
                val = f.value(x);
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "rhs evaluation failed on cell " << c << ": " << e.what();
                fail(ErrorKind::numeric, os.str());
            }
            if (!std::isfinite(val)) {
                std::ostringstream os;
                os << "rhs evaluation returned non-finite value on cell " << c;
                fail(ErrorKind::numeric, os.str());
            }
            for (int k = 0; k <= d; ++k)
                b[cell[k]] += quad.weights[q] * vol * val * quad.barycentric(q, k);
        }
    }
    return b;
}

Eigen::VectorXd cg_solve(const SparseSymmetricOperator& A, const Eigen::VectorXd& b, double tol,
                         const Eigen::VectorXd* x0, bool jacobi_preconditioner) {
    const Eigen::Index n = b.size();
    if (A.size() != n) fail(ErrorKind::invalid_argument, "cg_solve: dimension mismatch");
    const double bnorm = b.norm();
    if (bnorm == 0) return Eigen::VectorXd::Zero(n);

    Eigen::VectorXd invdiag(n);
    if (jacobi_preconditioner) {
        const Eigen::VectorXd diag = A.matrix().diagonal();
        for (Eigen::Index i = 0; i < n; ++i) invdiag[i] = diag[i] > 0 ? 1.0 / diag[i] : 1.0;
    }

    Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b - A.apply(x);
    if (r.norm() <= tol * bnorm) return x;
    Eigen::VectorXd z = jacobi_preconditioner ? Eigen::VectorXd(invdiag.cwiseProduct(r)) : r;
    Eigen::VectorXd p = z;
    double rz = r.dot(z);

    const long max_iter = 10 * static_cast<long>(n);
    for (long it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd Ap = A.apply(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0)) fail(ErrorKind::numeric, "cg_solve: operator is not positive definite");
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        if (r.norm() <= tol * bnorm) return x;
        z = jacobi_preconditioner ? Eigen::VectorXd(invdiag.cwiseProduct(r)) : r;
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    fail(ErrorKind::numeric, "cg_solve: no convergence within 10n iterations");
}

namespace {

// Restriction of a symmetric operator to non-boundary vertices.
struct DirichletSystem {
    std::vector<int> free_index;  // vertex -> free dof or -1
    std::vector<int> free_verts;
    SparseSymmetricOperator A;
};

DirichletSystem reduce_dirichlet(const SimplicialMesh& mesh, const Eigen::SparseMatrix<double>& A) {
    DirichletSystem sys;
    const int nv = mesh.num_vertices();
    sys.free_index.assign(nv, -1);
    std::vector<char> fixed(nv, 0);
    for (int v : mesh.boundary().boundary_vertices) fixed[v] = 1;
    for (int v = 0; v < nv; ++v)
        if (!fixed[v]) {
            sys.free_index[v] = static_cast<int>(sys.free_verts.size());
            sys.free_verts.push_back(v);
        }
    if (sys.free_verts.empty())
        fail(ErrorKind::numeric, "Dirichlet problem has no interior vertices; refine the mesh");

    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < A.outerSize(); ++col) {
        if (sys.free_index[col] < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (sys.free_index[row] < 0) continue;
            trip.emplace_back(sys.free_index[row], sys.free_index[col], it.value());
        }
    }
    Eigen::SparseMatrix<double> Af(sys.free_verts.size(), sys.free_verts.size());
    Af.setFromTriplets(trip.begin(), trip.end());
    sys.A = SparseSymmetricOperator(std::move(Af));
    return sys;
}

}  // namespace

ScalarFieldP1 solve_state_operator(MeshPtr mesh, const Eigen::VectorXd& rhs,
                                   BoundaryCondition bc, double tol,
                                   const ScalarFieldP1* warm_start) {
    if (!mesh) fail(ErrorKind::invalid_argument, "solve_state: null mesh");
    if (!(tol > 0)) fail(ErrorKind::invalid_argument, "solve_state: tolerance must be positive");
    const int nv = mesh->num_vertices();
    if (rhs.size() != nv) fail(ErrorKind::invalid_argument, "solve_state: rhs size mismatch");

    const SparseSymmetricOperator A = assemble_stiffness(*mesh);
    ScalarFieldP1 out{mesh, Eigen::VectorXd::Zero(nv)};
    if (bc == BoundaryCondition::dirichlet_zero) {
        const DirichletSystem sys = reduce_dirichlet(*mesh, A.matrix());
        const int nfree = static_cast<int>(sys.free_verts.size());
        Eigen::VectorXd bf(nfree), w0;
        for (int i = 0; i < nfree; ++i) bf[i] = rhs[sys.free_verts[i]];
        const Eigen::VectorXd* x0 = nullptr;
        if (warm_start && warm_start->coeffs.size() == nv) {
            w0.resize(nfree);
            for (int i = 0; i < nfree; ++i) w0[i] = warm_start->coeffs[sys.free_verts[i]];
            x0 = &w0;
        }
        const Eigen::VectorXd uf = cg_solve(sys.A, bf, tol, x0);
        for (int i = 0; i < nfree; ++i) out.coeffs[sys.free_verts[i]] = uf[i];
    } else {
        const SparseSymmetricOperator M = assemble_mass(*mesh);
        SparseSymmetricOperator AM(Eigen::SparseMatrix<double>(A.matrix() + M.matrix()));
        const Eigen::VectorXd* x0 =
            (warm_start && warm_start->coeffs.size() == nv) ? &warm_start->coeffs : nullptr;
        out.coeffs = cg_solve(AM, rhs, tol, x0);
    }
    return out;
}

ScalarFieldP1 solve_state(MeshPtr mesh, const ProblemSpec& problem, double tol,
                          const ScalarFieldP1* warm_start) {
    if (!mesh) fail(ErrorKind::invalid_argument, "solve_state: null mesh");
    if (problem.dim != mesh->dim())
        fail(ErrorKind::invalid_argument, "solve_state: problem dimension does not match mesh");
    return solve_state_operator(mesh, assemble_load(*mesh, problem.rhs), problem.bc, tol,
                                warm_start);
}

SpatialFunction spatial_from_expression(const Expression& f) {
    struct Data {
        Expression value;
        Expression dx[3];
    };
    auto data = std::make_shared<Data>();
    data->value = f;
    const ExprVar xs[3] = {ExprVar::x1, ExprVar::x2, ExprVar::x3};
    for (int k = 0; k < 3; ++k) data->dx[k] = f.derivative(xs[k]);

    SpatialFunction out;
    out.value = [data](const Eigen::Vector3d& x) {
        ExprEvalPoint e;
        for (int k = 0; k < 3; ++k) e.x[k] = x[k];
        return data->value.eval(e);
    };
    out.gradient = [data](const Eigen::Vector3d& x) {
        ExprEvalPoint e;
        for (int k = 0; k < 3; ++k) e.x[k] = x[k];
        return Eigen::Vector3d(data->dx[0].eval(e), data->dx[1].eval(e), data->dx[2].eval(e));
    };
    return out;
}

Integrand integrand_from_expression(const Expression& j) {
    struct Partials {
        Expression value, du;
        Expression dx[3], dg[3];
    };
    auto p = std::make_shared<Partials>();
    p->value = j;
    p->du = j.derivative(ExprVar::u);
    const ExprVar xs[3] = {ExprVar::x1, ExprVar::x2, ExprVar::x3};
    const ExprVar gs[3] = {ExprVar::g1, ExprVar::g2, ExprVar::g3};
    for (int k = 0; k < 3; ++k) {
        p->dx[k] = j.derivative(xs[k]);
        p->dg[k] = j.derivative(gs[k]);
    }

    auto point = [](const IntegrandArgs& a) {
        ExprEvalPoint e;
        for (int k = 0; k < 3; ++k) {
            e.x[k] = a.x[k];
            e.g[k] = a.g[k];
        }
        e.u = a.u;
        return e;
    };

    Integrand out;
    out.value = [p, point](const IntegrandArgs& a) { return p->value.eval(point(a)); };
    out.du = [p, point](const IntegrandArgs& a) { return p->du.eval(point(a)); };
    out.dx = [p, point](const IntegrandArgs& a) {
        const ExprEvalPoint e = point(a);
        return Eigen::Vector3d(p->dx[0].eval(e), p->dx[1].eval(e), p->dx[2].eval(e));
    };
    out.dg = [p, point](const IntegrandArgs& a) {
        const ExprEvalPoint e = point(a);
        return Eigen::Vector3d(p->dg[0].eval(e), p->dg[1].eval(e), p->dg[2].eval(e));
    };
    return out;
}

}  // namespace cshape
