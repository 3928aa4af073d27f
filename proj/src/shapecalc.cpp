#include "cshape/shapecalc.hpp"

#include <cmath>
#include <sstream>

#include "cshape/errors.hpp"

namespace cshape {

namespace {

struct CellSample {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double u = 0;
    double p = 0;
    Eigen::VectorXd bary;  // hat values at the point
};

// Quadrature samples of a cell with state (and optionally adjoint) values
// interpolated at the points; the P1 gradient is cell-constant.
std::vector<CellSample> cell_samples(const SimplicialMesh& mesh, int c, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd* p) {
    const int d = mesh.dim();
    const QuadratureRule& quad = interior_quadrature(d);
    const Eigen::VectorXi cell = mesh.cells().row(c);
    std::vector<CellSample> out(quad.weights.size());
    for (int q = 0; q < quad.weights.size(); ++q) {
        CellSample& s = out[q];
        s.bary = quad.barycentric.row(q);
        for (int k = 0; k <= d; ++k) {
            s.x.head(d) += s.bary[k] * mesh.vertices().row(cell[k]).transpose();
            s.u += s.bary[k] * u[cell[k]];
            if (p) s.p += s.bary[k] * (*p)[cell[k]];
        }
    }
    return out;
}

Eigen::Vector3d cell_gradient(const SimplicialMesh& mesh, int c, const Eigen::VectorXd& coeffs) {
    const int d = mesh.dim();
    const Eigen::VectorXi cell = mesh.cells().row(c);
    const Eigen::MatrixXd& grads = mesh.hat_gradients(c);
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int k = 0; k <= d; ++k) g.head(d) += coeffs[cell[k]] * grads.row(k).transpose();
    return g;
}

[[noreturn]] void integrand_error(int cell, const char* what) {
    std::ostringstream os;
    os << "integrand evaluation failed on cell " << cell << ": " << what;
    fail(ErrorKind::numeric, os.str());
}

}  // namespace

double evaluate_objective(const SimplicialMesh& mesh, const ScalarFieldP1& u,
                          const Integrand& integrand) {
    if (u.mesh.get() != &mesh)
        fail(ErrorKind::invalid_argument, "state field does not live on this mesh");
    if (!integrand.value) fail(ErrorKind::invalid_argument, "integrand has no value callback");
    const QuadratureRule& quad = interior_quadrature(mesh.dim());
    double total = 0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double vol = mesh.cell_volume(c);
        const Eigen::Vector3d g = cell_gradient(mesh, c, u.coeffs);
        const auto samples = cell_samples(mesh, c, u.coeffs, nullptr);
        for (size_t q = 0; q < samples.size(); ++q) {
            double val;
            try {
                val = integrand.value({samples[q].x, samples[q].u, g});
            } catch (const std::exception& e) {
                integrand_error(c, e.what());
            }
            if (!std::isfinite(val)) integrand_error(c, "non-finite value");
            total += quad.weights[static_cast<int>(q)] * vol * val;
        }
    }
    return total;
}

ScalarFieldP1 solve_adjoint(MeshPtr mesh, const ScalarFieldP1& u, const ProblemSpec& problem,
                            double tol, const ScalarFieldP1* warm_start) {
    const Integrand& integrand = problem.integrand;
    if (!integrand.du || !integrand.dg)
        fail(ErrorKind::invalid_argument, "integrand is missing partial derivatives");
    const int d = mesh->dim();
    const int nv = mesh->num_vertices();
    const QuadratureRule& quad = interior_quadrature(d);

    // rhs_i = -sum_T quadrature( j_u phi_i + j_v . grad phi_i )
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
    for (int c = 0; c < mesh->num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh->cells().row(c);
        const Eigen::MatrixXd& grads = mesh->hat_gradients(c);
        const double vol = mesh->cell_volume(c);
        const Eigen::Vector3d g = cell_gradient(*mesh, c, u.coeffs);
        const auto samples = cell_samples(*mesh, c, u.coeffs, nullptr);
        for (size_t q = 0; q < samples.size(); ++q) {
            const double w = quad.weights[static_cast<int>(q)] * vol;
            double ju;
            Eigen::Vector3d jv;
            try {
                const IntegrandArgs args{samples[q].x, samples[q].u, g};
                ju = integrand.du(args);
                jv = integrand.dg(args);
            } catch (const std::exception& e) {
                integrand_error(c, e.what());
            }
            for (int k = 0; k <= d; ++k)
                rhs[cell[k]] -= w * (ju * samples[q].bary[k] + jv.head(d).dot(grads.row(k)));
        }
    }

    return solve_state_operator(mesh, rhs, problem.bc, tol, warm_start);
}

ShapeGradient shape_derivative(MeshPtr mesh, const ScalarFieldP1& u, const ScalarFieldP1& p,
                               const ProblemSpec& problem) {
    const Integrand& integrand = problem.integrand;
    if (!integrand.value || !integrand.dx || !integrand.du || !integrand.dg)
        fail(ErrorKind::invalid_argument, "integrand is missing partial derivatives");
    const int d = mesh->dim();
    const int nv = mesh->num_vertices();
    const QuadratureRule& quad = interior_quadrature(d);
    const bool neumann = problem.bc == BoundaryCondition::neumann_reaction;
    const double fd_step = 1e-6 * mesh->diameter();

    auto grad_f = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
        if (problem.rhs.gradient) return problem.rhs.gradient(x);
        Eigen::Vector3d g = Eigen::Vector3d::Zero();
        for (int k = 0; k < d; ++k) {
            Eigen::Vector3d xp = x, xm = x;
            xp[k] += fd_step;
            xm[k] -= fd_step;
            g[k] = (problem.rhs.value(xp) - problem.rhs.value(xm)) / (2 * fd_step);
        }
        return g;
    };

    ShapeGradient out{mesh, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d) * nv)};
    for (int c = 0; c < mesh->num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh->cells().row(c);
        const Eigen::MatrixXd& grads = mesh->hat_gradients(c);
        const double vol = mesh->cell_volume(c);
        const Eigen::Vector3d gu = cell_gradient(*mesh, c, u.coeffs);
        const Eigen::Vector3d gp = cell_gradient(*mesh, c, p.coeffs);
        const double gugp = gu.dot(gp);
        const auto samples = cell_samples(*mesh, c, u.coeffs, &p.coeffs);
        const int nq = static_cast<int>(samples.size());

        // per-point integrand data
        std::vector<double> jval(nq), fval(nq);
        std::vector<Eigen::Vector3d> jx(nq), jv(nq), gf(nq);
        double j_sum = 0, up_sum = 0;
        for (int q = 0; q < nq; ++q) {
            const double w = quad.weights[q] * vol;
            try {
                const IntegrandArgs args{samples[q].x, samples[q].u, gu};
                jval[q] = integrand.value(args);
                jx[q] = integrand.dx(args);
                jv[q] = integrand.dg(args);
            } catch (const std::exception& e) {
                integrand_error(c, e.what());
            }
            fval[q] = problem.rhs.value(samples[q].x);
            gf[q] = grad_f(samples[q].x);
            j_sum += w * jval[q];
            if (neumann) up_sum += w * samples[q].u * samples[q].p;
        }

        for (int k = 0; k <= d; ++k) {
            const int v = cell[k];
            const Eigen::VectorXd phi_grad = grads.row(k);  // grad of hat k, length d
            // s = quadrature( j_v . grad phi_k ), independent of the component
            double s_jv = 0;
            for (int q = 0; q < nq; ++q)
                s_jv += quad.weights[q] * vol * jv[q].head(d).dot(phi_grad);
            const double gu_phi = gu.head(d).dot(phi_grad);
            const double gp_phi = gp.head(d).dot(phi_grad);

            for (int comp = 0; comp < d; ++comp) {
                double g = 0;
                // j_x . W with W = phi_k e_comp
                for (int q = 0; q < nq; ++q)
                    g += quad.weights[q] * vol * jx[q][comp] * samples[q].bary[k];
                // -j_v . DW^T grad u  = -(grad u)_comp (j_v . grad phi_k)
                g -= gu[comp] * s_jv;
                // grad p^T [-DW - DW^T + div(W) I] grad u, cell-constant
                g += vol * (-gp[comp] * gu_phi - gu[comp] * gp_phi + phi_grad[comp] * gugp);
                // -div(f W) p = -(grad f . W + f div W) p
                for (int q = 0; q < nq; ++q)
                    g -= quad.weights[q] * vol *
                         (gf[q][comp] * samples[q].bary[k] + fval[q] * phi_grad[comp]) *
                         samples[q].p;
                // j div(W)
                g += phi_grad[comp] * j_sum;
                // reaction term of the Neumann problem: u p div(W)
                if (neumann) g += phi_grad[comp] * up_sum;

                out.coeffs[static_cast<Eigen::Index>(d) * v + comp] += g;
            }
        }
    }
    return out;
}

double pair(const ShapeGradient& grad, const VectorFieldP1& V) {
    if (grad.mesh != V.mesh)
        fail(ErrorKind::invalid_argument, "pair: gradient and field live on different meshes");
    if (grad.coeffs.size() != V.coeffs.size())
        fail(ErrorKind::invalid_argument, "pair: coefficient size mismatch");
    return grad.coeffs.dot(V.coeffs);
}

}  // namespace cshape
