#include "cshape/optimize.hpp"

#include <cmath>
#include <sstream>

#include "cshape/errors.hpp"

namespace cshape {

void AlgorithmParams::validate() const {
    if (!(t0 > 0)) fail(ErrorKind::invalid_argument, "t0 must be positive");
    if (!(beta > 0 && beta < 1)) fail(ErrorKind::invalid_argument, "beta must be in (0,1)");
    if (!(sigma > 0 && sigma < 1)) fail(ErrorKind::invalid_argument, "sigma must be in (0,1)");
    if (merit_m0 < 0) fail(ErrorKind::invalid_argument, "merit penalty must be nonnegative");
    if (!(beta_m > 1)) fail(ErrorKind::invalid_argument, "beta_m must exceed 1");
    if (!(eps_tol > 0)) fail(ErrorKind::invalid_argument, "eps_tol must be positive");
    if (max_outer < 1) fail(ErrorKind::invalid_argument, "max_outer must be at least 1");
    if (!(state_tol > 0)) fail(ErrorKind::invalid_argument, "state_tol must be positive");
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::stationary: return "stationary";
        case StopReason::max_outer: return "max_outer";
        case StopReason::step_failure: return "step_failure";
        case StopReason::qp_failure: return "qp_failure";
    }
    return "?";
}

const char* qp_status_name(QpStatus s) {
    switch (s) {
        case QpStatus::solved: return "solved";
        case QpStatus::max_iter: return "max_iter";
        case QpStatus::infeasible: return "infeasible";
    }
    return "?";
}

MeritValue merit_value(const SimplicialMesh& mesh, const VectorFieldP1& V, double t, double M,
                       const ProblemSpec& problem, double state_tol,
                       const ScalarFieldP1* warm_start, bool with_penalty) {
    MeshPtr deformed = apply_deformation(mesh, V, t);
    const ScalarFieldP1 u = solve_state(deformed, problem, state_tol, warm_start);
    MeritValue out;
    out.objective = evaluate_objective(*deformed, u, problem.integrand);
    if (with_penalty) {
        const ConstraintSystem sys = constraint_values(*deformed);
        for (Eigen::Index i = 0; i < sys.values.size(); ++i)
            out.penalty_sum += std::max(0.0, sys.values[i]);
    }
    out.value = out.objective + M * out.penalty_sum;
    return out;
}

double merit_slope(double grad_pair, const ConstraintSystem& constraints,
                   const Eigen::VectorXd& jacobian_times_v, double M) {
    double slope = grad_pair;
    for (Eigen::Index i = 0; i < constraints.values.size(); ++i)
        if (constraints.values[i] > 0) slope += M * jacobian_times_v[i];
    return slope;
}

double ensure_descent(double grad_pair, const ConstraintSystem& constraints,
                      const Eigen::VectorXd& jacobian_times_v, double M, double beta_m) {
    for (int j = 0; j <= 60; ++j) {
        if (merit_slope(grad_pair, constraints, jacobian_times_v, M) < 0) return M;
        M *= beta_m;
    }
    fail(ErrorKind::numeric,
         "merit penalty update did not produce a descent direction "
         "(QP multipliers inconsistent?)");
}

ArmijoResult armijo_search(const std::function<MeritValue(double)>& merit, double phi0,
                           double slope, double t0, const AlgorithmParams& params,
                           const std::function<QualityReport(double)>& quality) {
    if (!(slope < 0)) fail(ErrorKind::invalid_argument, "armijo_search requires a descent slope");
    for (int k = 0; k <= 60; ++k) {
        const double t = t0 * std::pow(params.beta, k);
        const QualityReport rep = quality(t);
        if (!rep.pass) continue;
        const MeritValue phi_t = merit(t);
        if (phi_t.value <= phi0 + params.sigma * t * slope) return {k, t, phi_t, rep};
    }
    fail(ErrorKind::numeric, "line search failed: no admissible step within 60 backtrackings");
}

OptimizeResult run_optimizer(MeshPtr mesh, const ProblemSpec& problem,
                             const AlgorithmParams& params) {
    params.validate();
    if (!mesh) fail(ErrorKind::invalid_argument, "run_optimizer: null mesh");
    if (problem.dim != mesh->dim())
        fail(ErrorKind::invalid_argument, "run_optimizer: dimension mismatch");

    if (params.use_convexity && mesh->dim() == 2 && !is_convex(*mesh, 0.0))
        mesh = convexify(*mesh);

    OptimizeResult result;
    OptTrace& trace = result.trace;
    trace.stop = StopReason::max_outer;

    double M = params.merit_m0;
    double t_prev = params.t0;
    ScalarFieldP1 state{mesh, Eigen::VectorXd()};
    ScalarFieldP1 adjoint{mesh, Eigen::VectorXd()};
    bool have_state = false;
    QpSolution qp_warm;
    bool have_warm = false;

    for (int iter = 1; iter <= params.max_outer; ++iter) {
        // state, adjoint, gradient and constraints at the current iterate
        const ScalarFieldP1* uw = have_state ? &state : nullptr;
        state = solve_state(mesh, problem, params.state_tol, uw);
        const ScalarFieldP1* pw = have_state ? &adjoint : nullptr;
        adjoint = solve_adjoint(mesh, state, problem, params.state_tol, pw);
        have_state = true;

        const double J = evaluate_objective(*mesh, state, problem.integrand);
        const ShapeGradient grad = shape_derivative(mesh, state, adjoint, problem);
        ConstraintSystem constraints;
        if (params.use_convexity)
            constraints = constraint_jacobian(*mesh);
        else
            constraints.values.resize(0);

        const double t0_iter = t_prev / params.beta;

        QuadraticProgram qp = build_direction_qp(
            assemble_elasticity(*mesh, params.elasticity), assemble_normal_trace(*mesh), grad,
            constraints, t0_iter);
        QpSolution sol = solve_qp(qp, params.qp, have_warm ? &qp_warm : nullptr);
        if (sol.status == QpStatus::max_iter) {
            // one retry with tighter equilibration before giving up
            QpSettings strict = params.qp;
            strict.scaling_iters = 5 * params.qp.scaling_iters;
            strict.rho0 = 0.1 * params.qp.rho0;
            sol = solve_qp(qp, strict, nullptr);
        }

        IterationRecord rec;
        rec.iter = iter;
        rec.objective = J;
        rec.qp_status = sol.status;
        if (params.use_convexity)
            rec.max_constraint = constraints.values.maxCoeff();
        else
            rec.max_constraint = constraint_values(*mesh).values.maxCoeff();  // report only
        trace.iterations = iter;

        if (sol.status != QpStatus::solved) {
            rec.merit_m = M;
            trace.rows.push_back(rec);
            trace.stop = StopReason::qp_failure;
            break;
        }
        qp_warm = sol;
        have_warm = true;

        const Eigen::Index nV = grad.coeffs.size();
        VectorFieldP1 V{mesh, sol.z.head(nV)};
        const double grad_pair = pair(grad, V);
        rec.grad_pair = grad_pair;

        if (std::sqrt(std::abs(grad_pair)) <= params.eps_tol) {
            rec.merit_m = M;
            trace.rows.push_back(rec);
            trace.stop = StopReason::stationary;
            break;
        }

        Eigen::VectorXd dc_v;
        if (constraints.values.size() > 0) dc_v = constraints.jacobian * V.coeffs;
        M = ensure_descent(grad_pair, constraints, dc_v, M, params.beta_m);
        rec.merit_m = M;

        double penalty0 = 0;
        for (Eigen::Index i = 0; i < constraints.values.size(); ++i)
            penalty0 += std::max(0.0, constraints.values[i]);
        const double phi0 = J + M * penalty0;
        const double slope = merit_slope(grad_pair, constraints, dc_v, M);
        rec.phi0 = phi0;
        rec.slope = slope;

        ArmijoResult ls;
        try {
            ls = armijo_search(
                [&](double t) {
                    return merit_value(*mesh, V, t, M, problem, params.state_tol, &state,
                                       params.use_convexity);
                },
                phi0, slope, t0_iter, params,
                [&](double t) { return deformation_quality(*mesh, V, t); });
        } catch (const Error&) {
            trace.rows.push_back(rec);
            trace.stop = StopReason::step_failure;
            break;
        }

        rec.step = ls.t;
        rec.backtracks = ls.k;
        rec.accepted = true;
        rec.phi_accepted = ls.phi_t.value;
        rec.quality = ls.quality;
        trace.rows.push_back(rec);

        mesh = apply_deformation(*mesh, V, ls.t);
        state.mesh = mesh;    // coefficients carry over as warm starts
        adjoint.mesh = mesh;
        t_prev = ls.t;
    }

    result.mesh = mesh;
    result.state = solve_state(mesh, problem, params.state_tol, have_state ? &state : nullptr);
    result.objective = evaluate_objective(*mesh, result.state, problem.integrand);
    return result;
}

}  // namespace cshape
