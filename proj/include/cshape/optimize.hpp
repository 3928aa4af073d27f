#pragma once

#include <functional>
#include <vector>

#include "cshape/deform.hpp"

namespace cshape {

struct AlgorithmParams {
    double t0 = 1.0;        // initial step size
    double beta = 0.5;      // backtracking factor, in (0,1)
    double sigma = 0.1;     // Armijo slope fraction, in (0,1)
    double merit_m0 = 1e-9; // initial merit penalty M
    double beta_m = 10.0;   // penalty growth factor, > 1
    double eps_tol = 1e-6;  // stationarity tolerance on sqrt|J'(V)|
    int max_outer = 500;
    ElasticityParams elasticity;
    QpSettings qp;
    double state_tol = 1e-12;  // relative CG tolerance for state/adjoint solves
    bool use_convexity = true;

    void validate() const;
};

enum class StopReason { stationary, max_outer, step_failure, qp_failure };

const char* stop_reason_name(StopReason r);
const char* qp_status_name(QpStatus s);

struct IterationRecord {
    int iter = 0;             // 1-based outer iteration
    double objective = 0;     // J_h at the iterate
    double phi0 = 0;          // merit at t = 0 (current M)
    double slope = 0;         // phi'(0)
    double step = 0;          // accepted t (0 when the loop stopped here)
    int backtracks = 0;       // accepted k
    double max_constraint = 0;
    double grad_pair = 0;     // J_h'(Omega; V)
    double merit_m = 0;       // M after the descent safeguard
    QpStatus qp_status = QpStatus::max_iter;
    bool accepted = false;
    double phi_accepted = 0;      // merit at the accepted step
    QualityReport quality;        // quality report at the accepted step
};

struct OptTrace {
    std::vector<IterationRecord> rows;
    StopReason stop = StopReason::max_outer;
    int iterations = 0;  // QP solves performed
};

struct OptimizeResult {
    MeshPtr mesh;
    OptTrace trace;
    ScalarFieldP1 state;  // state on the final mesh
    double objective = 0;
};

struct MeritValue {
    double value = 0;
    double objective = 0;
    double penalty_sum = 0;  // sum of positive parts of C_i
};

// phi(t) = J_h((I+tV)(mesh)) + M sum [C_i(X + tV(X))]^+ with a re-solved
// state on the deformed mesh; requires the quality check to pass.
MeritValue merit_value(const SimplicialMesh& mesh, const VectorFieldP1& V, double t, double M,
                       const ProblemSpec& problem, double state_tol,
                       const ScalarFieldP1* warm_start = nullptr, bool with_penalty = true);

// phi'(0) = J_h'(Omega; V) + M sum_{i: C_i > 0} DC_i V for QP-feasible V.
double merit_slope(double grad_pair, const ConstraintSystem& constraints,
                   const Eigen::VectorXd& jacobian_times_v, double M);

// Grows M geometrically until phi'(0) < 0; finite by the descent lemma
// once M reaches t0 * max_i lambda_i.
double ensure_descent(double grad_pair, const ConstraintSystem& constraints,
                      const Eigen::VectorXd& jacobian_times_v, double M, double beta_m);

struct ArmijoResult {
    int k = 0;
    double t = 0;
    MeritValue phi_t;
    QualityReport quality;
};

// Smallest k with both the Armijo inequality and the mesh-quality check
// satisfied at t = t0 * beta^k; throws after 60 rejections.
ArmijoResult armijo_search(const std::function<MeritValue(double)>& merit, double phi0,
                           double slope, double t0, const AlgorithmParams& params,
                           const std::function<QualityReport(double)>& quality);

OptimizeResult run_optimizer(MeshPtr initial_mesh, const ProblemSpec& problem,
                             const AlgorithmParams& params);

}  // namespace cshape
