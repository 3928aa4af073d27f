#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cshape {

// Convex quadratic program
//   minimize 1/2 z^T H z + g^T z
//   s.t.     A z <= b   (ineq)
//            C z  = d   (eq)
// H must be positive semidefinite on the null space of C.
struct QuadraticProgram {
    Eigen::SparseMatrix<double> hessian;
    Eigen::VectorXd linear;
    Eigen::SparseMatrix<double> ineq_matrix;
    Eigen::VectorXd ineq_bound;
    Eigen::SparseMatrix<double> eq_matrix;
    Eigen::VectorXd eq_rhs;

    Eigen::Index num_vars() const { return linear.size(); }
    double objective(const Eigen::VectorXd& z) const {
        return 0.5 * z.dot(hessian * z) + linear.dot(z);
    }
};

enum class QpStatus { solved, max_iter, infeasible };

struct KktResiduals {
    double stationarity = 0;
    double primal_ineq = 0;
    double primal_eq = 0;
    double dual_feasibility = 0;
    double complementarity = 0;

    double max_residual() const;
};

struct QpSolution {
    Eigen::VectorXd z;
    Eigen::VectorXd ineq_multipliers;  // lambda >= 0
    Eigen::VectorXd eq_multipliers;
    QpStatus status = QpStatus::max_iter;
    KktResiduals kkt;
    int iterations = 0;
    bool polished = false;
};

struct QpSettings {
    double tol = 1e-8;       // absolute residual tolerance
    int max_iter = 200000;
    double rho0 = 0.1;       // initial step parameter, adapted during the run
    double sigma = 1e-6;
    double alpha = 1.6;      // over-relaxation
    int check_interval = 25;
    int scaling_iters = 10;  // Ruiz equilibration sweeps
    bool polish = true;
    double polish_reg = 1e-9;
    double infeas_tol = 1e-10;
};

// First-order operator-splitting solver with diagonal (Ruiz) scaling,
// over-relaxation and an active-set polish step; multipliers are returned
// for the unscaled system.
QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings,
                    const QpSolution* warm_start = nullptr);

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol);

}  // namespace cshape
