#include "cshape/qp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cshape/errors.hpp"

namespace cshape {

double KktResiduals::max_residual() const {
    return std::max({stationarity, primal_ineq, primal_eq, dual_feasibility, complementarity});
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Internal box form: minimize 1/2 x^T P x + q^T x s.t. l <= A x <= u,
// inequality rows first (l = -inf), then equality rows (l = u).
struct BoxQp {
    Eigen::SparseMatrix<double> P;
    Eigen::VectorXd q;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd l, u;
    Eigen::Index n = 0, m = 0, m_ineq = 0;
};

BoxQp stack_problem(const QuadraticProgram& qp) {
    BoxQp box;
    box.n = qp.num_vars();
    box.m_ineq = qp.ineq_bound.size();
    const Eigen::Index m_eq = qp.eq_rhs.size();
    box.m = box.m_ineq + m_eq;
    if (qp.hessian.rows() != box.n || qp.hessian.cols() != box.n)
        fail(ErrorKind::invalid_argument, "solve_qp: hessian dimension mismatch");
    if (box.m_ineq > 0 && qp.ineq_matrix.cols() != box.n)
        fail(ErrorKind::invalid_argument, "solve_qp: inequality matrix dimension mismatch");
    if (m_eq > 0 && qp.eq_matrix.cols() != box.n)
        fail(ErrorKind::invalid_argument, "solve_qp: equality matrix dimension mismatch");

    box.P = qp.hessian;
    box.q = qp.linear;
    box.A.resize(box.m, box.n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(qp.ineq_matrix.nonZeros() + qp.eq_matrix.nonZeros());
    for (int k = 0; k < qp.ineq_matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(qp.ineq_matrix, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < qp.eq_matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(qp.eq_matrix, k); it; ++it)
            trip.emplace_back(static_cast<int>(box.m_ineq + it.row()), static_cast<int>(it.col()),
                              it.value());
    box.A.setFromTriplets(trip.begin(), trip.end());
    box.A.makeCompressed();
    box.l.resize(box.m);
    box.u.resize(box.m);
    box.l.head(box.m_ineq).setConstant(-kInf);
    box.u.head(box.m_ineq) = qp.ineq_bound;
    box.l.tail(m_eq) = qp.eq_rhs;
    box.u.tail(m_eq) = qp.eq_rhs;
    return box;
}

// Ruiz equilibration of [[P, A^T], [A, 0]] plus cost normalization.
struct Scaling {
    Eigen::VectorXd D;  // n
    Eigen::VectorXd E;  // m
    double c = 1.0;
};

Scaling ruiz_equilibrate(BoxQp& box, int iters) {
    const Eigen::Index n = box.n, m = box.m;
    Scaling s;
    s.D = Eigen::VectorXd::Ones(n);
    s.E = Eigen::VectorXd::Ones(m);

    for (int sweep = 0; sweep < iters; ++sweep) {
        Eigen::VectorXd dn = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd dm = Eigen::VectorXd::Zero(m);
        for (int k = 0; k < box.P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.P, k); it; ++it) {
                const double a = std::abs(it.value());
                dn[it.col()] = std::max(dn[it.col()], a);
                dn[it.row()] = std::max(dn[it.row()], a);
            }
        for (int k = 0; k < box.A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.A, k); it; ++it) {
                const double a = std::abs(it.value());
                dn[it.col()] = std::max(dn[it.col()], a);
                dm[it.row()] = std::max(dm[it.row()], a);
            }
        for (Eigen::Index i = 0; i < n; ++i) dn[i] = dn[i] > 0 ? 1.0 / std::sqrt(dn[i]) : 1.0;
        for (Eigen::Index i = 0; i < m; ++i) dm[i] = dm[i] > 0 ? 1.0 / std::sqrt(dm[i]) : 1.0;

        // P <- Dn P Dn, A <- Dm A Dn, q <- Dn q
        for (int k = 0; k < box.P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.P, k); it; ++it)
                it.valueRef() *= dn[it.row()] * dn[it.col()];
        for (int k = 0; k < box.A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.A, k); it; ++it)
                it.valueRef() *= dm[it.row()] * dn[it.col()];
        box.q = box.q.cwiseProduct(dn);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (std::isfinite(box.l[i])) box.l[i] *= dm[i];
            if (std::isfinite(box.u[i])) box.u[i] *= dm[i];
        }
        s.D = s.D.cwiseProduct(dn);
        s.E = s.E.cwiseProduct(dm);
    }

    // cost scaling: normalize the largest of mean column norm of P and |q|
    double p_mean = 0;
    if (box.n > 0) {
        Eigen::VectorXd colnorm = Eigen::VectorXd::Zero(box.n);
        for (int k = 0; k < box.P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.P, k); it; ++it)
                colnorm[it.col()] = std::max(colnorm[it.col()], std::abs(it.value()));
        p_mean = colnorm.mean();
    }
    const double qnorm = box.q.size() ? box.q.cwiseAbs().maxCoeff() : 0.0;
    const double denom = std::max(p_mean, qnorm);
    s.c = denom > 0 ? 1.0 / denom : 1.0;
    box.P *= s.c;
    box.q *= s.c;
    return s;
}

struct KktFactorization {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    void factorize(const BoxQp& box, double sigma, const Eigen::VectorXd& rho) {
        const Eigen::Index n = box.n, m = box.m;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(box.P.nonZeros() + 2 * box.A.nonZeros() + n + m);
        for (int k = 0; k < box.P.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.P, k); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
        for (Eigen::Index i = 0; i < n; ++i)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i), sigma);
        for (int k = 0; k < box.A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(box.A, k); it; ++it) {
                trip.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()),
                                  it.value());
                trip.emplace_back(static_cast<int>(it.col()), static_cast<int>(n + it.row()),
                                  it.value());
            }
        for (Eigen::Index i = 0; i < m; ++i)
            trip.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i), -1.0 / rho[i]);
        Eigen::SparseMatrix<double> kkt(n + m, n + m);
        kkt.setFromTriplets(trip.begin(), trip.end());
        ldlt.compute(kkt);
        if (ldlt.info() != Eigen::Success)
            fail(ErrorKind::numeric, "solve_qp: KKT factorization failed");
    }
};

Eigen::VectorXd clamp_box(const Eigen::VectorXd& v, const Eigen::VectorXd& l,
                          const Eigen::VectorXd& u) {
    return v.cwiseMax(l).cwiseMin(u);
}

struct UnscaledIterate {
    Eigen::VectorXd x, y, z;  // primal, dual, constraint values
};

// Residuals of the box problem at an unscaled iterate.
struct BoxResiduals {
    double prim = 0, dual = 0;
};

BoxResiduals box_residuals(const BoxQp& orig, const UnscaledIterate& it) {
    BoxResiduals r;
    if (orig.m > 0) r.prim = (orig.A * it.x - it.z).cwiseAbs().maxCoeff();
    Eigen::VectorXd station = orig.P * it.x + orig.q;
    if (orig.m > 0) station += orig.A.transpose() * it.y;
    r.dual = station.size() ? station.cwiseAbs().maxCoeff() : 0.0;
    return r;
}

// Polishing: solve the equality-constrained QP on the detected active set
// with tiny regularization and iterative refinement.
bool polish_solution(const BoxQp& orig, const QpSettings& settings, UnscaledIterate& it) {
    std::vector<Eigen::Index> act;
    std::vector<double> act_rhs;
    for (Eigen::Index i = 0; i < orig.m; ++i) {
        const bool eq = orig.l[i] == orig.u[i];
        if (eq || it.y[i] > 0) {
            act.push_back(i);
            act_rhs.push_back(orig.u[i]);
        } else if (it.y[i] < 0 && std::isfinite(orig.l[i])) {
            act.push_back(i);
            act_rhs.push_back(orig.l[i]);
        }
    }
    const Eigen::Index n = orig.n, ma = static_cast<Eigen::Index>(act.size());

    std::vector<Eigen::Triplet<double>> trip, trip_reg;
    for (int k = 0; k < orig.P.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator itP(orig.P, k); itP; ++itP)
            trip.emplace_back(static_cast<int>(itP.row()), static_cast<int>(itP.col()),
                              itP.value());
    std::vector<Eigen::Index> row_of(orig.m, -1);
    for (Eigen::Index a = 0; a < ma; ++a) row_of[act[a]] = a;
    for (int k = 0; k < orig.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator itA(orig.A, k); itA; ++itA) {
            const Eigen::Index a = row_of[itA.row()];
            if (a < 0) continue;
            trip.emplace_back(static_cast<int>(n + a), static_cast<int>(itA.col()), itA.value());
            trip.emplace_back(static_cast<int>(itA.col()), static_cast<int>(n + a), itA.value());
        }
    Eigen::SparseMatrix<double> kkt(n + ma, n + ma);
    kkt.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> kkt_reg = kkt;
    {
        Eigen::SparseMatrix<double> reg(n + ma, n + ma);
        std::vector<Eigen::Triplet<double>> rt;
        for (Eigen::Index i = 0; i < n; ++i)
            rt.emplace_back(static_cast<int>(i), static_cast<int>(i), settings.polish_reg);
        for (Eigen::Index i = 0; i < ma; ++i)
            rt.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i),
                            -settings.polish_reg);
        reg.setFromTriplets(rt.begin(), rt.end());
        kkt_reg = kkt + reg;
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(kkt_reg);
    if (ldlt.info() != Eigen::Success) return false;

    Eigen::VectorXd rhs(n + ma);
    rhs.head(n) = -orig.q;
    for (Eigen::Index a = 0; a < ma; ++a) rhs[n + a] = act_rhs[a];
    Eigen::VectorXd sol = ldlt.solve(rhs);
    for (int refine = 0; refine < 4; ++refine) sol += ldlt.solve(rhs - kkt * sol);
    if (!sol.allFinite()) return false;

    UnscaledIterate cand;
    cand.x = sol.head(n);
    cand.y = Eigen::VectorXd::Zero(orig.m);
    for (Eigen::Index a = 0; a < ma; ++a) cand.y[act[a]] = sol[n + a];
    const Eigen::VectorXd Acand =
        orig.m > 0 ? Eigen::VectorXd(orig.A * cand.x) : Eigen::VectorXd(0);
    cand.z = orig.m > 0 ? clamp_box(Acand, orig.l, orig.u) : Eigen::VectorXd(0);

    // reject candidates with wrong multiplier signs or infeasibility
    double viol = 0;
    for (Eigen::Index i = 0; i < orig.m; ++i) {
        if (orig.l[i] != orig.u[i]) {
            if (it.y[i] > 0 && row_of[i] >= 0 && cand.y[i] < 0) viol = kInf;
            if (row_of[i] < 0) viol = std::max(viol, Acand[i] - orig.u[i]);
        }
    }
    if (!std::isfinite(viol)) return false;

    const BoxResiduals rc = box_residuals(orig, cand);
    const BoxResiduals r0 = box_residuals(orig, it);
    if (std::max(rc.prim, rc.dual) + std::max(viol, 0.0) <
        std::max(r0.prim, r0.dual)) {
        it = cand;
        return true;
    }
    return false;
}

}  // namespace

KktResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol) {
    KktResiduals r;
    Eigen::VectorXd station = qp.hessian * sol.z + qp.linear;
    if (qp.ineq_bound.size() > 0 && sol.ineq_multipliers.size() == qp.ineq_bound.size())
        station += qp.ineq_matrix.transpose() * sol.ineq_multipliers;
    if (qp.eq_rhs.size() > 0 && sol.eq_multipliers.size() == qp.eq_rhs.size())
        station += qp.eq_matrix.transpose() * sol.eq_multipliers;
    r.stationarity = station.size() ? station.cwiseAbs().maxCoeff() : 0.0;
    if (qp.ineq_bound.size() > 0) {
        const Eigen::VectorXd slack = qp.ineq_matrix * sol.z - qp.ineq_bound;
        r.primal_ineq = std::max(0.0, slack.maxCoeff());
        if (sol.ineq_multipliers.size() == slack.size()) {
            r.dual_feasibility = std::max(0.0, -sol.ineq_multipliers.minCoeff());
            r.complementarity = sol.ineq_multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
        }
    }
    if (qp.eq_rhs.size() > 0)
        r.primal_eq = (qp.eq_matrix * sol.z - qp.eq_rhs).cwiseAbs().maxCoeff();
    return r;
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpSettings& settings,
                    const QpSolution* warm_start) {
    BoxQp box = stack_problem(qp);
    const BoxQp orig = box;  // unscaled copy for residuals and polishing
    const Scaling scal = ruiz_equilibrate(box, settings.scaling_iters);

    const Eigen::Index n = box.n, m = box.m;
    double rho_base = settings.rho0;
    auto make_rho = [&](double base) {
        Eigen::VectorXd rho(m);
        for (Eigen::Index i = 0; i < m; ++i)
            rho[i] = (box.l[i] == box.u[i]) ? 1e3 * base : base;
        return rho;
    };
    Eigen::VectorXd rho = make_rho(rho_base);

    KktFactorization kkt;
    kkt.factorize(box, settings.sigma, rho);

    // scaled iterates
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (warm_start && warm_start->z.size() == n) {
        x = warm_start->z.cwiseQuotient(scal.D);
        Eigen::VectorXd y_un(m);
        y_un.head(box.m_ineq) = warm_start->ineq_multipliers.size() == box.m_ineq
                                    ? warm_start->ineq_multipliers
                                    : Eigen::VectorXd::Zero(box.m_ineq);
        y_un.tail(m - box.m_ineq) = warm_start->eq_multipliers.size() == m - box.m_ineq
                                        ? warm_start->eq_multipliers
                                        : Eigen::VectorXd::Zero(m - box.m_ineq);
        y = y_un.cwiseQuotient(scal.E) * scal.c;
        z = clamp_box(box.A * x, box.l, box.u);
    }

    auto unscale = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                       const Eigen::VectorXd& zs) {
        UnscaledIterate it;
        it.x = xs.cwiseProduct(scal.D);
        it.y = ys.cwiseProduct(scal.E) / scal.c;
        it.z = zs.cwiseQuotient(scal.E);
        return it;
    };

    QpSolution out;
    out.status = QpStatus::max_iter;

    Eigen::VectorXd y_prev_check = y;
    int iter = 0;
    bool converged = false;
    while (iter < settings.max_iter) {
        // KKT solve for (x~, nu)
        Eigen::VectorXd rhs(n + m);
        rhs.head(n) = settings.sigma * x - box.q;
        rhs.tail(m) = z - y.cwiseQuotient(rho);
        const Eigen::VectorXd sol = kkt.ldlt.solve(rhs);
        const Eigen::VectorXd x_tilde = sol.head(n);
        const Eigen::VectorXd nu = sol.tail(m);
        const Eigen::VectorXd z_tilde = z + (nu - y).cwiseQuotient(rho);

        const Eigen::VectorXd x_next = settings.alpha * x_tilde + (1 - settings.alpha) * x;
        const Eigen::VectorXd z_relax = settings.alpha * z_tilde + (1 - settings.alpha) * z;
        const Eigen::VectorXd z_next = clamp_box(z_relax + y.cwiseQuotient(rho), box.l, box.u);
        y += rho.cwiseProduct(z_relax - z_next);
        x = x_next;
        z = z_next;
        iter++;

        if (iter % settings.check_interval != 0 && iter != settings.max_iter) continue;

        const UnscaledIterate it = unscale(x, y, z);
        const Eigen::VectorXd Ax = orig.A * it.x;
        const BoxResiduals res = box_residuals(orig, it);
        double comp = 0;
        for (Eigen::Index i = 0; i < box.m_ineq; ++i)
            comp = std::max(comp, std::abs(it.y[i] * (Ax[i] - orig.u[i])));
        if (res.prim <= settings.tol && res.dual <= settings.tol && comp <= settings.tol) {
            converged = true;
            break;
        }

        // primal infeasibility certificate
        const Eigen::VectorXd dy = it.y - y_prev_check;
        y_prev_check = it.y;
        const double dy_norm = dy.size() ? dy.cwiseAbs().maxCoeff() : 0.0;
        if (dy_norm > 1e-14 && m > 0) {
            const double atdy = (orig.A.transpose() * dy).cwiseAbs().maxCoeff();
            double support = 0;
            bool valid = true;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (dy[i] > 0)
                    support += orig.u[i] * dy[i];
                else if (dy[i] < -settings.infeas_tol * dy_norm && !std::isfinite(orig.l[i]))
                    valid = false;
                else if (dy[i] < 0 && std::isfinite(orig.l[i]))
                    support += orig.l[i] * dy[i];
            }
            if (valid && atdy <= settings.infeas_tol * dy_norm &&
                support <= -settings.infeas_tol * dy_norm) {
                out.status = QpStatus::infeasible;
                break;
            }
        }

        // adaptive step parameter, refactorize on large change
        if (iter % (4 * settings.check_interval) == 0) {
            const double prim_scale =
                std::max({m > 0 ? Ax.cwiseAbs().maxCoeff() : 0.0,
                          m > 0 ? it.z.cwiseAbs().maxCoeff() : 0.0, 1e-12});
            const double dual_scale = std::max(
                {(orig.P * it.x).cwiseAbs().maxCoeff(), orig.q.cwiseAbs().maxCoeff(),
                 m > 0 ? (orig.A.transpose() * it.y).cwiseAbs().maxCoeff() : 0.0, 1e-12});
            const double ratio =
                std::sqrt((res.prim / prim_scale) / std::max(res.dual / dual_scale, 1e-16));
            if (ratio > 5.0 || ratio < 0.2) {
                rho_base = std::clamp(rho_base * ratio, 1e-6, 1e6);
                rho = make_rho(rho_base);
                kkt.factorize(box, settings.sigma, rho);
            }
        }
    }

    UnscaledIterate it = unscale(x, y, z);
    if (out.status != QpStatus::infeasible) {
        if (converged) {
            out.status = QpStatus::solved;
            if (settings.polish) out.polished = polish_solution(orig, settings, it);
        }
    }

    out.iterations = iter;
    out.z = it.x;
    out.ineq_multipliers = it.y.head(box.m_ineq);
    out.eq_multipliers = it.y.tail(m - box.m_ineq);
    out.kkt = kkt_residuals(qp, out);
    if (out.status == QpStatus::solved && out.kkt.max_residual() > settings.tol)
        out.status = QpStatus::max_iter;
    return out;
}

}  // namespace cshape
