#include "msport/qp.hpp"

#include "msport/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace msport {

namespace {

struct Multipliers {
    double nu = 0.0;   // equality
    double mu = 0.0;   // inequality (if active)
};

// Least-squares multipliers on the free coordinates: g_F = nu a_F + mu d_F.
Multipliers fit_multipliers(const Vector& g, const Vector& a, const Vector* d, const std::vector<Eigen::Index>& free,
                            bool ineq_active) {
    const auto nf = static_cast<Eigen::Index>(free.size());
    const Eigen::Index cols = ineq_active ? 2 : 1;
    if (nf == 0) return {};
    Matrix A(nf, cols);
    Vector rhs(nf);
    for (Eigen::Index k = 0; k < nf; ++k) {
        A(k, 0) = a(free[static_cast<std::size_t>(k)]);
        if (ineq_active) A(k, 1) = (*d)(free[static_cast<std::size_t>(k)]);
        rhs(k) = g(free[static_cast<std::size_t>(k)]);
    }
    const Vector sol = A.completeOrthogonalDecomposition().solve(rhs);
    return {sol(0), ineq_active ? sol(1) : 0.0};
}

}  // namespace

QpSolution solve_simplex_qp(const SimplexQp& p, const Vector& start, int max_iterations) {
    const Eigen::Index n = p.q.rows();
    if (p.q.cols() != n || p.a.size() != n || start.size() != n || (p.c.size() != 0 && p.c.size() != n) ||
        (p.d && p.d->size() != n))
        throw Error(ErrorCode::DimensionMismatch, "QP dimensions disagree");
    const Vector c = p.c.size() == 0 ? Vector::Zero(n) : p.c;
    const Vector* d = p.d ? &*p.d : nullptr;

    const double scale = std::max({p.q.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min()});
    const double shift = 1e-12 * std::max(p.q.diagonal().mean(), scale * 1e-6);
    const Matrix q_shifted = p.q + shift * Matrix::Identity(n, n);
    const double step_tol = 1e-13;
    const double dual_tol = 1e-11 * scale;
    if (max_iterations <= 0) max_iterations = 50 * static_cast<int>(n + 2);

    Vector w = start;
    std::vector<bool> bound(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (w(i) < -1e-12) throw Error(ErrorCode::InvalidArgument, "QP start point is infeasible");
        bound[static_cast<std::size_t>(i)] = w(i) <= 0.0;
        if (w(i) < 0.0) w(i) = 0.0;
    }
    bool ineq_active = false;

    QpSolution sol;
    for (int it = 0; it < max_iterations; ++it) {
        sol.iterations = it + 1;
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!bound[static_cast<std::size_t>(i)]) free.push_back(i);
        const auto nf = static_cast<Eigen::Index>(free.size());
        const Eigen::Index m = ineq_active ? 2 : 1;
        const Vector g = q_shifted * w + c;

        // KKT system of the equality-constrained step on the free coordinates:
        // [Q_FF  -A'] [p     ]   [-g_F]
        // [A      0 ] [lambda] = [ 0  ]
        Matrix kkt = Matrix::Zero(nf + m, nf + m);
        Vector rhs = Vector::Zero(nf + m);
        for (Eigen::Index r = 0; r < nf; ++r) {
            const Eigen::Index i = free[static_cast<std::size_t>(r)];
            for (Eigen::Index s = 0; s < nf; ++s) kkt(r, s) = q_shifted(i, free[static_cast<std::size_t>(s)]);
            kkt(r, nf) = -p.a(i);
            kkt(nf, r) = p.a(i);
            if (ineq_active) {
                kkt(r, nf + 1) = -(*d)(i);
                kkt(nf + 1, r) = (*d)(i);
            }
            rhs(r) = -g(i);
        }
        const Vector z = kkt.completeOrthogonalDecomposition().solve(rhs);
        Vector step = Vector::Zero(n);
        for (Eigen::Index r = 0; r < nf; ++r) step(free[static_cast<std::size_t>(r)]) = z(r);

        if (step.cwiseAbs().maxCoeff() <= step_tol) {
            // Stationary on the working set: check multiplier signs.
            const Multipliers mult = fit_multipliers(g, p.a, d, free, ineq_active);
            double worst = -dual_tol;
            Eigen::Index drop = -1;  // -2 means the inequality
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!bound[static_cast<std::size_t>(i)]) continue;
                double zi = g(i) - mult.nu * p.a(i) - (ineq_active ? mult.mu * (*d)(i) : 0.0);
                if (zi < worst) {
                    worst = zi;
                    drop = i;
                }
            }
            if (ineq_active && mult.mu < worst) {
                worst = mult.mu;
                drop = -2;
            }
            if (drop == -1) {
                sol.converged = true;
                break;
            }
            if (drop == -2) {
                ineq_active = false;
            } else {
                bound[static_cast<std::size_t>(drop)] = false;
            }
            continue;
        }

        // Ratio test against inactive constraints.
        double alpha = 1.0;
        Eigen::Index blocking = -1;  // -2 means the inequality
        for (Eigen::Index i : free) {
            if (step(i) < 0.0) {
                const double ratio = -w(i) / step(i);
                if (ratio < alpha) {
                    alpha = ratio;
                    blocking = i;
                }
            }
        }
        if (d && !ineq_active) {
            const double slope = d->dot(step);
            if (slope < 0.0) {
                const double ratio = std::max(0.0, (p.e - d->dot(w)) / slope);
                if (ratio < alpha) {
                    alpha = ratio;
                    blocking = -2;
                }
            }
        }
        w += alpha * step;
        if (blocking >= 0) {
            bound[static_cast<std::size_t>(blocking)] = true;
            w(blocking) = 0.0;
        } else if (blocking == -2) {
            ineq_active = true;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (bound[static_cast<std::size_t>(i)]) w(i) = 0.0;
    }

    // KKT report against the unshifted objective.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!bound[static_cast<std::size_t>(i)]) free.push_back(i);
    const Vector g = p.q * w + c;
    const Multipliers mult = fit_multipliers(g, p.a, d, free, ineq_active);
    sol.w = w;
    sol.at_bound = bound;
    sol.inequality_active = ineq_active;
    sol.equality_multiplier = mult.nu;
    sol.inequality_multiplier = ineq_active ? mult.mu : 0.0;
    sol.bound_multipliers = Vector::Zero(n);
    Vector resid = g - mult.nu * p.a;
    if (ineq_active) resid -= mult.mu * (*d);
    double violation = ineq_active ? std::max(0.0, -mult.mu) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (bound[static_cast<std::size_t>(i)]) {
            sol.bound_multipliers(i) = resid(i);
            violation = std::max(violation, -resid(i));
            resid(i) = 0.0;
        }
    }
    sol.stationarity_residual = resid.cwiseAbs().maxCoeff();
    sol.dual_violation = violation;
    return sol;
}

}  // namespace msport
