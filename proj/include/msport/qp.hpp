#pragma once

#include "msport/timeseries.hpp"

#include <optional>

namespace msport {

/// minimize 1/2 w'Qw + c'w
/// subject to  a'w = b           (one equality row)
///             d'w >= e          (optional inequality row)
///             w >= 0
struct SimplexQp {
    Matrix q;
    Vector c;  // empty means zero
    Vector a;
    double b = 1.0;
    std::optional<Vector> d;
    double e = 0.0;
};

struct QpSolution {
    Vector w;
    std::vector<bool> at_bound;     // w_i held at zero by the final working set
    bool inequality_active = false;
    double equality_multiplier = 0.0;
    double inequality_multiplier = 0.0;
    Vector bound_multipliers;       // zero off the working set
    double stationarity_residual = 0.0;  // inf-norm of Qw + c - a*nu - d*mu - z
    double dual_violation = 0.0;          // most negative multiplier, clipped at 0
    int iterations = 0;
    bool converged = false;
};

/// Primal active-set method from a feasible starting point. The working set
/// starts as {i : start_i == 0}. A tiny diagonal shift (1e-12 of the mean
/// diagonal) keeps every equality-constrained subproblem strictly convex,
/// which also selects the minimum-norm minimizer when Q is singular. KKT
/// quantities are evaluated against the unshifted Q.
QpSolution solve_simplex_qp(const SimplexQp& problem, const Vector& start, int max_iterations = 0);

}  // namespace msport
