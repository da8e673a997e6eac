#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string_view>

namespace nsqp {

struct LbfgsOptions {
    int max_iterations = 5000;
    int memory = 10;
    /// Stop when gradient_norm_scale * |g| <= gradient_tolerance * (1 + |f|).
    double gradient_tolerance = 1e-8;
    double gradient_norm_scale = 1.0;
    double armijo = 1e-4;
    int max_backtracks = 40;
    /// Stop after this many consecutive iterations whose decrease is below
    /// stall_tolerance * (1 + |f|) (roundoff floor).
    int stall_iterations = 25;
    double stall_tolerance = 1e-15;
};

enum class LbfgsStatus { converged, max_iterations, line_search_failed, stalled };

std::string_view to_string(LbfgsStatus status);

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
};

/// Returns f(x) and, when `grad` is non-null, writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
/// Applies an approximate inverse Hessian in place; empty means identity.
using Preconditioner = std::function<void(Eigen::VectorXd& r)>;

/// Limited-memory BFGS with backtracking (Armijo) line search and an optional
/// preconditioner as the initial inverse Hessian.  Never returns a point worse than x0.
LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const Preconditioner& precondition,
                           const LbfgsOptions& options);

}  // namespace nsqp
