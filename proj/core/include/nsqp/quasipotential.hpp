#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nsqp/action.hpp"
#include "nsqp/integrator.hpp"
#include "nsqp/lbfgs.hpp"
#include "nsqp/noise.hpp"
#include "nsqp/path_grid.hpp"

namespace nsqp {

/// U(phi) = |phi|_V^2.  On a finite lattice every field lies in V, so the value is always finite.
double quasipotential_formula(const FourierField& phi);

/// |A^{(1 + beta)/2} phi|_H.  Finite on any lattice; it is the quantity whose finiteness decides
/// U_delta(phi) < infinity in the continuum and it grows under mode refinement for rough phi.
double continuum_regularity_norm(const FourierField& phi, double beta);

/// Smallest horizon T (a multiple of dt) after which the reverse flow v' + Av - B(v, v) = 0
/// started at phi satisfies |v(T)|_V <= tail_factor |phi|_V.  Throws ValidationError when
/// max_horizon is reached first.
double tail_rule_horizon(const FourierField& phi, const IntegratorConfig& cfg, double tail_factor = 1e-3,
                         double max_horizon = 1e3);

struct ReverseFlowCandidate {
    /// u(t) = v(-t) on [-T, 0]: u(0) = phi, u(-T) = v(T).
    PathGrid path;
    /// |v(T)|_V.
    double tail_v_norm = 0.0;
    /// tail_v_norm <= tail_factor |phi|_V; otherwise the caller should extend T.
    bool tail_ok = false;
};

/// Time-reversed solution of the reverse flow, the minimizer of the delta = 0 action.
/// Its action is |phi|_V^2 - |u(-T)|_V^2 up to discretization error.
ReverseFlowCandidate reverse_flow_candidate(const FourierField& phi, double horizon, const IntegratorConfig& cfg,
                                            double tail_factor = 1e-3);

struct MinimizeOptions {
    LbfgsOptions lbfgs{};
    double tail_factor = 1e-3;
    /// Initial path on [-T, 0] with the right node count; endpoints are overwritten with 0 and phi.
    /// Defaults to the reverse-flow candidate.
    std::optional<PathGrid> init;
    unsigned threads = 1;
    bool nonlinear = true;
    /// Precondition with the exact Hessian of the linear part of the action.
    bool precondition = true;
    /// Discretization that is minimized.  The collocation action admits a grid-scale zig-zag
    /// (null mode of the centered difference) that undercuts the continuum infimum by O(dt)
    /// near pinned endpoints, so the midpoint scheme is the default.
    ActionScheme scheme = ActionScheme::midpoint;
};

struct MinimizationReport {
    FourierField phi;
    double horizon = 0.0;
    double dt = 0.0;
    double delta = 0.0;
    /// action_eval total (collocation quadrature) of the returned path.
    double value = 0.0;
    /// Minimum of the discretization that was optimized.
    double objective_value = 0.0;
    /// Objective value of the (endpoint-pinned) initial path.
    double initial_value = 0.0;
    double formula_value = 0.0;
    int iterations = 0;
    /// L^2-in-time norm of the functional gradient at the returned path.
    double grad_norm = 0.0;
    /// |u(-T + dt)|_V: the V-norm one step after the pinned start u(-T) = 0.
    double tail_v_norm = 0.0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
    /// Optimizer converged and tail_v_norm <= tail_factor |phi|_V.
    bool converged = false;
    double regularity_norm = 0.0;
    PathGrid path;
};

/// Minimizes the discrete S^delta over paths on [-T, 0] with u(-T) = 0 and u(0) = phi pinned
/// exactly; the interior nodes are the unknowns.
MinimizationReport minimize_action(const FourierField& phi, const NoiseOperator& noise, double horizon, double dt,
                                   const MinimizeOptions& options = {});

struct GammaSweepRow {
    double delta = 0.0;
    double rel_gap = 0.0;
    MinimizationReport report;
};

struct GammaSweepResult {
    std::vector<GammaSweepRow> rows;
    /// Values nonincreasing as delta decreases, up to the per-run optimizer tolerance.
    bool monotone = true;
    /// |U_delta - |phi|_V^2| / |phi|_V^2 for the last (smallest) delta.
    double final_rel_gap = 0.0;
};

/// Runs minimize_action for each delta (strictly descending, >= 0), warm-starting each run
/// from the previous minimizer.
GammaSweepResult gamma_sweep(const FourierField& phi, std::span<const double> deltas, double horizon, double dt,
                             double beta = 2.0, const MinimizeOptions& options = {});

/// Relative gap |value - formula| / formula (absolute gap when the formula value is zero).
double relative_gap(double value, double formula);

}  // namespace nsqp
