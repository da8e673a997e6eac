#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nsqp/dof_map.hpp"
#include "nsqp/noise.hpp"
#include "nsqp/path_grid.hpp"

namespace nsqp {

/// Time discretization used by DiscreteAction.
enum class ActionScheme {
    /// Node residuals with the second-order difference stencil of residual_H and trapezoidal
    /// weights (the same quadrature as action_eval).
    collocation,
    /// Interval residuals (u_{n+1} - u_n) / dt + A m_n + B(m_n, m_n) at midpoints
    /// m_n = (u_n + u_{n+1}) / 2 with weight dt.  The cross term telescopes exactly, so the
    /// discrete action is bounded below by |u(t1)|_V^2 - |u(t0)|_V^2 like the continuum one.
    midpoint,
};

struct ActionOptions {
    /// Drop B from the residual (purely linear action; used for scaling checks).
    bool nonlinear = true;
    /// Workers for per-node nonlinear terms.  Results do not depend on this.
    unsigned threads = 1;
    /// Only DiscreteAction reads this; action_eval always uses the collocation quadrature.
    ActionScheme scheme = ActionScheme::collocation;
};

/// Action S^delta of a discrete path and the terms of the periodic decomposition
///   |u' + Au + B|^2 = |u' - Au + B|^2 + 4 <u', Au>.
struct ActionBreakdown {
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
    double delta = 0.0;
    /// 1/2 int |Q_delta^{-1}(u' + Au + B(u, u))|^2 dt; +inf when the residual overflows.
    double total = 0.0;
    /// 1/2 int |u' - Au + B(u, u)|^2 dt.
    double residual_reverse = 0.0;
    /// |u(t1)|_V^2 - |u(t0)|_V^2.
    double boundary_gain = 0.0;
    /// Relative mismatch of the decomposition at delta = 0 (see action_decomposition_check).
    double defect = 0.0;
};

/// u' by second-order finite differences: centered inside, one-sided three-point at the ends.
/// Throws ValidationError for paths with fewer than three nodes.
std::vector<FourierField> time_derivative(const PathGrid& path);

/// f_n = u'(t_n) + A u_n + B(u_n, u_n) at every node.
std::vector<FourierField> residual_H(const PathGrid& path, const ActionOptions& options = {});

/// Trapezoidal quadrature of 1/2 |Q^{-1} f_n|^2, plus the decomposition terms.
ActionBreakdown action_eval(const PathGrid& path, const NoiseOperator& noise, const ActionOptions& options = {});

/// |S^0 - (residual_reverse + boundary_gain)| / max(S^0, tiny).  Zero in exact arithmetic when
/// <Au, B(u, u)> = 0; measures quadrature consistency of the discretization.
double action_decomposition_check(const PathGrid& path, const ActionOptions& options = {});

std::string action_csv_header();
std::string action_csv_row(const ActionBreakdown& b);

/// The discrete action as a function of node coordinates.
///
/// Coordinates are the DofMap coordinates of each node, stored node-major
/// (x[n * dofs + d]); their Euclidean inner product is the H inner product, so gradients are
/// H-Riesz representers per node.
class DiscreteAction {
public:
    DiscreteAction(NoiseOperator noise, double dt, std::size_t nodes, ActionOptions options = {});

    const DofMap& dof_map() const noexcept { return map_; }
    const NoiseOperator& noise() const noexcept { return noise_; }
    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t dofs() const noexcept { return map_.size(); }
    std::size_t size() const noexcept { return nodes_ * map_.size(); }
    double dt() const noexcept { return dt_; }
    ActionScheme scheme() const noexcept { return options_.scheme; }

    std::vector<double> pack(const PathGrid& path) const;
    PathGrid unpack(std::span<const double> x, double t0) const;

    double value(std::span<const double> x) const;
    /// Returns the value and writes dS/dx for every node (endpoints included) into `grad`.
    double value_and_gradient(std::span<const double> x, std::span<double> grad) const;

private:
    /// Residual rows: one per node (collocation) or per interval (midpoint).
    std::size_t rows() const noexcept;
    void residual(std::span<const double> x, std::vector<double>& f, std::vector<double>* xbar) const;
    double weight(std::size_t row) const noexcept;

    NoiseOperator noise_;
    DofMap map_;
    double dt_;
    std::size_t nodes_;
    ActionOptions options_;
    std::vector<double> lambda_, qinv2_;
};

/// Per-node H-gradient of action_eval's total with respect to the path samples.
std::vector<FourierField> action_gradient(const PathGrid& path, const NoiseOperator& noise,
                                          const ActionOptions& options = {});

}  // namespace nsqp
