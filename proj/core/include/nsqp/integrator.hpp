#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nsqp/fourier_field.hpp"
#include "nsqp/noise.hpp"
#include "nsqp/path_grid.hpp"
#include "nsqp/rng.hpp"

namespace nsqp {

/// Sign in front of B: forward is u' + A u + B(u, u) = f, reverse is v' + A v - B(v, v) = f.
enum class FlowSign { forward = 1, reverse = -1 };

/// Largest accepted dt * lambda_max.  Past this the integrating factor exp(-lambda dt) of the
/// top shell is below 1e-17 and the step resolves none of its dynamics.
inline constexpr double kMaxStiffness = 40.0;

/// Blow-up guard: solvers abort when |u|_H exceeds this multiple of max(|u0|_H, 1).
inline constexpr double kBlowUpFactor = 1e6;

/// Fixed-step integrating-factor Heun scheme (viscosity nu = 1).
///
/// The linear part exp(-A dt) is applied exactly per mode; the nonlinearity and forcing are
/// treated with the explicit trapezoidal (Heun) rule in the integrating-factor variable.
class IntegratorConfig {
public:
    /// Throws ValidationError for dt <= 0 or dt * lambda_max > kMaxStiffness.
    IntegratorConfig(GridPtr grid, double dt, bool nonlinear = true);

    double dt() const noexcept { return dt_; }
    double nu() const noexcept { return 1.0; }
    /// When false B is dropped (linear Stokes/OU dynamics).
    bool nonlinear() const noexcept { return nonlinear_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    /// exp(-lambda_i dt) for flat mode i.
    double decay(std::size_t i) const noexcept { return decay_[i]; }

private:
    GridPtr grid_;
    double dt_;
    bool nonlinear_;
    std::vector<double> decay_;
};

/// Reusable single-trajectory stepper; holds scratch fields so long runs do not allocate.
class Stepper {
public:
    explicit Stepper(const IntegratorConfig& cfg);

    /// One step of u' + A u + sign B(u, u) = f with f taken as f_now at t_n and f_next at
    /// t_{n+1} (either may be null for zero forcing).  Throws BlowUpError on a non-finite state.
    void deterministic(FourierField& u, const FourierField* f_now, const FourierField* f_next, FlowSign sign,
                       std::size_t step_index = 0);

    /// Deterministic substep followed by the additive increment sqrt(eps dt) Q xi, with one
    /// standard normal per real degree of freedom of the retained (and parity-restricted)
    /// space, Hermitian-symmetrized.  eps = 0 draws nothing and is bitwise the deterministic step.
    void stochastic(FourierField& u, double eps, const NoiseOperator& noise, PhiloxStream& rng,
                    std::size_t step_index = 0);

    const IntegratorConfig& config() const noexcept { return cfg_; }

private:
    void nonlinear_term(const FourierField& u, FlowSign sign, const FourierField* f, FourierField& out) const;

    IntegratorConfig cfg_;
    FourierField k1_, k2_, trial_;
};

FourierField step_deterministic(const FourierField& u, const FourierField& f, const IntegratorConfig& cfg,
                                FlowSign sign = FlowSign::forward);

FourierField step_stochastic(const FourierField& u, const IntegratorConfig& cfg, double eps,
                             const NoiseOperator& noise, PhiloxStream& rng);

/// Time-dependent forcing; an empty function means f = 0.
using Forcing = std::function<FourierField(double t)>;

/// Integrates from u0 on [0, T] with round(T / dt) steps and returns every node.
/// Throws ValidationError when T < dt and BlowUpError (with the step index) when the state
/// becomes non-finite or |u|_H exceeds kBlowUpFactor times the initial scale.
PathGrid solve_deterministic(const FourierField& u0, const Forcing& forcing, double horizon,
                             const IntegratorConfig& cfg, FlowSign sign = FlowSign::forward);

}  // namespace nsqp
