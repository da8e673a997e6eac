#include "nsqp/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nsqp/error.hpp"
#include "nsqp/operators.hpp"

namespace nsqp {

IntegratorConfig::IntegratorConfig(GridPtr grid, double dt, bool nonlinear)
    : grid_(std::move(grid)), dt_(dt), nonlinear_(nonlinear) {
    if (!grid_) throw ValidationError("IntegratorConfig needs a grid");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive, got " + std::to_string(dt));
    if (dt * grid_->lambda_max_retained() > kMaxStiffness) {
        throw ValidationError("dt * lambda_max = " + std::to_string(dt * grid_->lambda_max_retained()) +
                              " exceeds the stiffness bound " + std::to_string(kMaxStiffness));
    }
    decay_.resize(grid_->size());
    for (std::size_t i = 0; i < decay_.size(); ++i) decay_[i] = std::exp(-grid_->lambda(i) * dt);
}

Stepper::Stepper(const IntegratorConfig& cfg)
    : cfg_(cfg), k1_(cfg.grid_ptr()), k2_(cfg.grid_ptr()), trial_(cfg.grid_ptr()) {}

void Stepper::nonlinear_term(const FourierField& u, FlowSign sign, const FourierField* f, FourierField& out) const {
    if (cfg_.nonlinear()) {
        out = bilinear_B(u, u);
        if (sign == FlowSign::forward) out *= -1.0;
    } else {
        out.set_zero();
    }
    if (f != nullptr) out += *f;
}

void Stepper::deterministic(FourierField& u, const FourierField* f_now, const FourierField* f_next, FlowSign sign,
                            std::size_t step_index) {
    u.require_same_grid(k1_);
    const auto& g = u.grid();
    const double dt = cfg_.dt();
    const bool has_rhs = cfg_.nonlinear() || f_now != nullptr || f_next != nullptr;
    if (!has_rhs) {
        for (std::size_t i : g.retained_indices()) {
            u.x(i) *= cfg_.decay(i);
            u.y(i) *= cfg_.decay(i);
        }
    } else {
        nonlinear_term(u, sign, f_now, k1_);
        for (std::size_t i : g.retained_indices()) {
            const double e = cfg_.decay(i);
            trial_.x(i) = e * (u.x(i) + dt * k1_.x(i));
            trial_.y(i) = e * (u.y(i) + dt * k1_.y(i));
        }
        nonlinear_term(trial_, sign, f_next, k2_);
        for (std::size_t i : g.retained_indices()) {
            const double e = cfg_.decay(i);
            u.x(i) = e * (u.x(i) + 0.5 * dt * k1_.x(i)) + 0.5 * dt * k2_.x(i);
            u.y(i) = e * (u.y(i) + 0.5 * dt * k1_.y(i)) + 0.5 * dt * k2_.y(i);
        }
    }
    double h2 = 0.0;
    for (std::size_t i : g.retained_indices()) h2 += std::norm(u.x(i)) + std::norm(u.y(i));
    if (!std::isfinite(h2)) throw BlowUpError(step_index, "non-finite state");
}

void Stepper::stochastic(FourierField& u, double eps, const NoiseOperator& noise, PhiloxStream& rng,
                         std::size_t step_index) {
    if (!(eps >= 0.0)) throw ValidationError("noise intensity must be >= 0");
    deterministic(u, nullptr, nullptr, FlowSign::forward, step_index);
    if (eps == 0.0) return;
    const auto& g = u.grid();
    const double scale = std::sqrt(0.5 * eps * cfg_.dt());
    const bool odd = g.parity() == Parity::odd;
    for (std::size_t i : g.half_plane_indices()) {
        const double kx = g.kx(i), ky = g.ky(i);
        const double kn = std::hypot(kx, ky);
        const double s = scale * noise.multiplier(i);
        const double re = odd ? 0.0 : rng.normal();
        const double im = rng.normal();
        const Complex c{s * re, s * im};
        const double ex = -ky / kn, ey = kx / kn;
        const std::size_t j = g.partner(i);
        u.x(i) += c * ex;
        u.y(i) += c * ey;
        u.x(j) += std::conj(c) * ex;
        u.y(j) += std::conj(c) * ey;
    }
}

FourierField step_deterministic(const FourierField& u, const FourierField& f, const IntegratorConfig& cfg,
                                FlowSign sign) {
    Stepper stepper(cfg);
    FourierField out = u;
    stepper.deterministic(out, &f, &f, sign);
    return out;
}

FourierField step_stochastic(const FourierField& u, const IntegratorConfig& cfg, double eps,
                             const NoiseOperator& noise, PhiloxStream& rng) {
    Stepper stepper(cfg);
    FourierField out = u;
    stepper.stochastic(out, eps, noise, rng);
    return out;
}

PathGrid solve_deterministic(const FourierField& u0, const Forcing& forcing, double horizon,
                             const IntegratorConfig& cfg, FlowSign sign) {
    const double dt = cfg.dt();
    if (!(horizon >= dt)) throw ValidationError("horizon must be at least one time step");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const double limit = kBlowUpFactor * std::max(h_norm(u0), 1.0);

    Stepper stepper(cfg);
    std::vector<FourierField> samples;
    samples.reserve(steps + 1);
    samples.push_back(u0);
    FourierField u = u0;
    std::optional<FourierField> f_now, f_next;
    if (forcing) f_now = forcing(0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        if (forcing) f_next = forcing(dt * static_cast<double>(n + 1));
        stepper.deterministic(u, f_now ? &*f_now : nullptr, f_next ? &*f_next : nullptr, sign, n);
        if (h_norm(u) > limit) throw BlowUpError(n, "|u|_H exceeded the blow-up guard");
        samples.push_back(u);
        f_now.swap(f_next);
    }
    return PathGrid(0.0, dt, std::move(samples));
}

}  // namespace nsqp
