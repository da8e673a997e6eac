#include "nsqp/noise.hpp"

#include <cmath>
#include <string>

#include "nsqp/error.hpp"

namespace nsqp {

NoiseOperator::NoiseOperator(GridPtr grid, double delta, double beta)
    : grid_(std::move(grid)), delta_(delta), beta_(beta) {
    if (!grid_) throw ValidationError("NoiseOperator needs a grid");
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw ValidationError("noise delta must be finite and >= 0, got " + std::to_string(delta));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ValidationError("noise beta must be finite and > 0, got " + std::to_string(beta));
    }
    q_.resize(grid_->size());
    for (std::size_t i = 0; i < q_.size(); ++i) {
        const double lam = grid_->lambda(i);
        q_[i] = 1.0 / (1.0 + delta_ * std::pow(lam, 0.5 * beta_));
    }
}

double NoiseOperator::trace_diagnostic() const {
    double s = 0.0;
    for (std::size_t i : grid_->retained_indices()) s += q_[i] * q_[i] / grid_->lambda(i);
    return s;
}

FourierField q_apply(const NoiseOperator& op, const FourierField& u, bool inverse) {
    if (!op.grid_ptr()->same_as(u.grid())) throw GridMismatchError();
    FourierField out = u;
    for (std::size_t i = 0; i < out.modes(); ++i) {
        const double s = inverse ? 1.0 / op.multiplier(i) : op.multiplier(i);
        out.x(i) *= s;
        out.y(i) *= s;
    }
    return out;
}

}  // namespace nsqp
