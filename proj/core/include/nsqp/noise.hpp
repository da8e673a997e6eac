#pragma once

#include <vector>

#include "nsqp/fourier_field.hpp"

namespace nsqp {

/// Diagonal noise mollifier Q_delta = (I + delta A^{beta/2})^{-1}.
///
/// Mode k is multiplied by q_k = 1 / (1 + delta lambda_k^{beta/2}).  delta = 0 is the identity
/// (space-time white noise in H).
class NoiseOperator {
public:
    NoiseOperator(GridPtr grid, double delta, double beta = 2.0);

    double delta() const noexcept { return delta_; }
    double beta() const noexcept { return beta_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }

    /// q_k for flat mode index i (1 for the zero mode).
    double multiplier(std::size_t i) const noexcept { return q_[i]; }

    /// sum over retained modes of q_k^2 / lambda_k (trace of A^{-1} Q^2 on the lattice).
    double trace_diagnostic() const;

private:
    GridPtr grid_;
    double delta_;
    double beta_;
    std::vector<double> q_;
};

/// Multiplies every mode by q_k, or by 1/q_k when `inverse` is set.
FourierField q_apply(const NoiseOperator& op, const FourierField& u, bool inverse = false);

}  // namespace nsqp
