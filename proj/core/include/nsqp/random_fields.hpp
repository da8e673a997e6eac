#pragma once

#include <numbers>

#include "nsqp/fourier_field.hpp"
#include "nsqp/rng.hpp"

namespace nsqp {

/// Divergence-free field on the +/-k pair with |u|_H = amplitude.
///
/// u_k = (amplitude / sqrt 2) e^{i phase} k_perp / |k|.  The default phase pi/2 gives a purely
/// imaginary coefficient, which also lies in the odd-parity subspace.
FourierField mode_field(GridPtr grid, int kx, int ky, double amplitude, double phase = std::numbers::pi / 2);

/// Random divergence-free field supported on retained modes with |k|^2 <= max_k2
/// (all retained modes when max_k2 <= 0), Gaussian coordinates with variance decaying as
/// |k|^{-2 * decay}, rescaled to |u|_H = target_h.
FourierField random_field(GridPtr grid, PhiloxStream& rng, double target_h, int max_k2 = 0, double decay = 1.0);

}  // namespace nsqp
