#pragma once

#include "nsqp/fourier_field.hpp"

namespace nsqp {

/// H inner product: <u, v>_H = sum_k Re(u_k . conj(v_k)) over the whole lattice.
///
/// This is the mean-square normalization (1/L^2) int u.v dx, fixed for the whole library:
/// every norm, the action functional and the noise covariance use it.
double inner_h(const FourierField& u, const FourierField& v);

struct Norms {
    double h = 0.0;           ///< |u|_H
    double v = 0.0;           ///< |u|_V = |A^{1/2} u|_H
    double fractional = 0.0;  ///< |A^{gamma/2} u|_H for the requested gamma
};

Norms norms(const FourierField& u, double gamma = 2.0);
double h_norm(const FourierField& u);
double v_norm(const FourierField& u);

/// Orthogonal projection onto divergence-free fields, u_k - (k . u_k) k / |k|^2 per mode.
/// The zero mode is removed.
FourierField leray_project(const FourierField& f);

/// Multiplies mode k by lambda_k^gamma (gamma = 1 is the Stokes operator A).
FourierField stokes_apply(const FourierField& u, double gamma = 1.0);

/// Restricts a field to the grid's retained modes and parity subspace.
FourierField galerkin_project(const FourierField& u);
void galerkin_project_inplace(FourierField& u);

/// B(u, v) = P((u . grad) v), restricted to the retained modes.
///
/// Inputs are expected to be supported on the retained modes; with the dealiasing mask on,
/// the product is then computed without aliasing and the cancellation identities
/// <B(u, v), v> = 0 and <A u, B(u, u)> = 0 hold to roundoff.
FourierField bilinear_B(const FourierField& u, const FourierField& v);

/// Adjoint of w -> B(w, u): the field G with <G, w>_H = <B(w, u), g>_H for every
/// retained divergence-free w, i.e. P(sum_j g_j grad u_j).
FourierField bilinear_B_adjoint_first(const FourierField& u, const FourierField& g);

/// b(u, v, w) = <B(u, v), w>_H.
double trilinear_b(const FourierField& u, const FourierField& v, const FourierField& w);

}  // namespace nsqp
