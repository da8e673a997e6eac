#include "nsqp/operators.hpp"

#include <cmath>

#include "fft.hpp"
#include "nsqp/error.hpp"

namespace nsqp {

namespace {

constexpr Complex I{0.0, 1.0};

void project_mode(const SpectralGrid& g, std::size_t i, Complex& ux, Complex& uy) {
    const double kx = g.kx(i), ky = g.ky(i);
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) {
        ux = uy = Complex{};
        return;
    }
    const Complex kdotu = kx * ux + ky * uy;
    ux -= kdotu * (kx / k2);
    uy -= kdotu * (ky / k2);
}

// Retained-mode restriction, Leray projection and parity projection, in place.
void finish_nonlinear(FourierField& out) {
    const auto& g = out.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.retained(i)) {
            out.x(i) = out.y(i) = Complex{};
            continue;
        }
        project_mode(g, i, out.x(i), out.y(i));
        if (g.parity() == Parity::odd) {
            out.x(i) = Complex{0.0, out.x(i).imag()};
            out.y(i) = Complex{0.0, out.y(i).imag()};
        }
    }
}

// Evaluates P(sum_j a_j d_i c_j)-type quadratic terms pseudo-spectrally:
//   first  : physical vector field a (two components)
//   second : field c whose gradient is taken
//   transpose_gradient = false:  out_i = sum_j a_j d_j c_i   ((a . grad) c)
//   transpose_gradient = true :  out_i = sum_j a_j d_i c_j   (sum_j a_j grad c_j)
// Two real fields are packed into one complex transform (re + i im) to halve FFT count.
FourierField quadratic_pseudo_spectral(const FourierField& a, const FourierField& c, bool transpose_gradient) {
    const auto& g = a.grid();
    const std::size_t n = g.size();
    const double inv = 1.0 / static_cast<double>(n);
    Complex* spec = detail::scratch(0, n);
    Complex* av = detail::scratch(1, n);
    Complex* cx = detail::scratch(2, n);
    Complex* cy = detail::scratch(3, n);

    for (std::size_t i = 0; i < n; ++i) spec[i] = a.x(i) + I * a.y(i);
    g.fft().to_physical(spec, av);
    // cx holds (d_x c_x, d_y c_x), cy holds (d_x c_y, d_y c_y).
    for (std::size_t i = 0; i < n; ++i) spec[i] = I * g.wx(i) * c.x(i) + I * (I * g.wy(i) * c.x(i));
    g.fft().to_physical(spec, cx);
    for (std::size_t i = 0; i < n; ++i) spec[i] = I * g.wx(i) * c.y(i) + I * (I * g.wy(i) * c.y(i));
    g.fft().to_physical(spec, cy);

    for (std::size_t j = 0; j < n; ++j) {
        const double ax = av[j].real(), ay = av[j].imag();
        const double dxcx = cx[j].real(), dycx = cx[j].imag();
        const double dxcy = cy[j].real(), dycy = cy[j].imag();
        double ox, oy;
        if (!transpose_gradient) {
            ox = ax * dxcx + ay * dycx;
            oy = ax * dxcy + ay * dycy;
        } else {
            ox = ax * dxcx + ay * dxcy;
            oy = ax * dycx + ay * dycy;
        }
        av[j] = Complex{ox, oy};
    }
    g.fft().to_spectral(av, spec);

    FourierField out(a.grid_ptr());
    for (std::size_t i = 0; i < n; ++i) {
        const Complex z = spec[i] * inv;
        const Complex zp = std::conj(spec[g.partner(i)]) * inv;
        out.x(i) = 0.5 * (z + zp);
        out.y(i) = -0.5 * I * (z - zp);
    }
    finish_nonlinear(out);
    return out;
}

FourierField quadratic_triad(const FourierField& a, const FourierField& c, bool transpose_gradient) {
    const auto& g = a.grid();
    FourierField out(a.grid_ptr());
    for (const auto& t : g.triads()) {
        const double qx = g.wx(t.q), qy = g.wy(t.q);
        if (!transpose_gradient) {
            const Complex s = I * (a.x(t.p) * qx + a.y(t.p) * qy);
            out.x(t.k) += s * c.x(t.q);
            out.y(t.k) += s * c.y(t.q);
        } else {
            const Complex s = I * (a.x(t.p) * c.x(t.q) + a.y(t.p) * c.y(t.q));
            out.x(t.k) += s * qx;
            out.y(t.k) += s * qy;
        }
    }
    finish_nonlinear(out);
    return out;
}

FourierField quadratic(const FourierField& a, const FourierField& c, bool transpose_gradient) {
    a.require_same_grid(c);
    if (a.grid().backend() == NonlinearBackend::triad) return quadratic_triad(a, c, transpose_gradient);
    return quadratic_pseudo_spectral(a, c, transpose_gradient);
}

}  // namespace

double inner_h(const FourierField& u, const FourierField& v) {
    u.require_same_grid(v);
    const auto a = u.data();
    const auto b = v.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

Norms norms(const FourierField& u, double gamma) {
    const auto& g = u.grid();
    double h2 = 0.0, v2 = 0.0, f2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double lam = g.lambda(i);
        if (lam == 0.0) continue;
        const double m = std::norm(u.x(i)) + std::norm(u.y(i));
        h2 += m;
        v2 += lam * m;
        f2 += std::pow(lam, gamma) * m;
    }
    return {std::sqrt(h2), std::sqrt(v2), std::sqrt(f2)};
}

double h_norm(const FourierField& u) { return norms(u, 0.0).h; }
double v_norm(const FourierField& u) { return norms(u, 1.0).v; }

FourierField leray_project(const FourierField& f) {
    FourierField out = f;
    const auto& g = out.grid();
    for (std::size_t i = 0; i < g.size(); ++i) project_mode(g, i, out.x(i), out.y(i));
    return out;
}

FourierField stokes_apply(const FourierField& u, double gamma) {
    FourierField out = u;
    const auto& g = out.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double lam = g.lambda(i);
        const double s = lam == 0.0 ? 0.0 : (gamma == 1.0 ? lam : std::pow(lam, gamma));
        out.x(i) *= s;
        out.y(i) *= s;
    }
    return out;
}

void galerkin_project_inplace(FourierField& u) {
    const auto& g = u.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.retained(i)) {
            u.x(i) = u.y(i) = Complex{};
        } else if (g.parity() == Parity::odd) {
            u.x(i) = Complex{0.0, u.x(i).imag()};
            u.y(i) = Complex{0.0, u.y(i).imag()};
        }
    }
}

FourierField galerkin_project(const FourierField& u) {
    FourierField out = u;
    galerkin_project_inplace(out);
    return out;
}

FourierField bilinear_B(const FourierField& u, const FourierField& v) { return quadratic(u, v, false); }

FourierField bilinear_B_adjoint_first(const FourierField& u, const FourierField& g) {
    return quadratic(g, u, true);
}

double trilinear_b(const FourierField& u, const FourierField& v, const FourierField& w) {
    return inner_h(bilinear_B(u, v), w);
}

}  // namespace nsqp
