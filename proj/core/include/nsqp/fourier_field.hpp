#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nsqp/spectral_grid.hpp"

namespace nsqp {

using Complex = std::complex<double>;

/// Velocity field on the torus stored as Fourier coefficients of its two components.
///
/// u(x) = sum_k u_k exp(2 pi i k.x / L).  Component c of mode i sits at data()[c * size + i].
/// Valid state fields are Hermitian (u_{-k} = conj(u_k)), have no zero mode, are supported on
/// the grid's retained modes and are divergence-free; operators in operators.hpp preserve this.
class FourierField {
public:
    /// Zero field.
    explicit FourierField(GridPtr grid);

    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const SpectralGrid& grid() const noexcept { return *grid_; }
    std::size_t modes() const noexcept { return grid_->size(); }

    Complex& x(std::size_t i) noexcept { return data_[i]; }
    Complex& y(std::size_t i) noexcept { return data_[grid_->size() + i]; }
    const Complex& x(std::size_t i) const noexcept { return data_[i]; }
    const Complex& y(std::size_t i) const noexcept { return data_[grid_->size() + i]; }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    FourierField& operator+=(const FourierField& other);
    FourierField& operator-=(const FourierField& other);
    FourierField& operator*=(double s) noexcept;
    /// this += s * other
    FourierField& axpy(double s, const FourierField& other);
    void set_zero() noexcept;

    /// Throws GridMismatchError unless both fields share a grid (by value).
    void require_same_grid(const FourierField& other) const;

private:
    GridPtr grid_;
    std::vector<Complex> data_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double s, FourierField a);

/// Largest |u_{-k} - conj(u_k)| over modes, relative to the largest coefficient magnitude.
double hermitian_defect(const FourierField& u);

/// Largest |k . u_k| / (|k| |u|_H) over modes; zero for the zero field.
double divergence_defect(const FourierField& u);

}  // namespace nsqp
