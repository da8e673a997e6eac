#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nsqp {

namespace detail {
class FftPlans;
}

/// Symmetry restriction applied on top of the mode mask.
enum class Parity {
    none,  ///< all real-valued divergence-free fields
    odd,   ///< fields with u(-x) = -u(x); Fourier coefficients purely imaginary
};

/// How B(u, v) is evaluated.
enum class NonlinearBackend {
    pseudo_spectral,  ///< FFT to physical space, multiply, FFT back
    triad,            ///< direct sum over retained mode triples (small truncations)
};

/// Options that select the retained mode set of a grid.
struct GridOptions {
    /// Apply the 2/3 rule. When false every mode except the zero and Nyquist modes is retained
    /// and quadratic products alias.
    bool dealias = true;
    /// Optional Galerkin truncation: wavevectors to retain (their negatives are added).
    /// Each must lie inside the dealiasing mask. Empty keeps the full mask.
    std::vector<std::array<int, 2>> modes;
    Parity parity = Parity::none;
    NonlinearBackend backend = NonlinearBackend::pseudo_spectral;

    bool operator==(const GridOptions&) const = default;
};

/// Geometry and wavenumber lattice of the periodic square [0, L)^2 resolved with N x N modes.
///
/// Storage order is FFT order: flat index i = iy * N + ix, with integer wavenumber
/// k_x = ix for ix <= N/2 and ix - N otherwise (same for y).  The zero mode is never
/// retained; the Nyquist row and column are never retained either, so the retained set is
/// always closed under k -> -k.
///
/// Eigenvalues of the Stokes operator are lambda_k = (2 pi / L)^2 |k|^2.
class SpectralGrid {
public:
    SpectralGrid(double length, int modes, GridOptions options);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    double length() const noexcept { return length_; }
    int modes() const noexcept { return n_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
    const GridOptions& options() const noexcept { return options_; }
    Parity parity() const noexcept { return options_.parity; }
    NonlinearBackend backend() const noexcept { return options_.backend; }

    /// Largest |k_i| kept by the dealiasing rule (3 |k_i| < N), or N/2 - 1 without dealiasing.
    int dealias_limit() const noexcept { return dealias_limit_; }

    int kx(std::size_t i) const noexcept { return kx_[i]; }
    int ky(std::size_t i) const noexcept { return ky_[i]; }
    /// Physical wavevector component 2 pi k / L.
    double wx(std::size_t i) const noexcept { return wave_ * kx_[i]; }
    double wy(std::size_t i) const noexcept { return wave_ * ky_[i]; }
    double lambda(std::size_t i) const noexcept { return lambda_[i]; }
    bool in_dealias_mask(std::size_t i) const noexcept { return dealias_mask_[i] != 0; }
    bool retained(std::size_t i) const noexcept { return retained_mask_[i] != 0; }
    /// Flat index of the mode -k.
    std::size_t partner(std::size_t i) const noexcept { return partner_[i]; }
    std::size_t index_of(int kx, int ky) const;

    std::span<const std::size_t> retained_indices() const noexcept { return retained_; }
    /// Retained modes with k_y > 0, or k_y == 0 and k_x > 0; one representative per +/-k pair.
    std::span<const std::size_t> half_plane_indices() const noexcept { return half_plane_; }

    /// 4 pi^2 / L^2, the first eigenvalue of the Stokes operator on the torus.
    double lambda1() const noexcept { return wave_ * wave_; }
    double lambda_min_retained() const noexcept { return lambda_min_; }
    double lambda_max_retained() const noexcept { return lambda_max_; }

    /// Same length, modes and options (grids compare by value).
    bool same_as(const SpectralGrid& other) const noexcept;

    /// One (k, p, q) entry per ordered pair of retained modes with p + q = k retained.
    /// Built only for the triad backend.
    struct Triad {
        std::size_t k, p, q;
    };
    std::span<const Triad> triads() const noexcept { return triads_; }

    const detail::FftPlans& fft() const noexcept { return *fft_; }

private:
    double length_;
    int n_;
    GridOptions options_;
    double wave_;
    int dealias_limit_;
    std::vector<int> kx_, ky_;
    std::vector<double> lambda_;
    std::vector<unsigned char> dealias_mask_, retained_mask_;
    std::vector<std::size_t> partner_, retained_, half_plane_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
    std::vector<Triad> triads_;
    std::unique_ptr<detail::FftPlans> fft_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Builds a grid of side `length` with `modes` points per dimension.
/// Throws ValidationError for odd or too small `modes`, non-positive length, or truncation
/// modes outside the dealiasing mask.
GridPtr make_grid(double length, int modes, GridOptions options = {});

}  // namespace nsqp
