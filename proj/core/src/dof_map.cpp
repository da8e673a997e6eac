#include "nsqp/dof_map.hpp"

#include <cmath>
#include <numbers>

#include "nsqp/error.hpp"

namespace nsqp {

DofMap::DofMap(GridPtr grid) : grid_(std::move(grid)) {
    const auto& g = *grid_;
    for (std::size_t i : g.half_plane_indices()) {
        const double kx = g.kx(i), ky = g.ky(i);
        const double kn = std::hypot(kx, ky);
        if (g.parity() == Parity::none) {
            mode_.push_back(i);
            imaginary_.push_back(0);
            ex_.push_back(-ky / kn);
            ey_.push_back(kx / kn);
        }
        mode_.push_back(i);
        imaginary_.push_back(1);
        ex_.push_back(-ky / kn);
        ey_.push_back(kx / kn);
    }
}

void DofMap::to_dofs(const FourierField& u, std::span<double> out) const {
    if (!grid_->same_as(u.grid())) throw GridMismatchError();
    if (out.size() != size()) throw ValidationError("dof buffer has wrong size");
    for (std::size_t d = 0; d < size(); ++d) {
        const std::size_t i = mode_[d];
        const Complex c = ex_[d] * u.x(i) + ey_[d] * u.y(i);
        out[d] = std::numbers::sqrt2 * (imaginary_[d] ? c.imag() : c.real());
    }
}

std::vector<double> DofMap::to_dofs(const FourierField& u) const {
    std::vector<double> out(size());
    to_dofs(u, out);
    return out;
}

void DofMap::from_dofs(std::span<const double> x, FourierField& out) const {
    if (!grid_->same_as(out.grid())) throw GridMismatchError();
    if (x.size() != size()) throw ValidationError("dof buffer has wrong size");
    out.set_zero();
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t d = 0; d < size(); ++d) {
        const std::size_t i = mode_[d];
        const Complex c = imaginary_[d] ? Complex{0.0, x[d] * inv_sqrt2} : Complex{x[d] * inv_sqrt2, 0.0};
        out.x(i) += c * ex_[d];
        out.y(i) += c * ey_[d];
    }
    for (std::size_t i : grid_->half_plane_indices()) {
        const std::size_t j = grid_->partner(i);
        out.x(j) = std::conj(out.x(i));
        out.y(j) = std::conj(out.y(i));
    }
}

FourierField DofMap::from_dofs(std::span<const double> x) const {
    FourierField out(grid_);
    from_dofs(x, out);
    return out;
}

}  // namespace nsqp
