#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsqp/fourier_field.hpp"

namespace nsqp {

/// Isometry between retained divergence-free fields and R^n.
///
/// For a half-plane mode k with unit vector e_k = k_perp / |k|, u_k = c_k e_k and
/// u_{-k} = conj(u_k).  The real coordinates are sqrt(2) Re c_k and sqrt(2) Im c_k (only the
/// imaginary one under odd parity), so the Euclidean inner product equals <., .>_H.
class DofMap {
public:
    explicit DofMap(GridPtr grid);

    std::size_t size() const noexcept { return mode_.size(); }
    const GridPtr& grid_ptr() const noexcept { return grid_; }

    /// Flat mode index carrying coordinate d.
    std::size_t mode(std::size_t d) const noexcept { return mode_[d]; }
    double lambda(std::size_t d) const noexcept { return grid_->lambda(mode_[d]); }

    void to_dofs(const FourierField& u, std::span<double> out) const;
    std::vector<double> to_dofs(const FourierField& u) const;
    void from_dofs(std::span<const double> x, FourierField& out) const;
    FourierField from_dofs(std::span<const double> x) const;

private:
    GridPtr grid_;
    std::vector<std::size_t> mode_;
    std::vector<unsigned char> imaginary_;
    std::vector<double> ex_, ey_;
};

}  // namespace nsqp
