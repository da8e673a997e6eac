#pragma once

#include <cstddef>
#include <vector>

#include "nsqp/fourier_field.hpp"

namespace nsqp {

/// Trajectory sampled on the uniform nodes t0, t0 + dt, ..., t1 (both endpoints included).
class PathGrid {
public:
    /// Throws ValidationError for dt <= 0, fewer than two samples, or samples on different grids.
    PathGrid(double t0, double dt, std::vector<FourierField> samples);

    double t0() const noexcept { return t0_; }
    double t1() const noexcept { return t0_ + dt_ * static_cast<double>(samples_.size() - 1); }
    double dt() const noexcept { return dt_; }
    double time(std::size_t n) const noexcept { return t0_ + dt_ * static_cast<double>(n); }
    std::size_t size() const noexcept { return samples_.size(); }
    const GridPtr& grid_ptr() const noexcept { return samples_.front().grid_ptr(); }

    const FourierField& operator[](std::size_t n) const noexcept { return samples_[n]; }
    FourierField& operator[](std::size_t n) noexcept { return samples_[n]; }
    const FourierField& front() const noexcept { return samples_.front(); }
    const FourierField& back() const noexcept { return samples_.back(); }
    const std::vector<FourierField>& samples() const noexcept { return samples_; }

    /// Largest divergence / Hermitian defect over samples.
    double max_divergence_defect() const;
    double max_hermitian_defect() const;

    /// The path s -> u(-s) on [-t1, -t0].
    PathGrid time_reversed() const;

private:
    double t0_;
    double dt_;
    std::vector<FourierField> samples_;
};

}  // namespace nsqp
