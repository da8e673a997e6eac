#include "nsqp/fourier_field.hpp"

#include <algorithm>
#include <cmath>

#include "nsqp/error.hpp"

namespace nsqp {

FourierField::FourierField(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw ValidationError("FourierField needs a grid");
    data_.assign(2 * grid_->size(), Complex{});
}

void FourierField::require_same_grid(const FourierField& other) const {
    if (!grid_->same_as(*other.grid_)) throw GridMismatchError();
}

FourierField& FourierField::operator+=(const FourierField& other) {
    require_same_grid(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
    require_same_grid(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

FourierField& FourierField::operator*=(double s) noexcept {
    for (auto& c : data_) c *= s;
    return *this;
}

FourierField& FourierField::axpy(double s, const FourierField& other) {
    require_same_grid(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
    return *this;
}

void FourierField::set_zero() noexcept { std::fill(data_.begin(), data_.end(), Complex{}); }

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double s, FourierField a) { return a *= s; }

double hermitian_defect(const FourierField& u) {
    const auto& g = u.grid();
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t j = g.partner(i);
        worst = std::max({worst, std::abs(u.x(j) - std::conj(u.x(i))), std::abs(u.y(j) - std::conj(u.y(i)))});
        scale = std::max({scale, std::abs(u.x(i)), std::abs(u.y(i))});
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

double divergence_defect(const FourierField& u) {
    const auto& g = u.grid();
    double worst = 0.0, h2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        h2 += std::norm(u.x(i)) + std::norm(u.y(i));
        const double kn = std::hypot(g.wx(i), g.wy(i));
        if (kn == 0.0) continue;
        worst = std::max(worst, std::abs(g.wx(i) * u.x(i) + g.wy(i) * u.y(i)) / kn);
    }
    return h2 > 0.0 ? worst / std::sqrt(h2) : 0.0;
}

}  // namespace nsqp
