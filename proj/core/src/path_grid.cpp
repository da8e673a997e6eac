#include "nsqp/path_grid.hpp"

#include <algorithm>
#include <cmath>

#include "nsqp/error.hpp"

namespace nsqp {

PathGrid::PathGrid(double t0, double dt, std::vector<FourierField> samples)
    : t0_(t0), dt_(dt), samples_(std::move(samples)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("path time step must be positive");
    if (samples_.size() < 2) throw ValidationError("a path needs at least two nodes");
    for (const auto& s : samples_) samples_.front().require_same_grid(s);
}

double PathGrid::max_divergence_defect() const {
    double worst = 0.0;
    for (const auto& s : samples_) worst = std::max(worst, divergence_defect(s));
    return worst;
}

double PathGrid::max_hermitian_defect() const {
    double worst = 0.0;
    for (const auto& s : samples_) worst = std::max(worst, hermitian_defect(s));
    return worst;
}

PathGrid PathGrid::time_reversed() const {
    std::vector<FourierField> rev(samples_.rbegin(), samples_.rend());
    return PathGrid(-t1(), dt_, std::move(rev));
}

}  // namespace nsqp
