#include "nsqp/random_fields.hpp"

#include <cmath>

#include "nsqp/dof_map.hpp"
#include "nsqp/error.hpp"
#include "nsqp/operators.hpp"

namespace nsqp {

FourierField mode_field(GridPtr grid, int kx, int ky, double amplitude, double phase) {
    FourierField u(grid);
    const std::size_t i = grid->index_of(kx, ky);
    if (!grid->retained(i)) throw ValidationError("mode is not retained by the grid");
    const double kn = std::hypot(kx, ky);
    const Complex c = std::polar(amplitude / std::numbers::sqrt2, phase);
    u.x(i) = c * (-ky / kn);
    u.y(i) = c * (kx / kn);
    const std::size_t j = grid->partner(i);
    u.x(j) = std::conj(u.x(i));
    u.y(j) = std::conj(u.y(i));
    galerkin_project_inplace(u);
    return u;
}

FourierField random_field(GridPtr grid, PhiloxStream& rng, double target_h, int max_k2, double decay) {
    const DofMap map(grid);
    std::vector<double> x(map.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        const std::size_t i = map.mode(d);
        const int k2 = grid->kx(i) * grid->kx(i) + grid->ky(i) * grid->ky(i);
        const double z = rng.normal();
        x[d] = (max_k2 > 0 && k2 > max_k2) ? 0.0 : z * std::pow(static_cast<double>(k2), -0.5 * decay);
    }
    FourierField u = map.from_dofs(x);
    const double h = h_norm(u);
    if (h > 0.0) u *= target_h / h;
    return u;
}

}  // namespace nsqp
