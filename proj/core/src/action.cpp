#include "nsqp/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsqp/error.hpp"
#include "nsqp/operators.hpp"
#include "nsqp/parallel.hpp"
#include "nsqp/trajectory_io.hpp"

namespace nsqp {

namespace {

void require_three_nodes(std::size_t nodes) {
    if (nodes < 3) throw ValidationError("action needs a path with at least three nodes");
}

// Row n of the second-order differentiation matrix: (column, weight * 2 dt) triples.
struct Stencil {
    std::size_t col[3];
    double w[3];
    int count;
};

Stencil stencil(std::size_t n, std::size_t nodes) {
    if (n == 0) return {{0, 1, 2}, {-3.0, 4.0, -1.0}, 3};
    if (n + 1 == nodes) return {{n - 2, n - 1, n}, {1.0, -4.0, 3.0}, 3};
    return {{n - 1, n + 1, 0}, {-1.0, 1.0, 0.0}, 2};
}

// B(u_n, u_n) in dof coordinates for every node.
std::vector<double> nonlinear_dofs(const DofMap& map, std::span<const double> x, std::size_t nodes,
                                   unsigned threads) {
    const std::size_t m = map.size();
    std::vector<double> out(nodes * m);
    parallel_for(nodes, threads, [&](std::size_t n) {
        const FourierField u = map.from_dofs(x.subspan(n * m, m));
        map.to_dofs(bilinear_B(u, u), std::span<double>(out).subspan(n * m, m));
    });
    return out;
}

}  // namespace

std::vector<FourierField> time_derivative(const PathGrid& path) {
    require_three_nodes(path.size());
    const double inv = 1.0 / (2.0 * path.dt());
    std::vector<FourierField> out;
    out.reserve(path.size());
    for (std::size_t n = 0; n < path.size(); ++n) {
        const Stencil s = stencil(n, path.size());
        FourierField d(path.grid_ptr());
        for (int j = 0; j < s.count; ++j) d.axpy(s.w[j] * inv, path[s.col[j]]);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<FourierField> residual_H(const PathGrid& path, const ActionOptions& options) {
    auto out = time_derivative(path);
    for (std::size_t n = 0; n < path.size(); ++n) {
        out[n] += stokes_apply(path[n]);
        if (options.nonlinear) out[n] += bilinear_B(path[n], path[n]);
    }
    return out;
}

DiscreteAction::DiscreteAction(NoiseOperator noise, double dt, std::size_t nodes, ActionOptions options)
    : noise_(std::move(noise)), map_(noise_.grid_ptr()), dt_(dt), nodes_(nodes), options_(options) {
    require_three_nodes(nodes);
    if (!(dt > 0.0)) throw ValidationError("action time step must be positive");
    lambda_.resize(map_.size());
    qinv2_.resize(map_.size());
    for (std::size_t d = 0; d < map_.size(); ++d) {
        lambda_[d] = map_.lambda(d);
        const double q = noise_.multiplier(map_.mode(d));
        qinv2_[d] = 1.0 / (q * q);
    }
}

std::vector<double> DiscreteAction::pack(const PathGrid& path) const {
    if (path.size() != nodes_) throw ValidationError("path has the wrong number of nodes");
    const std::size_t m = map_.size();
    std::vector<double> x(nodes_ * m);
    for (std::size_t n = 0; n < nodes_; ++n) map_.to_dofs(path[n], std::span<double>(x).subspan(n * m, m));
    return x;
}

PathGrid DiscreteAction::unpack(std::span<const double> x, double t0) const {
    const std::size_t m = map_.size();
    std::vector<FourierField> samples;
    samples.reserve(nodes_);
    for (std::size_t n = 0; n < nodes_; ++n) samples.push_back(map_.from_dofs(x.subspan(n * m, m)));
    return PathGrid(t0, dt_, std::move(samples));
}

std::size_t DiscreteAction::rows() const noexcept {
    return options_.scheme == ActionScheme::midpoint ? nodes_ - 1 : nodes_;
}

double DiscreteAction::weight(std::size_t row) const noexcept {
    if (options_.scheme == ActionScheme::midpoint) return dt_;
    return (row == 0 || row + 1 == nodes_) ? 0.5 * dt_ : dt_;
}

// f gets one residual per row.  For the midpoint scheme `xbar` (when given) receives the
// interval midpoints, which the gradient needs for the nonlinear term.
void DiscreteAction::residual(std::span<const double> x, std::vector<double>& f, std::vector<double>* xbar) const {
    if (x.size() != size()) throw ValidationError("coordinate vector has the wrong size");
    const std::size_t m = map_.size();
    f.assign(rows() * m, 0.0);
    if (options_.scheme == ActionScheme::midpoint) {
        std::vector<double> mid((nodes_ - 1) * m);
        const double inv = 1.0 / dt_;
        for (std::size_t n = 0; n + 1 < nodes_; ++n) {
            const double* a = x.data() + n * m;
            const double* b = a + m;
            double* fn = f.data() + n * m;
            double* mn = mid.data() + n * m;
            for (std::size_t d = 0; d < m; ++d) {
                mn[d] = 0.5 * (a[d] + b[d]);
                fn[d] = (b[d] - a[d]) * inv + lambda_[d] * mn[d];
            }
        }
        if (options_.nonlinear) {
            const auto bn = nonlinear_dofs(map_, mid, nodes_ - 1, options_.threads);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += bn[i];
        }
        if (xbar != nullptr) *xbar = std::move(mid);
        return;
    }
    const double inv = 1.0 / (2.0 * dt_);
    for (std::size_t n = 0; n < nodes_; ++n) {
        const Stencil s = stencil(n, nodes_);
        double* fn = f.data() + n * m;
        for (int j = 0; j < s.count; ++j) {
            const double* xc = x.data() + s.col[j] * m;
            const double w = s.w[j] * inv;
            for (std::size_t d = 0; d < m; ++d) fn[d] += w * xc[d];
        }
        const double* xn = x.data() + n * m;
        for (std::size_t d = 0; d < m; ++d) fn[d] += lambda_[d] * xn[d];
    }
    if (options_.nonlinear) {
        const auto b = nonlinear_dofs(map_, x, nodes_, options_.threads);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += b[i];
    }
}

double DiscreteAction::value(std::span<const double> x) const {
    std::vector<double> f;
    residual(x, f, nullptr);
    const std::size_t m = map_.size();
    double total = 0.0;
    for (std::size_t n = 0; n < rows(); ++n) {
        double s = 0.0;
        for (std::size_t d = 0; d < m; ++d) s += qinv2_[d] * f[n * m + d] * f[n * m + d];
        total += 0.5 * weight(n) * s;
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

double DiscreteAction::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
    if (grad.size() != size()) throw ValidationError("gradient buffer has the wrong size");
    std::vector<double> f, mid;
    residual(x, f, &mid);
    const std::size_t m = map_.size();
    const bool midpoint = options_.scheme == ActionScheme::midpoint;
    double total = 0.0;
    // f becomes g_n = w_n Q^{-2} f_n in place.
    for (std::size_t n = 0; n < rows(); ++n) {
        const double w = weight(n);
        double s = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
            const double fd = f[n * m + d];
            s += qinv2_[d] * fd * fd;
            f[n * m + d] = w * qinv2_[d] * fd;
        }
        total += 0.5 * w * s;
    }
    const auto& g = f;

    // Linear part: transpose of the difference operator plus A, row by row.
    std::fill(grad.begin(), grad.end(), 0.0);
    if (midpoint) {
        const double inv = 1.0 / dt_;
        for (std::size_t n = 0; n < rows(); ++n) {
            const double* gn = g.data() + n * m;
            double* left = grad.data() + n * m;
            double* right = left + m;
            for (std::size_t d = 0; d < m; ++d) {
                const double half_a = 0.5 * lambda_[d] * gn[d];
                left[d] += half_a - inv * gn[d];
                right[d] += half_a + inv * gn[d];
            }
        }
    } else {
        const double inv = 1.0 / (2.0 * dt_);
        for (std::size_t n = 0; n < nodes_; ++n) {
            const Stencil s = stencil(n, nodes_);
            const double* gn = g.data() + n * m;
            for (int j = 0; j < s.count; ++j) {
                double* out = grad.data() + s.col[j] * m;
                const double w = s.w[j] * inv;
                for (std::size_t d = 0; d < m; ++d) out[d] += w * gn[d];
            }
            double* out = grad.data() + n * m;
            for (std::size_t d = 0; d < m; ++d) out[d] += lambda_[d] * gn[d];
        }
    }
    if (options_.nonlinear) {
        // d/du <g, B(u, u)> = B_adj1(u, g) - B(u, g), using b(u, v, w) = -b(u, w, v).
        std::vector<double> jt(rows() * m);
        const std::span<const double> at = midpoint ? std::span<const double>(mid) : x;
        parallel_for(rows(), options_.threads, [&](std::size_t n) {
            const FourierField u = map_.from_dofs(at.subspan(n * m, m));
            const FourierField gn = map_.from_dofs(std::span<const double>(g).subspan(n * m, m));
            FourierField adj = bilinear_B_adjoint_first(u, gn);
            adj -= bilinear_B(u, gn);
            map_.to_dofs(adj, std::span<double>(jt).subspan(n * m, m));
        });
        for (std::size_t n = 0; n < rows(); ++n) {
            const double* a = jt.data() + n * m;
            if (midpoint) {
                double* left = grad.data() + n * m;
                double* right = left + m;
                for (std::size_t d = 0; d < m; ++d) {
                    left[d] += 0.5 * a[d];
                    right[d] += 0.5 * a[d];
                }
            } else {
                double* out = grad.data() + n * m;
                for (std::size_t d = 0; d < m; ++d) out[d] += a[d];
            }
        }
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

ActionBreakdown action_eval(const PathGrid& path, const NoiseOperator& noise, const ActionOptions& options) {
    require_three_nodes(path.size());
    const DiscreteAction action(noise, path.dt(), path.size(), options);
    const auto x = action.pack(path);
    const DofMap& map = action.dof_map();
    const std::size_t m = map.size();
    const std::size_t nodes = path.size();

    std::vector<double> b(nodes * m, 0.0);
    if (options.nonlinear) b = nonlinear_dofs(map, x, nodes, options.threads);

    const double inv = 1.0 / (2.0 * path.dt());
    double total = 0.0, total0 = 0.0, reverse = 0.0;
    std::vector<double> du(m);
    for (std::size_t n = 0; n < nodes; ++n) {
        const Stencil s = stencil(n, nodes);
        std::fill(du.begin(), du.end(), 0.0);
        for (int j = 0; j < s.count; ++j) {
            for (std::size_t d = 0; d < m; ++d) du[d] += s.w[j] * inv * x[s.col[j] * m + d];
        }
        double sd = 0.0, s0 = 0.0, sr = 0.0;
        for (std::size_t d = 0; d < m; ++d) {
            const double au = map.lambda(d) * x[n * m + d];
            const double fwd = du[d] + au + b[n * m + d];
            const double rev = du[d] - au + b[n * m + d];
            const double q = noise.multiplier(map.mode(d));
            sd += fwd * fwd / (q * q);
            s0 += fwd * fwd;
            sr += rev * rev;
        }
        const double w = (n == 0 || n + 1 == nodes) ? 0.5 * path.dt() : path.dt();
        total += 0.5 * w * sd;
        total0 += 0.5 * w * s0;
        reverse += 0.5 * w * sr;
    }

    ActionBreakdown out;
    out.t0 = path.t0();
    out.t1 = path.t1();
    out.dt = path.dt();
    out.delta = noise.delta();
    out.total = std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
    out.residual_reverse = reverse;
    const double v1 = v_norm(path.back()), v0 = v_norm(path.front());
    out.boundary_gain = v1 * v1 - v0 * v0;
    out.defect = std::abs(total0 - (reverse + out.boundary_gain)) / std::max(total0, 1e-300);
    return out;
}

double action_decomposition_check(const PathGrid& path, const ActionOptions& options) {
    return action_eval(path, NoiseOperator(path.grid_ptr(), 0.0), options).defect;
}

std::string action_csv_header() { return "t0,t1,dt,delta,total,residual_reverse,boundary_gain,defect"; }

std::string action_csv_row(const ActionBreakdown& b) {
    return format_double(b.t0) + ',' + format_double(b.t1) + ',' + format_double(b.dt) + ',' +
           format_double(b.delta) + ',' + format_double(b.total) + ',' + format_double(b.residual_reverse) + ',' +
           format_double(b.boundary_gain) + ',' + format_double(b.defect);
}

std::vector<FourierField> action_gradient(const PathGrid& path, const NoiseOperator& noise,
                                          const ActionOptions& options) {
    const DiscreteAction action(noise, path.dt(), path.size(), options);
    const auto x = action.pack(path);
    std::vector<double> grad(x.size());
    action.value_and_gradient(x, grad);
    std::vector<FourierField> out;
    const std::size_t m = action.dofs();
    for (std::size_t n = 0; n < path.size(); ++n) {
        out.push_back(action.dof_map().from_dofs(std::span<const double>(grad).subspan(n * m, m)));
    }
    return out;
}

}  // namespace nsqp
