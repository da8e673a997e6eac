#include "nsqp/quasipotential.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "nsqp/error.hpp"
#include "nsqp/operators.hpp"

namespace nsqp {

namespace {

std::size_t node_count(double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ValidationError("horizon and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    if (steps < 2) throw ValidationError("horizon must span at least two time steps");
    return steps + 1;
}

void require_representable(const DofMap& map, const FourierField& phi) {
    const FourierField back = map.from_dofs(map.to_dofs(phi));
    if (h_norm(back - phi) > 1e-12 * std::max(h_norm(phi), 1e-300) && h_norm(phi) > 0.0) {
        throw ValidationError("phi is not in the retained divergence-free (parity) subspace");
    }
}

// Exact inverse Hessian of the linear (B = 0) action restricted to interior nodes, one sparse
// Cholesky factor per distinct eigenvalue.  Modes decouple, so this is block diagonal.
class LinearPreconditioner {
public:
    LinearPreconditioner(const DiscreteAction& action) : m_(action.dofs()), interior_(action.nodes() - 2) {
        const DofMap& map = action.dof_map();
        std::map<double, std::vector<std::size_t>> groups;
        for (std::size_t d = 0; d < m_; ++d) groups[map.lambda(d)].push_back(d);
        q2_.resize(m_);
        for (std::size_t d = 0; d < m_; ++d) {
            const double q = action.noise().multiplier(map.mode(d));
            q2_[d] = q * q;
        }
        for (auto& [lambda, dofs] : groups) {
            Group g;
            g.dofs = std::move(dofs);
            g.solver = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
            g.solver->compute(hessian(lambda, action.dt(), action.nodes(), action.scheme()));
            if (g.solver->info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");
            groups_.push_back(std::move(g));
        }
    }

    void apply(Eigen::VectorXd& r) const {
        for (const Group& g : groups_) {
            Eigen::MatrixXd rhs(interior_, g.dofs.size());
            for (std::size_t j = 0; j < g.dofs.size(); ++j) {
                for (std::size_t n = 0; n < interior_; ++n) rhs(n, j) = r[n * m_ + g.dofs[j]];
            }
            const Eigen::MatrixXd sol = g.solver->solve(rhs);
            for (std::size_t j = 0; j < g.dofs.size(); ++j) {
                const std::size_t d = g.dofs[j];
                for (std::size_t n = 0; n < interior_; ++n) r[n * m_ + d] = q2_[d] * sol(n, j);
            }
        }
    }

private:
    struct Group {
        std::vector<std::size_t> dofs;
        std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> solver;
    };

    // sum_n w_n J_n^T J_n over interior columns, J = D + lambda I with the action's stencil.
    static Eigen::SparseMatrix<double> hessian(double lambda, double dt, std::size_t nodes, ActionScheme scheme) {
        const double inv = 1.0 / (2.0 * dt);
        const bool midpoint = scheme == ActionScheme::midpoint;
        std::vector<Eigen::Triplet<double>> trip;
        const std::size_t interior = nodes - 2;
        const std::size_t rows = midpoint ? nodes - 1 : nodes;
        for (std::size_t n = 0; n < rows; ++n) {
            std::vector<std::pair<std::size_t, double>> row;
            if (midpoint) {
                row = {{n, -2.0 * inv + 0.5 * lambda}, {n + 1, 2.0 * inv + 0.5 * lambda}};
            } else if (n == 0) {
                row = {{0, -3.0 * inv + lambda}, {1, 4.0 * inv}, {2, -1.0 * inv}};
            } else if (n + 1 == nodes) {
                row = {{n - 2, inv}, {n - 1, -4.0 * inv}, {n, 3.0 * inv + lambda}};
            } else {
                row = {{n - 1, -inv}, {n, lambda}, {n + 1, inv}};
            }
            const double w = (!midpoint && (n == 0 || n + 1 == nodes)) ? 0.5 * dt : dt;
            for (const auto& [a, va] : row) {
                if (a == 0 || a + 1 == nodes) continue;
                for (const auto& [b, vb] : row) {
                    if (b == 0 || b + 1 == nodes) continue;
                    trip.emplace_back(static_cast<int>(a - 1), static_cast<int>(b - 1), w * va * vb);
                }
            }
        }
        Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(interior), static_cast<Eigen::Index>(interior));
        h.setFromTriplets(trip.begin(), trip.end());
        return h;
    }

    std::size_t m_;
    std::size_t interior_;
    std::vector<double> q2_;
    std::vector<Group> groups_;
};

}  // namespace

double quasipotential_formula(const FourierField& phi) {
    const double v = v_norm(phi);
    return v * v;
}

double continuum_regularity_norm(const FourierField& phi, double beta) { return norms(phi, 1.0 + beta).fractional; }

double relative_gap(double value, double formula) {
    const double gap = std::abs(value - formula);
    return formula > 0.0 ? gap / formula : gap;
}

double tail_rule_horizon(const FourierField& phi, const IntegratorConfig& cfg, double tail_factor,
                         double max_horizon) {
    if (!(tail_factor > 0.0 && tail_factor < 1.0)) throw ValidationError("tail factor must lie in (0, 1)");
    const double target = tail_factor * v_norm(phi);
    const double dt = cfg.dt();
    Stepper stepper(cfg);
    FourierField v = phi;
    std::size_t steps = 0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(max_horizon / dt));
    while (steps < 2 || v_norm(v) > target) {
        if (steps >= max_steps) {
            throw ValidationError("reverse flow did not decay below the tail threshold within T = " +
                                  std::to_string(max_horizon));
        }
        stepper.deterministic(v, nullptr, nullptr, FlowSign::reverse, steps);
        ++steps;
    }
    return dt * static_cast<double>(steps);
}

ReverseFlowCandidate reverse_flow_candidate(const FourierField& phi, double horizon, const IntegratorConfig& cfg,
                                            double tail_factor) {
    PathGrid v = solve_deterministic(phi, {}, horizon, cfg, FlowSign::reverse);
    const double tail = v_norm(v.back());
    const bool ok = tail <= tail_factor * v_norm(phi);
    return {v.time_reversed(), tail, ok};
}

MinimizationReport minimize_action(const FourierField& phi, const NoiseOperator& noise, double horizon, double dt,
                                   const MinimizeOptions& options) {
    phi.require_same_grid(FourierField(noise.grid_ptr()));
    const std::size_t nodes = node_count(horizon, dt);
    const double t_span = dt * static_cast<double>(nodes - 1);
    const ActionOptions aopt{options.nonlinear, options.threads, options.scheme};
    const DiscreteAction action(noise, dt, nodes, aopt);
    const DofMap& map = action.dof_map();
    require_representable(map, phi);
    const std::size_t m = action.dofs();

    std::vector<double> x;
    if (options.init) {
        if (options.init->size() != nodes) throw ValidationError("initial path has the wrong number of nodes");
        x = action.pack(*options.init);
    } else {
        const IntegratorConfig cfg(noise.grid_ptr(), dt, options.nonlinear);
        x = action.pack(reverse_flow_candidate(phi, t_span, cfg, options.tail_factor).path);
    }
    std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    map.to_dofs(phi, std::span<double>(x).subspan((nodes - 1) * m, m));

    const std::size_t offset = m;
    const std::size_t interior = (nodes - 2) * m;
    std::vector<double> grad(x.size());
    const double initial_value = action.value(x);

    const Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* g) {
        std::copy(z.data(), z.data() + interior, x.begin() + static_cast<std::ptrdiff_t>(offset));
        if (g == nullptr) return action.value(x);
        const double f = action.value_and_gradient(x, grad);
        g->resize(static_cast<Eigen::Index>(interior));
        std::copy(grad.begin() + static_cast<std::ptrdiff_t>(offset),
                  grad.begin() + static_cast<std::ptrdiff_t>(offset + interior), g->data());
        return f;
    };

    Preconditioner precondition;
    std::optional<LinearPreconditioner> linear;
    if (options.precondition) {
        linear.emplace(action);
        precondition = [&linear](Eigen::VectorXd& r) { linear->apply(r); };
    }

    LbfgsOptions lopt = options.lbfgs;
    lopt.gradient_norm_scale = 1.0 / std::sqrt(dt);
    Eigen::VectorXd z0 = Eigen::Map<const Eigen::VectorXd>(x.data() + offset, static_cast<Eigen::Index>(interior));
    const LbfgsResult result = lbfgs_minimize(objective, std::move(z0), precondition, lopt);
    std::copy(result.x.data(), result.x.data() + interior, x.begin() + static_cast<std::ptrdiff_t>(offset));

    MinimizationReport rep{.phi = phi, .path = action.unpack(x, -t_span)};
    rep.horizon = t_span;
    rep.dt = dt;
    rep.delta = noise.delta();
    rep.value = action_eval(rep.path, noise, aopt).total;
    rep.objective_value = result.value;
    rep.initial_value = initial_value;
    rep.formula_value = quasipotential_formula(phi);
    rep.iterations = result.iterations;
    rep.grad_norm = result.grad_norm;
    rep.tail_v_norm = v_norm(rep.path[1]);
    rep.status = result.status;
    rep.converged = result.status == LbfgsStatus::converged && rep.tail_v_norm <= options.tail_factor * v_norm(phi);
    rep.regularity_norm = continuum_regularity_norm(phi, noise.beta());
    return rep;
}

GammaSweepResult gamma_sweep(const FourierField& phi, std::span<const double> deltas, double horizon, double dt,
                             double beta, const MinimizeOptions& options) {
    if (deltas.empty()) throw ValidationError("gamma sweep needs at least one delta");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] >= 0.0)) throw ValidationError("delta values must be >= 0");
        if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ValidationError("delta values must be strictly descending");
    }
    GammaSweepResult out;
    MinimizeOptions opt = options;
    for (const double delta : deltas) {
        const NoiseOperator noise(phi.grid_ptr(), delta, beta);
        MinimizationReport rep = minimize_action(phi, noise, horizon, dt, opt);
        opt.init = rep.path;
        const double gap = relative_gap(rep.value, rep.formula_value);
        if (!out.rows.empty()) {
            const double prev = out.rows.back().report.value;
            if (rep.value > prev + 1e-6 * (1.0 + prev)) out.monotone = false;
        }
        out.rows.push_back({delta, gap, std::move(rep)});
    }
    out.final_rel_gap = out.rows.back().rel_gap;
    return out;
}

}  // namespace nsqp
