#include "nsqp/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "nsqp/error.hpp"

namespace nsqp {

std::string_view to_string(LbfgsStatus status) {
    switch (status) {
        case LbfgsStatus::converged: return "converged";
        case LbfgsStatus::max_iterations: return "max_iterations";
        case LbfgsStatus::line_search_failed: return "line_search_failed";
        case LbfgsStatus::stalled: return "stalled";
    }
    return "unknown";
}

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const Preconditioner& precondition,
                           const LbfgsOptions& options) {
    if (options.memory < 1) throw ValidationError("L-BFGS memory must be >= 1");
    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> history;

    LbfgsResult result;
    result.x = std::move(x0);
    Eigen::VectorXd g(result.x.size());
    result.value = objective(result.x, &g);
    result.evaluations = 1;
    if (!std::isfinite(result.value)) throw ValidationError("L-BFGS started at a non-finite objective value");

    auto apply_h0 = [&](Eigen::VectorXd& r) {
        double gamma = 1.0;
        if (precondition) {
            precondition(r);
            if (!history.empty()) {
                Eigen::VectorXd my = history.back().y;
                precondition(my);
                const double den = history.back().y.dot(my);
                if (den > 0.0) gamma = history.back().s.dot(history.back().y) / den;
            }
        } else if (!history.empty()) {
            gamma = history.back().s.dot(history.back().y) / history.back().y.squaredNorm();
        }
        r *= gamma;
    };

    int stalled = 0;
    Eigen::VectorXd x_new(result.x.size()), g_new(result.x.size()), d(result.x.size());
    std::vector<double> alpha(static_cast<std::size_t>(options.memory));
    for (;;) {
        result.grad_norm = options.gradient_norm_scale * g.norm();
        if (result.grad_norm <= options.gradient_tolerance * (1.0 + std::abs(result.value))) {
            result.status = LbfgsStatus::converged;
            return result;
        }
        if (result.iterations >= options.max_iterations) {
            result.status = LbfgsStatus::max_iterations;
            return result;
        }

        // Two-loop recursion.
        d = g;
        for (std::size_t i = history.size(); i-- > 0;) {
            alpha[i] = history[i].rho * history[i].s.dot(d);
            d -= alpha[i] * history[i].y;
        }
        apply_h0(d);
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double beta = history[i].rho * history[i].y.dot(d);
            d += (alpha[i] - beta) * history[i].s;
        }
        d = -d;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            history.clear();
            d = g;
            apply_h0(d);
            d = -d;
            slope = g.dot(d);
            if (!(slope < 0.0)) {
                result.status = LbfgsStatus::line_search_failed;
                return result;
            }
        }

        // Below this predicted decrease f carries no usable signal; steps are then judged by the
        // directional derivative instead.
        const double roundoff = 1e-13 * (1.0 + std::abs(result.value));
        double step = 1.0;
        bool accepted = false;
        double f_new = 0.0;
        for (int bt = 0; bt <= options.max_backtracks; ++bt) {
            x_new = result.x + step * d;
            f_new = objective(x_new, &g_new);
            ++result.evaluations;
            if (std::isfinite(f_new) && f_new <= result.value + options.armijo * step * slope) {
                accepted = true;
                break;
            }
            if (std::isfinite(f_new) && -slope * step <= roundoff && f_new <= result.value + roundoff &&
                std::abs(g_new.dot(d)) <= 0.9 * std::abs(slope)) {
                accepted = true;
                break;
            }
            // Minimizer of the quadratic through f(0), f'(0), f(step), kept in [0.1, 0.5] * step.
            double next = 0.5 * step;
            if (std::isfinite(f_new)) {
                const double denom = 2.0 * (f_new - result.value - slope * step);
                if (denom > 0.0) next = std::clamp(-slope * step * step / denom, 0.1 * step, 0.5 * step);
            }
            step = next;
        }
        if (!accepted) {
            result.status = LbfgsStatus::line_search_failed;
            return result;
        }

        Pair pair{x_new - result.x, g_new - g, 0.0};
        const double sy = pair.s.dot(pair.y);
        if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (static_cast<int>(history.size()) > options.memory) history.pop_front();
        }

        const double decrease = result.value - f_new;
        const bool gradient_shrank = g_new.norm() < 0.99 * g.norm();
        result.x.swap(x_new);
        g.swap(g_new);
        result.value = f_new;
        ++result.iterations;
        const bool no_progress = decrease <= options.stall_tolerance * (1.0 + std::abs(f_new)) && !gradient_shrank;
        stalled = no_progress ? stalled + 1 : 0;
        if (stalled >= options.stall_iterations) {
            result.grad_norm = options.gradient_norm_scale * g.norm();
            result.status = result.grad_norm <= options.gradient_tolerance * (1.0 + std::abs(result.value))
                                ? LbfgsStatus::converged
                                : LbfgsStatus::stalled;
            return result;
        }
    }
}

}  // namespace nsqp
