#include "nsqp/exit_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsqp/error.hpp"
#include "nsqp/operators.hpp"
#include "nsqp/parallel.hpp"
#include "nsqp/quasipotential.hpp"
#include "nsqp/random_fields.hpp"
#include "nsqp/statistics.hpp"
#include "nsqp/trajectory_io.hpp"

namespace nsqp {

namespace {

// Stream ids above 2^62 are reserved for bootstrap draws; trajectory ids stay below.
constexpr std::uint64_t kRowBootstrapStream = std::uint64_t{1} << 63;
constexpr std::uint64_t kSlopeBootstrapStream = std::uint64_t{3} << 62;

double h2_retained(const FourierField& u) {
    double s = 0.0;
    for (std::size_t i : u.grid().retained_indices()) s += std::norm(u.x(i)) + std::norm(u.y(i));
    return s;
}

}  // namespace

void validate_exit_config(const ExitConfig& cfg) {
    if (!(cfg.radius > 0.0)) throw ValidationError("exit radius must be positive");
    if (!(h_norm(cfg.phi) < cfg.radius)) throw ValidationError("start field must satisfy |phi|_H < radius");
    if (cfg.eps_list.empty()) throw ValidationError("eps_list must not be empty");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] >= 0.0)) throw ValidationError("noise intensities must be >= 0");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
            throw ValidationError("eps_list must be strictly descending");
        }
    }
    if (!(cfg.t_max > 0.0)) throw ValidationError("t_max must be positive");
    if (cfg.n_samples < 2) throw ValidationError("n_samples must be >= 2");
    if (!(cfg.delta >= 0.0)) throw ValidationError("delta must be >= 0");
    if (!(cfg.beta > 0.0)) throw ValidationError("beta must be positive");
    if (cfg.eps_list.size() * cfg.n_samples >= (std::uint64_t{1} << 62)) {
        throw ValidationError("too many trajectories for the stream layout");
    }
}

ExitSimulator::ExitSimulator(const ExitConfig& cfg)
    : cfg_(cfg),
      integrator_(cfg.phi.grid_ptr(), cfg.dt, cfg.nonlinear),
      noise_(cfg.phi.grid_ptr(), cfg.delta, cfg.beta),
      stepper_(integrator_) {}

ExitSample ExitSimulator::run(double eps, std::uint64_t trajectory_index) {
    const double r2 = cfg_.radius * cfg_.radius;
    const double dt = cfg_.dt;
    const double guard2 = std::pow(kBlowUpFactor * std::max(cfg_.radius, 1.0), 2);
    PhiloxStream rng(cfg_.master_seed, trajectory_index);
    FourierField u = cfg_.phi;
    double h2_prev = h2_retained(u);
    for (std::size_t n = 0;; ++n) {
        const double t_next = dt * static_cast<double>(n + 1);
        if (t_next > cfg_.t_max) return {ExitOutcome::censored, cfg_.t_max};
        try {
            stepper_.stochastic(u, eps, noise_, rng, n);
        } catch (const BlowUpError&) {
            return {ExitOutcome::blowup, t_next};
        }
        const double h2 = h2_retained(u);
        if (!std::isfinite(h2) || h2 > guard2) return {ExitOutcome::blowup, t_next};
        if (h2 >= r2) {
            const double frac = std::clamp((r2 - h2_prev) / (h2 - h2_prev), 0.0, 1.0);
            return {ExitOutcome::exited, dt * (static_cast<double>(n) + frac)};
        }
        h2_prev = h2;
    }
}

ExitSample exit_time_single(const ExitConfig& cfg, double eps, std::uint64_t trajectory_index) {
    validate_exit_config(cfg);
    ExitSimulator sim(cfg);
    return sim.run(eps, trajectory_index);
}

std::vector<ExitStats> exit_time_expectation(const ExitConfig& cfg) {
    validate_exit_config(cfg);
    const std::size_t n = cfg.n_samples;
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n)));
    std::vector<ExitStats> out;
    for (std::size_t row = 0; row < cfg.eps_list.size(); ++row) {
        const double eps = cfg.eps_list[row];
        std::vector<ExitSample> samples(n);
        parallel_for(workers, workers, [&](std::size_t w) {
            ExitSimulator sim(cfg);
            for (std::size_t i = n * w / workers; i < n * (w + 1) / workers; ++i) {
                samples[i] = sim.run(eps, row * n + i);
            }
        });

        ExitStats s;
        s.eps = eps;
        for (const ExitSample& e : samples) {
            switch (e.outcome) {
                case ExitOutcome::exited:
                    ++s.n_exited;
                    s.taus.push_back(e.tau);
                    break;
                case ExitOutcome::censored: ++s.n_censored; break;
                case ExitOutcome::blowup: ++s.n_blowup; break;
            }
        }
        if (s.taus.empty()) {
            s.flagged = true;
            s.mean_tau = s.ci_lo = s.ci_hi = s.eps_log_mean = std::numeric_limits<double>::quiet_NaN();
        } else {
            s.mean_tau = pairwise_mean(s.taus);
            const auto ci = bootstrap_mean_ci(s.taus, cfg.master_seed, kRowBootstrapStream | row);
            s.ci_lo = ci[0];
            s.ci_hi = ci[1];
            s.eps_log_mean = eps * std::log(s.mean_tau);
        }
        out.push_back(std::move(s));
    }
    return out;
}

ExitRegression fit_exit_rows(std::vector<ExitStats> rows, const ExitConfig& cfg, const ExitScanOptions& options) {
    ExitRegression reg;
    reg.rows = std::move(rows);
    std::vector<double> x, y;
    for (std::size_t r = 0; r < reg.rows.size(); ++r) {
        const ExitStats& s = reg.rows[r];
        if (s.taus.size() >= 2 && s.eps > 0.0) {
            reg.used_rows.push_back(r);
            x.push_back(1.0 / s.eps);
            y.push_back(std::log(s.mean_tau));
        }
    }
    if (reg.used_rows.size() < 3) {
        throw ValidationError("exit regression needs at least three eps rows with exits, got " +
                              std::to_string(reg.used_rows.size()));
    }
    const LineFit fit = ols_fit(x, y);
    reg.slope = fit.slope;
    reg.intercept = fit.intercept;

    if (options.slope_resamples >= 2) {
        PhiloxStream rng(cfg.master_seed, kSlopeBootstrapStream);
        std::vector<double> slopes(static_cast<std::size_t>(options.slope_resamples));
        std::vector<double> yb(x.size()), draw;
        for (double& sl : slopes) {
            for (std::size_t j = 0; j < reg.used_rows.size(); ++j) {
                const auto& taus = reg.rows[reg.used_rows[j]].taus;
                draw.resize(taus.size());
                for (double& d : draw) d = taus[rng.index(taus.size())];
                yb[j] = std::log(pairwise_mean(draw));
            }
            sl = ols_fit(x, yb).slope;
        }
        reg.slope_ci = {quantile(slopes, 0.025), quantile(slopes, 0.975)};
    } else {
        reg.slope_ci = {reg.slope, reg.slope};
    }

    const GridPtr& grid = cfg.phi.grid_ptr();
    reg.target_lambda = grid->lambda_min_retained() * cfg.radius * cfg.radius;
    reg.target = reg.target_lambda;
    reg.target_delta = std::numeric_limits<double>::quiet_NaN();
    if (options.delta_corrected_target) {
        std::size_t best = grid->half_plane_indices().front();
        for (std::size_t i : grid->half_plane_indices()) {
            if (grid->lambda(i) < grid->lambda(best)) best = i;
        }
        const FourierField phi_b = mode_field(grid, grid->kx(best), grid->ky(best), cfg.radius);
        const IntegratorConfig icfg(grid, options.target_dt, cfg.nonlinear);
        const double horizon = tail_rule_horizon(phi_b, icfg);
        MinimizeOptions mopt;
        mopt.nonlinear = cfg.nonlinear;
        mopt.threads = cfg.threads;
        const auto rep = minimize_action(phi_b, NoiseOperator(grid, cfg.delta, cfg.beta), horizon, options.target_dt, mopt);
        reg.target_delta = rep.value;
        reg.target = rep.value;
    }
    reg.rel_dev = std::abs(reg.slope - reg.target) / reg.target;
    return reg;
}

ExitRegression exit_rate_scan(const ExitConfig& cfg, const ExitScanOptions& options) {
    return fit_exit_rows(exit_time_expectation(cfg), cfg, options);
}

std::string exit_csv_header() { return "eps,n_exited,n_censored,n_blowup,mean_tau,ci_lo,ci_hi,eps_log_mean"; }

std::string exit_csv_row(const ExitStats& s) {
    return format_double(s.eps) + ',' + std::to_string(s.n_exited) + ',' + std::to_string(s.n_censored) + ',' +
           std::to_string(s.n_blowup) + ',' + format_double(s.mean_tau) + ',' + format_double(s.ci_lo) + ',' +
           format_double(s.ci_hi) + ',' + format_double(s.eps_log_mean);
}

}  // namespace nsqp
