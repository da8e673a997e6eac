#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nsqp/action.hpp"
#include "nsqp/error.hpp"
#include "nsqp/exit_mc.hpp"
#include "nsqp/integrator.hpp"
#include "nsqp/noise.hpp"
#include "nsqp/operators.hpp"
#include "nsqp/quasipotential.hpp"
#include "nsqp/random_fields.hpp"
#include "nsqp/rng.hpp"
#include "nsqp/trajectory_io.hpp"
#include "nsqp_tools/experiments.hpp"

namespace nsqp::tools {

namespace {

using json = nlohmann::ordered_json;

class OutputDir {
public:
    explicit OutputDir(const RunConfig& cfg) : dir_(cfg.output_dir) {
        std::filesystem::create_directories(dir_);
        write("resolved_config.yaml", resolved_config_yaml(cfg));
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written_.push_back(path);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    const std::filesystem::path& dir() const { return dir_; }
    std::vector<std::filesystem::path>& written() { return written_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

std::string fmt(double v) { return format_double(v); }

// Real values for JSON; non-finite numbers become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

FourierField random_gradient_field(const GridPtr& g, PhiloxStream& rng) {
    FourierField f(g);
    for (std::size_t i : g->half_plane_indices()) {
        const Complex a{rng.normal(), rng.normal()};
        const Complex b{rng.normal(), rng.normal()};
        f.x(i) = a;
        f.y(i) = b;
        f.x(g->partner(i)) = std::conj(a);
        f.y(g->partner(i)) = std::conj(b);
    }
    return f;
}

// B(u, v) summed mode pair by mode pair over the retained set, then projected.  Wavevector
// sums that leave the retained set are dropped, so this is the alias-free product.
FourierField direct_convolution(const FourierField& u, const FourierField& v) {
    const SpectralGrid& g = u.grid();
    const int half = g.modes() / 2;
    FourierField out(u.grid_ptr());
    const auto idx = g.retained_indices();
    for (std::size_t p : idx) {
        for (std::size_t q : idx) {
            const int kx = g.kx(p) + g.kx(q);
            const int ky = g.ky(p) + g.ky(q);
            if (std::abs(kx) >= half || std::abs(ky) >= half) continue;
            const std::size_t k = g.index_of(kx, ky);
            if (!g.retained(k)) continue;
            const Complex s = Complex(0.0, 1.0) * (u.x(p) * g.wx(q) + u.y(p) * g.wy(q));
            out.x(k) += s * v.x(q);
            out.y(k) += s * v.y(q);
        }
    }
    for (std::size_t k : idx) {
        const double kx = g.wx(k), ky = g.wy(k);
        const Complex dot = kx * out.x(k) + ky * out.y(k);
        const double k2 = kx * kx + ky * ky;
        out.x(k) -= dot * kx / k2;
        out.y(k) -= dot * ky / k2;
    }
    return out;
}

double max_coefficient_diff(const FourierField& a, const FourierField& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
        scale = std::max(scale, std::abs(b.data()[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : num; }

struct Check {
    std::string name;
    int n;
    double residual;
};

IntegratorConfig integrator_config(const RunConfig& cfg, const GridPtr& grid) {
    return IntegratorConfig(grid, cfg.dt, cfg.nonlinear);
}

double horizon_for(const RunConfig& cfg, const FourierField& phi, const GridPtr& grid) {
    if (cfg.quasipotential.horizon) return *cfg.quasipotential.horizon;
    return tail_rule_horizon(phi, integrator_config(cfg, grid), cfg.quasipotential.tail_factor,
                             cfg.quasipotential.max_horizon);
}

MinimizeOptions minimize_options(const RunConfig& cfg) {
    MinimizeOptions o;
    o.lbfgs.max_iterations = cfg.quasipotential.max_iterations;
    o.lbfgs.gradient_tolerance = cfg.quasipotential.gradient_tolerance;
    o.tail_factor = cfg.quasipotential.tail_factor;
    o.threads = cfg.threads;
    o.nonlinear = cfg.nonlinear;
    o.scheme = cfg.quasipotential.scheme;
    return o;
}

std::string report_row(const std::string& stage, const MinimizationReport& r) {
    std::ostringstream s;
    s << stage << ',' << fmt(r.delta) << ',' << fmt(r.horizon) << ',' << fmt(r.dt) << ',' << fmt(r.value) << ','
      << fmt(r.formula_value) << ',' << fmt(relative_gap(r.value, r.formula_value)) << ',' << r.iterations << ','
      << fmt(r.grad_norm) << ',' << fmt(r.tail_v_norm) << ',' << (r.converged ? 1 : 0) << '\n';
    return s.str();
}

constexpr const char* kReportHeader =
    "stage,delta,horizon,dt,value,formula_value,rel_gap,iterations,grad_norm,tail_v_norm,converged\n";

json report_json(const MinimizationReport& r) {
    return json{{"delta", r.delta},
                {"horizon", r.horizon},
                {"dt", r.dt},
                {"nodes", r.path.size()},
                {"value", number(r.value)},
                {"objective_value", number(r.objective_value)},
                {"initial_value", number(r.initial_value)},
                {"formula_value", number(r.formula_value)},
                {"rel_gap", number(relative_gap(r.value, r.formula_value))},
                {"iterations", r.iterations},
                {"grad_norm", number(r.grad_norm)},
                {"tail_v_norm", number(r.tail_v_norm)},
                {"status", std::string(to_string(r.status))},
                {"converged", r.converged},
                {"regularity_norm", number(r.regularity_norm)}};
}

}  // namespace

RunResult run_verify_operators(const RunConfig& cfg) {
    OutputDir out(cfg);
    const VerifyConfig& v = cfg.verify;
    std::vector<Check> checks;

    for (int n : v.sizes) {
        RunConfig sized = cfg;
        sized.grid.modes = n;
        const GridPtr grid = build_grid(sized);
        PhiloxStream rng(cfg.master_seed, static_cast<std::uint64_t>(n));
        double anti = 0.0, b_uvv = 0.0, enstrophy = 0.0, idem = 0.0, div = 0.0;
        for (int s = 0; s < v.samples; ++s) {
            const FourierField a = random_field(grid, rng, 1.0);
            const FourierField b = random_field(grid, rng, 1.0);
            const FourierField c = random_field(grid, rng, 1.0);
            const FourierField bab = bilinear_B(a, b);
            const FourierField bac = bilinear_B(a, c);
            anti = std::max(anti, safe_ratio(std::abs(trilinear_b(a, b, c) + trilinear_b(a, c, b)),
                                             h_norm(bab) * h_norm(c) + h_norm(bac) * h_norm(b)));
            b_uvv = std::max(b_uvv, safe_ratio(std::abs(inner_h(bab, b)), h_norm(bab) * h_norm(b)));
            const FourierField baa = bilinear_B(a, a);
            const FourierField aa = stokes_apply(a);
            enstrophy = std::max(enstrophy, safe_ratio(std::abs(inner_h(aa, baa)), h_norm(aa) * h_norm(baa)));
            const FourierField f = random_gradient_field(grid, rng);
            const FourierField pf = leray_project(f);
            idem = std::max(idem, safe_ratio(h_norm(leray_project(pf) - pf), h_norm(pf)));
            div = std::max(div, divergence_defect(pf));
        }
        checks.push_back({"b_antisymmetry", n, anti});
        checks.push_back({"b_uvv_zero", n, b_uvv});
        checks.push_back({"enstrophy_cancellation", n, enstrophy});
        checks.push_back({"leray_idempotence", n, idem});
        checks.push_back({"leray_divergence", n, div});
    }

    {
        RunConfig sized = cfg;
        sized.grid.modes = v.convolution_size;
        const GridPtr grid = build_grid(sized);
        PhiloxStream rng(cfg.master_seed, 1u << 20);
        double conv = 0.0;
        for (int s = 0; s < v.samples; ++s) {
            const FourierField a = random_field(grid, rng, 1.0);
            const FourierField b = random_field(grid, rng, 1.0);
            conv = std::max(conv, max_coefficient_diff(bilinear_B(a, b), direct_convolution(a, b)));
        }
        checks.push_back({"direct_convolution", v.convolution_size, conv});
    }

    std::ostringstream csv;
    csv << "check,N,max_residual,threshold,pass\n";
    std::size_t failed = 0;
    std::string first_failure;
    for (const Check& c : checks) {
        const bool pass = c.residual <= v.threshold;
        if (!pass && failed++ == 0) first_failure = c.name + " at N=" + std::to_string(c.n);
        csv << c.name << ',' << c.n << ',' << fmt(c.residual) << ',' << fmt(v.threshold) << ',' << (pass ? 1 : 0)
            << '\n';
    }
    out.write("verify_operators.csv", csv.str());

    RunResult r;
    r.outputs = out.written();
    if (failed == 0) {
        r.summary = "verify-operators: all " + std::to_string(checks.size()) + " checks passed";
    } else {
        r.exit_code = kVerificationFailed;
        r.summary = "verify-operators: " + std::to_string(failed) + " of " + std::to_string(checks.size()) +
                    " checks failed (first: " + first_failure + ")";
    }
    return r;
}

RunResult run_quasipotential(const RunConfig& cfg) {
    const GridPtr grid = build_grid(cfg);
    const FourierField phi = build_field(cfg, grid);
    const double horizon = horizon_for(cfg, phi, grid);
    OutputDir out(cfg);

    const NoiseOperator noise(grid, cfg.deltas.front(), cfg.beta);
    const ReverseFlowCandidate cand = reverse_flow_candidate(phi, horizon, integrator_config(cfg, grid),
                                                             cfg.quasipotential.tail_factor);
    ActionOptions aopt;
    aopt.nonlinear = cfg.nonlinear;
    aopt.threads = cfg.threads;
    const ActionBreakdown cand_action = action_eval(cand.path, noise, aopt);

    const MinimizationReport rep = minimize_action(phi, noise, horizon, cfg.dt, minimize_options(cfg));
    const ActionBreakdown min_action = action_eval(rep.path, noise, aopt);

    const double formula = quasipotential_formula(phi);
    std::ostringstream csv;
    csv << kReportHeader;
    {
        std::ostringstream s;
        s << "candidate," << fmt(noise.delta()) << ',' << fmt(horizon) << ',' << fmt(cand.path.dt()) << ','
          << fmt(cand_action.total) << ',' << fmt(formula) << ',' << fmt(relative_gap(cand_action.total, formula))
          << ",0,nan," << fmt(cand.tail_v_norm) << ',' << (cand.tail_ok ? 1 : 0) << '\n';
        csv << s.str();
    }
    csv << report_row("minimized", rep);
    out.write("quasipotential.csv", csv.str());

    std::ostringstream breakdown;
    breakdown << "stage," << action_csv_header() << '\n';
    breakdown << "candidate," << action_csv_row(cand_action) << '\n';
    breakdown << "minimized," << action_csv_row(min_action) << '\n';
    out.write("action_breakdown.csv", breakdown.str());

    if (cfg.quasipotential.write_trajectory) {
        std::ostringstream traj;
        write_trajectory_csv(traj, rep.path);
        out.write("trajectory.csv", traj.str());
    }

    json summary{{"experiment", "quasipotential"},
                 {"formula_value", number(formula)},
                 {"candidate",
                  {{"value", number(cand_action.total)},
                   {"rel_gap", number(relative_gap(cand_action.total, formula))},
                   {"tail_v_norm", number(cand.tail_v_norm)},
                   {"tail_ok", cand.tail_ok}}},
                 {"minimized", report_json(rep)}};
    out.write_json("quasipotential_summary.json", summary);

    RunResult r;
    r.outputs = out.written();
    std::ostringstream s;
    s << "quasipotential: S=" << fmt(rep.value) << " |phi|_V^2=" << fmt(formula)
      << " rel_gap=" << fmt(relative_gap(rep.value, formula)) << " status=" << to_string(rep.status);
    r.summary = s.str();
    if (!rep.converged) r.exit_code = kNotConverged;
    return r;
}

RunResult run_gamma_sweep(const RunConfig& cfg) {
    const GridPtr grid = build_grid(cfg);
    const FourierField phi = build_field(cfg, grid);
    const double horizon = horizon_for(cfg, phi, grid);
    OutputDir out(cfg);

    const GammaSweepResult sweep = gamma_sweep(phi, cfg.deltas, horizon, cfg.dt, cfg.beta, minimize_options(cfg));

    std::ostringstream wide;
    wide << kReportHeader;
    std::ostringstream lng;
    lng << "delta,quantity,value\n";
    json rows = json::array();
    bool all_converged = true;
    for (const GammaSweepRow& row : sweep.rows) {
        const MinimizationReport& r = row.report;
        all_converged = all_converged && r.converged;
        wide << report_row("minimized", r);
        const std::pair<const char*, double> quantities[] = {
            {"value", r.value},       {"formula_value", r.formula_value},
            {"rel_gap", row.rel_gap}, {"iterations", static_cast<double>(r.iterations)},
            {"grad_norm", r.grad_norm}, {"tail_v_norm", r.tail_v_norm},
            {"converged", r.converged ? 1.0 : 0.0}};
        for (const auto& [name, value] : quantities) lng << fmt(row.delta) << ',' << name << ',' << fmt(value) << '\n';
        rows.push_back(report_json(r));
    }
    out.write("gamma_sweep.csv", wide.str());
    out.write("gamma_sweep_long.csv", lng.str());
    out.write_json("gamma_sweep_summary.json", json{{"experiment", "gamma-sweep"},
                                                    {"horizon", horizon},
                                                    {"monotone", sweep.monotone},
                                                    {"final_rel_gap", number(sweep.final_rel_gap)},
                                                    {"all_converged", all_converged},
                                                    {"rows", rows}});

    RunResult r;
    r.outputs = out.written();
    std::ostringstream s;
    s << "gamma-sweep: " << sweep.rows.size() << " deltas, final rel_gap=" << fmt(sweep.final_rel_gap)
      << (sweep.monotone ? ", monotone" : ", NOT monotone");
    r.summary = s.str();
    if (!all_converged) {
        r.exit_code = kNotConverged;
    } else if (!sweep.monotone) {
        r.exit_code = kVerificationFailed;
    }
    return r;
}

RunResult run_exit_scan(const RunConfig& cfg) {
    const GridPtr grid = build_grid(cfg);
    const bool has_phi = !cfg.phi.modes.empty() || cfg.phi.random || cfg.phi.file;
    const ExitConfig ec{.phi = has_phi ? build_field(cfg, grid) : FourierField(grid),
                        .radius = cfg.exit.radius,
                        .eps_list = cfg.exit.eps,
                        .delta = cfg.deltas.front(),
                        .beta = cfg.beta,
                        .dt = cfg.dt,
                        .t_max = cfg.exit.t_max,
                        .n_samples = cfg.exit.samples,
                        .master_seed = cfg.master_seed,
                        .nonlinear = cfg.nonlinear,
                        .threads = cfg.threads};
    validate_exit_config(ec);
    OutputDir out(cfg);

    std::vector<ExitStats> rows = exit_time_expectation(ec);
    std::ostringstream csv;
    csv << exit_csv_header() << '\n';
    for (const ExitStats& s : rows) csv << exit_csv_row(s) << '\n';
    out.write("exit_scan.csv", csv.str());

    ExitScanOptions so;
    so.delta_corrected_target = cfg.exit.delta_corrected_target;
    so.target_dt = cfg.exit.target_dt;
    so.slope_resamples = cfg.exit.slope_resamples;

    RunResult r;
    std::size_t censored_rows = 0;
    for (const ExitStats& s : rows) censored_rows += s.n_censored > 0 ? 1 : 0;
    try {
        const ExitRegression reg = fit_exit_rows(rows, ec, so);
        json used = json::array();
        for (std::size_t i : reg.used_rows) used.push_back(i);
        json j{{"experiment", "exit-scan"},
               {"slope", number(reg.slope)},
               {"intercept", number(reg.intercept)},
               {"slope_ci", {number(reg.slope_ci[0]), number(reg.slope_ci[1])}},
               {"target_lambda", number(reg.target_lambda)},
               {"target_delta", number(reg.target_delta)},
               {"target", number(reg.target)},
               {"rel_dev", number(reg.rel_dev)},
               {"used_rows", used},
               {"rows_with_censoring", censored_rows}};
        if (censored_rows > 0) {
            j["caveat"] = "some rows contain censored trajectories; their mean exit times are biased low";
        }
        out.write_json("exit_regression.json", j);
        std::ostringstream s;
        s << "exit-scan: slope=" << fmt(reg.slope) << " CI=[" << fmt(reg.slope_ci[0]) << ", " << fmt(reg.slope_ci[1])
          << "] target=" << fmt(reg.target) << " rel_dev=" << fmt(reg.rel_dev);
        r.summary = s.str();
    } catch (const ValidationError& e) {
        out.write_json("exit_regression.json", json{{"experiment", "exit-scan"}, {"error", e.what()}});
        r.summary = std::string("exit-scan: no regression: ") + e.what();
        r.exit_code = kNotConverged;
    }
    r.outputs = out.written();
    return r;
}

RunResult run_experiment(const RunConfig& cfg) {
    try {
        switch (cfg.experiment) {
            case Experiment::verify_operators: return run_verify_operators(cfg);
            case Experiment::quasipotential: return run_quasipotential(cfg);
            case Experiment::gamma_sweep: return run_gamma_sweep(cfg);
            case Experiment::exit_scan: return run_exit_scan(cfg);
        }
        return {kInternalError, "unknown experiment", {}};
    } catch (const ConfigError& e) {
        return {kValidationError, std::string("configuration error: ") + e.what(), {}};
    } catch (const ValidationError& e) {
        return {kValidationError, std::string("validation error: ") + e.what(), {}};
    } catch (const BlowUpError& e) {
        return {kBlowUp, std::string("blow-up: ") + e.what(), {}};
    } catch (const std::exception& e) {
        return {kInternalError, std::string("internal error: ") + e.what(), {}};
    }
}

}  // namespace nsqp::tools
