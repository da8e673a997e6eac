#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "nsqp/error.hpp"
#include "nsqp/field_io.hpp"
#include "nsqp/random_fields.hpp"
#include "nsqp/trajectory_io.hpp"
#include "nsqp_tools/experiments.hpp"

namespace nsqp::tools {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& message) {
    std::string where = path;
    if (node.IsDefined() && node.Mark().line >= 0) where += " (line " + std::to_string(node.Mark().line + 1) + ")";
    throw ConfigError(where + ": " + message);
}

void require_map(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) fail(kv.first, path.empty() ? key : path + "." + key, "unknown key");
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path, const char* type) {
    if (!node.IsScalar()) fail(node, path, std::string("expected ") + type);
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail(node, path, std::string("expected ") + type + ", got '" + node.Scalar() + "'");
    }
}

double real(const YAML::Node& node, const std::string& path) {
    const double v = scalar<double>(node, path, "a number");
    if (!std::isfinite(v)) fail(node, path, "must be finite");
    return v;
}

double positive(const YAML::Node& node, const std::string& path) {
    const double v = real(node, path);
    if (!(v > 0.0)) fail(node, path, "must be positive");
    return v;
}

double nonnegative(const YAML::Node& node, const std::string& path) {
    const double v = real(node, path);
    if (!(v >= 0.0)) fail(node, path, "must be >= 0");
    return v;
}

long long integer(const YAML::Node& node, const std::string& path) {
    return scalar<long long>(node, path, "an integer");
}

// A number, or a multiple of pi written as "2pi", "pi" or "0.5pi".
double length_value(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) fail(node, path, "expected a number");
    const std::string s = node.Scalar();
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        const std::string head = s.substr(0, s.size() - 2);
        double factor = 1.0;
        if (!head.empty()) {
            std::size_t used = 0;
            try {
                factor = std::stod(head, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != head.size()) fail(node, path, "expected a number or '<number>pi', got '" + s + "'");
        }
        const double v = factor * 3.141592653589793238462643383279502884;
        if (!(v > 0.0)) fail(node, path, "must be positive");
        return v;
    }
    return positive(node, path);
}

std::vector<double> real_list(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) return {real(node, path)};
    if (!node.IsSequence()) fail(node, path, "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::array<int, 2> wavevector(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 2) fail(node, path, "expected [kx, ky]");
    return {static_cast<int>(integer(node[0], path + "[0]")), static_cast<int>(integer(node[1], path + "[1]"))};
}

bool boolean(const YAML::Node& node, const std::string& path) { return scalar<bool>(node, path, "true or false"); }

void parse_grid(const YAML::Node& n, GridConfig& g) {
    require_map(n, "grid", {"length", "modes", "dealias", "truncation", "parity", "backend"});
    if (n["length"]) g.length = length_value(n["length"], "grid.length");
    if (n["modes"]) {
        const auto m = integer(n["modes"], "grid.modes");
        if (m < 4 || m % 2 != 0 || m > 4096) fail(n["modes"], "grid.modes", "must be an even integer in [4, 4096]");
        g.modes = static_cast<int>(m);
    }
    if (n["dealias"]) g.dealias = boolean(n["dealias"], "grid.dealias");
    if (n["truncation"]) {
        const auto t = n["truncation"];
        if (!t.IsSequence()) fail(t, "grid.truncation", "expected a list of [kx, ky] pairs");
        for (std::size_t i = 0; i < t.size(); ++i) {
            g.truncation.push_back(wavevector(t[i], "grid.truncation[" + std::to_string(i) + "]"));
        }
    }
    if (n["parity"]) {
        const auto s = scalar<std::string>(n["parity"], "grid.parity", "a string");
        if (s == "none") {
            g.parity = Parity::none;
        } else if (s == "odd") {
            g.parity = Parity::odd;
        } else {
            fail(n["parity"], "grid.parity", "expected 'none' or 'odd'");
        }
    }
    if (n["backend"]) {
        const auto s = scalar<std::string>(n["backend"], "grid.backend", "a string");
        if (s == "pseudo_spectral") {
            g.backend = NonlinearBackend::pseudo_spectral;
        } else if (s == "triad") {
            g.backend = NonlinearBackend::triad;
        } else {
            fail(n["backend"], "grid.backend", "expected 'pseudo_spectral' or 'triad'");
        }
    }
}

void parse_field(const YAML::Node& n, FieldConfig& f) {
    require_map(n, "phi", {"modes", "random", "file"});
    int sources = 0;
    if (n["modes"]) {
        ++sources;
        const auto m = n["modes"];
        if (!m.IsSequence() || m.size() == 0) fail(m, "phi.modes", "expected a non-empty list");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string p = "phi.modes[" + std::to_string(i) + "]";
            require_map(m[i], p, {"k", "amplitude", "phase"});
            ModeTerm t;
            if (!m[i]["k"]) fail(m[i], p + ".k", "missing");
            t.k = wavevector(m[i]["k"], p + ".k");
            if (m[i]["amplitude"]) t.amplitude = real(m[i]["amplitude"], p + ".amplitude");
            if (m[i]["phase"]) t.phase = real(m[i]["phase"], p + ".phase");
            f.modes.push_back(t);
        }
    }
    if (n["random"]) {
        ++sources;
        const auto r = n["random"];
        require_map(r, "phi.random", {"seed", "h_norm", "max_k2", "decay"});
        FieldConfig::Random rc;
        if (r["seed"]) rc.seed = scalar<std::uint64_t>(r["seed"], "phi.random.seed", "an unsigned integer");
        if (r["h_norm"]) rc.h_norm = nonnegative(r["h_norm"], "phi.random.h_norm");
        if (r["max_k2"]) rc.max_k2 = static_cast<int>(integer(r["max_k2"], "phi.random.max_k2"));
        if (r["decay"]) rc.decay = real(r["decay"], "phi.random.decay");
        f.random = rc;
    }
    if (n["file"]) {
        ++sources;
        f.file = scalar<std::string>(n["file"], "phi.file", "a path");
    }
    if (sources != 1) fail(n, "phi", "exactly one of 'modes', 'random' or 'file' is required");
}

void parse_quasipotential(const YAML::Node& n, QuasipotentialConfig& q) {
    require_map(n, "quasipotential", {"tail_factor", "horizon", "max_horizon", "max_iterations",
                                      "gradient_tolerance", "scheme", "write_trajectory"});
    if (n["tail_factor"]) {
        q.tail_factor = positive(n["tail_factor"], "quasipotential.tail_factor");
        if (q.tail_factor >= 1.0) fail(n["tail_factor"], "quasipotential.tail_factor", "must be < 1");
    }
    if (n["horizon"]) q.horizon = positive(n["horizon"], "quasipotential.horizon");
    if (n["max_horizon"]) q.max_horizon = positive(n["max_horizon"], "quasipotential.max_horizon");
    if (n["max_iterations"]) {
        const auto v = integer(n["max_iterations"], "quasipotential.max_iterations");
        if (v < 0 || v > 10'000'000) fail(n["max_iterations"], "quasipotential.max_iterations", "out of range");
        q.max_iterations = static_cast<int>(v);
    }
    if (n["gradient_tolerance"]) q.gradient_tolerance = positive(n["gradient_tolerance"], "quasipotential.gradient_tolerance");
    if (n["scheme"]) {
        const auto s = scalar<std::string>(n["scheme"], "quasipotential.scheme", "a string");
        if (s == "midpoint") {
            q.scheme = ActionScheme::midpoint;
        } else if (s == "collocation") {
            q.scheme = ActionScheme::collocation;
        } else {
            fail(n["scheme"], "quasipotential.scheme", "expected 'midpoint' or 'collocation'");
        }
    }
    if (n["write_trajectory"]) q.write_trajectory = boolean(n["write_trajectory"], "quasipotential.write_trajectory");
}

void parse_verify(const YAML::Node& n, VerifyConfig& v) {
    require_map(n, "verify", {"sizes", "samples", "threshold", "convolution_size"});
    if (n["sizes"]) {
        v.sizes.clear();
        const auto s = n["sizes"];
        if (!s.IsSequence() || s.size() == 0) fail(s, "verify.sizes", "expected a non-empty list of grid sizes");
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto m = integer(s[i], "verify.sizes[" + std::to_string(i) + "]");
            if (m < 4 || m % 2 != 0 || m > 1024) fail(s[i], "verify.sizes", "sizes must be even integers in [4, 1024]");
            v.sizes.push_back(static_cast<int>(m));
        }
    }
    if (n["samples"]) {
        const auto s = integer(n["samples"], "verify.samples");
        if (s < 1 || s > 1'000'000) fail(n["samples"], "verify.samples", "must be in [1, 1000000]");
        v.samples = static_cast<int>(s);
    }
    if (n["threshold"]) v.threshold = positive(n["threshold"], "verify.threshold");
    if (n["convolution_size"]) {
        const auto m = integer(n["convolution_size"], "verify.convolution_size");
        if (m < 4 || m % 2 != 0 || m > 32) fail(n["convolution_size"], "verify.convolution_size", "must be even in [4, 32]");
        v.convolution_size = static_cast<int>(m);
    }
}

void parse_exit(const YAML::Node& n, ExitScanConfig& e) {
    require_map(n, "exit", {"radius", "eps", "t_max", "samples", "delta_corrected_target", "target_dt",
                            "slope_resamples"});
    if (n["radius"]) e.radius = positive(n["radius"], "exit.radius");
    if (n["eps"]) e.eps = real_list(n["eps"], "exit.eps");
    if (n["t_max"]) e.t_max = positive(n["t_max"], "exit.t_max");
    if (n["samples"]) {
        const auto s = integer(n["samples"], "exit.samples");
        if (s < 2 || s > 100'000'000) fail(n["samples"], "exit.samples", "must be in [2, 1e8]");
        e.samples = static_cast<std::size_t>(s);
    }
    if (n["delta_corrected_target"]) e.delta_corrected_target = boolean(n["delta_corrected_target"], "exit.delta_corrected_target");
    if (n["target_dt"]) e.target_dt = positive(n["target_dt"], "exit.target_dt");
    if (n["slope_resamples"]) {
        const auto s = integer(n["slope_resamples"], "exit.slope_resamples");
        if (s < 0 || s > 1'000'000) fail(n["slope_resamples"], "exit.slope_resamples", "out of range");
        e.slope_resamples = static_cast<int>(s);
    }
}

Experiment parse_experiment(const YAML::Node& n) {
    const auto s = scalar<std::string>(n, "experiment", "a string");
    if (s == "verify-operators") return Experiment::verify_operators;
    if (s == "quasipotential") return Experiment::quasipotential;
    if (s == "gamma-sweep") return Experiment::gamma_sweep;
    if (s == "exit-scan") return Experiment::exit_scan;
    fail(n, "experiment", "expected verify-operators, quasipotential, gamma-sweep or exit-scan");
}

void check_descending(const std::vector<double>& v, const YAML::Node& node, const std::string& path) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0)) fail(node, path, "values must be >= 0");
        if (i > 0 && !(v[i] < v[i - 1])) fail(node, path, "values must be strictly descending");
    }
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::verify_operators: return "verify-operators";
        case Experiment::quasipotential: return "quasipotential";
        case Experiment::gamma_sweep: return "gamma-sweep";
        case Experiment::exit_scan: return "exit-scan";
    }
    return "unknown";
}

RunConfig parse_config(const std::string& text, const std::string& source_name, std::optional<Experiment> experiment) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source_name + " (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
    }
    if (!root.IsDefined() || root.IsNull()) throw ConfigError(source_name + ": empty configuration");
    RunConfig cfg;
    require_map(root, "", {"experiment", "master_seed", "threads", "output_dir", "grid", "integrator", "noise", "phi",
                           "quasipotential", "verify", "exit"});
    if (root["experiment"]) {
        cfg.experiment = parse_experiment(root["experiment"]);
        if (experiment && *experiment != cfg.experiment) {
            fail(root["experiment"], "experiment",
                 "file says '" + to_string(cfg.experiment) + "' but '" + to_string(*experiment) + "' was requested");
        }
    } else if (experiment) {
        cfg.experiment = *experiment;
    } else {
        throw ConfigError(source_name + ": experiment: missing");
    }
    if (root["master_seed"]) cfg.master_seed = scalar<std::uint64_t>(root["master_seed"], "master_seed", "an unsigned integer");
    if (root["threads"]) {
        const auto t = integer(root["threads"], "threads");
        if (t < 1 || t > 1024) fail(root["threads"], "threads", "must be in [1, 1024]");
        cfg.threads = static_cast<unsigned>(t);
    }
    if (root["output_dir"]) cfg.output_dir = scalar<std::string>(root["output_dir"], "output_dir", "a path");
    if (root["grid"]) parse_grid(root["grid"], cfg.grid);
    if (const auto n = root["integrator"]) {
        require_map(n, "integrator", {"dt", "nonlinear"});
        if (n["dt"]) cfg.dt = positive(n["dt"], "integrator.dt");
        if (n["nonlinear"]) cfg.nonlinear = boolean(n["nonlinear"], "integrator.nonlinear");
    }
    if (const auto n = root["noise"]) {
        require_map(n, "noise", {"delta", "deltas", "beta"});
        if (n["delta"] && n["deltas"]) fail(n, "noise", "give either 'delta' or 'deltas', not both");
        if (n["delta"]) cfg.deltas = {nonnegative(n["delta"], "noise.delta")};
        if (n["deltas"]) {
            cfg.deltas = real_list(n["deltas"], "noise.deltas");
            if (cfg.deltas.empty()) fail(n["deltas"], "noise.deltas", "must not be empty");
            check_descending(cfg.deltas, n["deltas"], "noise.deltas");
        }
        if (n["beta"]) cfg.beta = positive(n["beta"], "noise.beta");
        if (cfg.deltas.size() > 1 && cfg.experiment != Experiment::gamma_sweep) {
            fail(n, "noise.deltas", "a list of deltas is only meaningful for gamma-sweep");
        }
    }
    if (root["phi"]) parse_field(root["phi"], cfg.phi);
    if (root["quasipotential"]) parse_quasipotential(root["quasipotential"], cfg.quasipotential);
    if (root["verify"]) parse_verify(root["verify"], cfg.verify);
    if (root["exit"]) {
        parse_exit(root["exit"], cfg.exit);
        if (!cfg.exit.eps.empty()) check_descending(cfg.exit.eps, root["exit"]["eps"], "exit.eps");
    }

    const bool has_phi = !cfg.phi.modes.empty() || cfg.phi.random || cfg.phi.file;
    if ((cfg.experiment == Experiment::quasipotential || cfg.experiment == Experiment::gamma_sweep) && !has_phi) {
        throw ConfigError(source_name + ": phi is required for " + to_string(cfg.experiment));
    }
    if (cfg.experiment == Experiment::exit_scan && cfg.exit.eps.empty()) {
        throw ConfigError(source_name + ": exit.eps is required for exit-scan");
    }
    if (cfg.phi.random && !cfg.phi.random->seed) cfg.phi.random->seed = cfg.master_seed;
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<Experiment> experiment) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string(), experiment);
}

std::string resolved_config_yaml(const RunConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "experiment" << YAML::Value << to_string(cfg.experiment);
    out << YAML::Key << "master_seed" << YAML::Value << cfg.master_seed;
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "length" << YAML::Value << cfg.grid.length;
    out << YAML::Key << "modes" << YAML::Value << cfg.grid.modes;
    out << YAML::Key << "dealias" << YAML::Value << cfg.grid.dealias;
    if (!cfg.grid.truncation.empty()) {
        out << YAML::Key << "truncation" << YAML::Value << YAML::BeginSeq;
        for (const auto& k : cfg.grid.truncation) out << YAML::Flow << YAML::BeginSeq << k[0] << k[1] << YAML::EndSeq;
        out << YAML::EndSeq;
    }
    out << YAML::Key << "parity" << YAML::Value << (cfg.grid.parity == Parity::odd ? "odd" : "none");
    out << YAML::Key << "backend" << YAML::Value
        << (cfg.grid.backend == NonlinearBackend::triad ? "triad" : "pseudo_spectral");
    out << YAML::EndMap;
    out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << cfg.dt;
    out << YAML::Key << "nonlinear" << YAML::Value << cfg.nonlinear;
    out << YAML::EndMap;
    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    if (cfg.experiment == Experiment::gamma_sweep) {
        out << YAML::Key << "deltas" << YAML::Value << YAML::Flow << cfg.deltas;
    } else {
        out << YAML::Key << "delta" << YAML::Value << cfg.deltas.front();
    }
    out << YAML::Key << "beta" << YAML::Value << cfg.beta;
    out << YAML::EndMap;
    if (!cfg.phi.modes.empty() || cfg.phi.random || cfg.phi.file) {
        out << YAML::Key << "phi" << YAML::Value << YAML::BeginMap;
        if (!cfg.phi.modes.empty()) {
            out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
            for (const auto& m : cfg.phi.modes) {
                out << YAML::BeginMap;
                out << YAML::Key << "k" << YAML::Value << YAML::Flow << YAML::BeginSeq << m.k[0] << m.k[1] << YAML::EndSeq;
                out << YAML::Key << "amplitude" << YAML::Value << m.amplitude;
                out << YAML::Key << "phase" << YAML::Value << m.phase;
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
        }
        if (cfg.phi.random) {
            out << YAML::Key << "random" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "seed" << YAML::Value << *cfg.phi.random->seed;
            out << YAML::Key << "h_norm" << YAML::Value << cfg.phi.random->h_norm;
            out << YAML::Key << "max_k2" << YAML::Value << cfg.phi.random->max_k2;
            out << YAML::Key << "decay" << YAML::Value << cfg.phi.random->decay;
            out << YAML::EndMap;
        }
        if (cfg.phi.file) out << YAML::Key << "file" << YAML::Value << cfg.phi.file->string();
        out << YAML::EndMap;
    }
    switch (cfg.experiment) {
        case Experiment::verify_operators:
            out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "sizes" << YAML::Value << YAML::Flow << cfg.verify.sizes;
            out << YAML::Key << "samples" << YAML::Value << cfg.verify.samples;
            out << YAML::Key << "threshold" << YAML::Value << cfg.verify.threshold;
            out << YAML::Key << "convolution_size" << YAML::Value << cfg.verify.convolution_size;
            out << YAML::EndMap;
            break;
        case Experiment::quasipotential:
        case Experiment::gamma_sweep: {
            const auto& q = cfg.quasipotential;
            out << YAML::Key << "quasipotential" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "tail_factor" << YAML::Value << q.tail_factor;
            if (q.horizon) out << YAML::Key << "horizon" << YAML::Value << *q.horizon;
            out << YAML::Key << "max_horizon" << YAML::Value << q.max_horizon;
            out << YAML::Key << "max_iterations" << YAML::Value << q.max_iterations;
            out << YAML::Key << "gradient_tolerance" << YAML::Value << q.gradient_tolerance;
            out << YAML::Key << "scheme" << YAML::Value << (q.scheme == ActionScheme::midpoint ? "midpoint" : "collocation");
            out << YAML::Key << "write_trajectory" << YAML::Value << q.write_trajectory;
            out << YAML::EndMap;
            break;
        }
        case Experiment::exit_scan: {
            const auto& e = cfg.exit;
            out << YAML::Key << "exit" << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "radius" << YAML::Value << e.radius;
            out << YAML::Key << "eps" << YAML::Value << YAML::Flow << e.eps;
            out << YAML::Key << "t_max" << YAML::Value << e.t_max;
            out << YAML::Key << "samples" << YAML::Value << e.samples;
            out << YAML::Key << "delta_corrected_target" << YAML::Value << e.delta_corrected_target;
            out << YAML::Key << "target_dt" << YAML::Value << e.target_dt;
            out << YAML::Key << "slope_resamples" << YAML::Value << e.slope_resamples;
            out << YAML::EndMap;
            break;
        }
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

GridPtr build_grid(const RunConfig& cfg) {
    GridOptions o;
    o.dealias = cfg.grid.dealias;
    o.modes = cfg.grid.truncation;
    o.parity = cfg.grid.parity;
    o.backend = cfg.grid.backend;
    return make_grid(cfg.grid.length, cfg.grid.modes, o);
}

FourierField build_field(const RunConfig& cfg, const GridPtr& grid) {
    const FieldConfig& f = cfg.phi;
    if (f.file) return load_field(*f.file, grid);
    if (f.random) {
        PhiloxStream rng(f.random->seed.value_or(cfg.master_seed), 0);
        return random_field(grid, rng, f.random->h_norm, f.random->max_k2, f.random->decay);
    }
    FourierField phi(grid);
    for (const ModeTerm& m : f.modes) {
        const std::size_t i = grid->index_of(m.k[0], m.k[1]);
        if (!grid->retained(i)) {
            throw ValidationError("phi mode (" + std::to_string(m.k[0]) + ", " + std::to_string(m.k[1]) +
                                  ") is not retained by the grid");
        }
        phi += mode_field(grid, m.k[0], m.k[1], m.amplitude, m.phase);
    }
    return phi;
}

unsigned resolve_threads(unsigned config_value, const char* env_value, std::optional<unsigned> cli_value) {
    if (cli_value) {
        if (*cli_value < 1) throw ConfigError("--threads must be >= 1");
        return *cli_value;
    }
    if (env_value != nullptr && *env_value != '\0') {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(env_value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != std::string(env_value).size() || v < 1 || v > 1024) {
            throw ConfigError(std::string("NSQP_THREADS must be an integer in [1, 1024], got '") + env_value + "'");
        }
        return static_cast<unsigned>(v);
    }
    return config_value;
}

}  // namespace nsqp::tools
