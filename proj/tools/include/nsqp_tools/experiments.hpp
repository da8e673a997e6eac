#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsqp/action.hpp"
#include "nsqp/fourier_field.hpp"
#include "nsqp/spectral_grid.hpp"

namespace nsqp::tools {

/// Process exit codes of the nsqp tool.
enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kValidationError = 2,
    kBlowUp = 3,
    kNotConverged = 4,
    kVerificationFailed = 5,
};

/// Malformed or invalid configuration; `what()` carries the key path and line when known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { verify_operators, quasipotential, gamma_sweep, exit_scan };

std::string to_string(Experiment e);

struct GridConfig {
    double length = 6.283185307179586;
    int modes = 16;
    bool dealias = true;
    std::vector<std::array<int, 2>> truncation;
    Parity parity = Parity::none;
    NonlinearBackend backend = NonlinearBackend::pseudo_spectral;
};

struct ModeTerm {
    std::array<int, 2> k{1, 0};
    double amplitude = 1.0;
    double phase = 1.5707963267948966;
};

/// Target / start field: a sum of single-mode fields, a seeded random band-limited field, or a
/// field file.  Exactly one source is set.
struct FieldConfig {
    std::vector<ModeTerm> modes;
    struct Random {
        std::optional<std::uint64_t> seed;
        double h_norm = 1.0;
        int max_k2 = 0;
        double decay = 1.0;
    };
    std::optional<Random> random;
    std::optional<std::filesystem::path> file;
};

struct QuasipotentialConfig {
    double tail_factor = 1e-3;
    /// Fixed horizon; by default the tail rule picks it.
    std::optional<double> horizon;
    double max_horizon = 1e3;
    int max_iterations = 5000;
    double gradient_tolerance = 1e-8;
    ActionScheme scheme = ActionScheme::midpoint;
    bool write_trajectory = false;
};

struct VerifyConfig {
    std::vector<int> sizes{8, 16, 32};
    int samples = 100;
    double threshold = 1e-10;
    /// Grid size for the dense convolution check (O(N^4) work).
    int convolution_size = 8;
};

struct ExitScanConfig {
    double radius = 1.0;
    std::vector<double> eps;
    double t_max = 1e5;
    std::size_t samples = 500;
    bool delta_corrected_target = false;
    double target_dt = 2e-3;
    int slope_resamples = 1000;
};

struct RunConfig {
    Experiment experiment = Experiment::verify_operators;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
    std::filesystem::path output_dir = "nsqp_out";
    GridConfig grid;
    double dt = 2e-3;
    bool nonlinear = true;
    /// One value for most experiments; the descending list for gamma-sweep.
    std::vector<double> deltas{0.0};
    double beta = 2.0;
    FieldConfig phi;
    QuasipotentialConfig quasipotential;
    VerifyConfig verify;
    ExitScanConfig exit;
};

/// Parses YAML text.  Unknown keys, wrong types and out-of-range values raise ConfigError with
/// the offending key path and line number.  When `experiment` is given (the CLI subcommand) it
/// fills a missing `experiment` key and must agree with a present one.
RunConfig parse_config(const std::string& text, const std::string& source_name = "<config>",
                       std::optional<Experiment> experiment = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, std::optional<Experiment> experiment = std::nullopt);

/// Resolved configuration (defaults filled in) as YAML.  The worker count and output directory
/// are omitted so that the echo, like every other artifact, does not depend on them.
std::string resolved_config_yaml(const RunConfig& cfg);

GridPtr build_grid(const RunConfig& cfg);
FourierField build_field(const RunConfig& cfg, const GridPtr& grid);

/// Threads from config, overridden by the NSQP_THREADS environment variable, overridden by
/// an explicit command-line value.
unsigned resolve_threads(unsigned config_value, const char* env_value, std::optional<unsigned> cli_value);

struct RunResult {
    int exit_code = kOk;
    std::string summary;
    std::vector<std::filesystem::path> outputs;
};

/// Each runner writes resolved_config.yaml plus its artifacts into cfg.output_dir.
RunResult run_verify_operators(const RunConfig& cfg);
RunResult run_quasipotential(const RunConfig& cfg);
RunResult run_gamma_sweep(const RunConfig& cfg);
RunResult run_exit_scan(const RunConfig& cfg);

/// Dispatches on cfg.experiment and maps library errors to exit codes.
RunResult run_experiment(const RunConfig& cfg);

}  // namespace nsqp::tools
