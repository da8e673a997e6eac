#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "nsqp_tools/experiments.hpp"

using namespace nsqp::tools;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::string& yaml) {
    try {
        parse_config(yaml, "test.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

using FileMap = std::map<std::string, std::string>;

FileMap read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[entry.path().filename().string()] = s.str();
    }
    return files;
}

void expect_same_files(const FileMap& a, const FileMap& b) {
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [name, content] : a) {
        ASSERT_TRUE(b.contains(name)) << name;
        EXPECT_TRUE(content == b.at(name)) << name << " differs";
    }
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nsqp_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kLinearExit = R"(
experiment: exit-scan
master_seed: 5
grid:
  modes: 8
  truncation: [[1, 0]]
  parity: odd
  backend: triad
integrator:
  dt: 0.01
  nonlinear: false
exit:
  radius: 1.0
  eps: [0.5, 0.4, 0.33]
  samples: 40
  slope_resamples: 100
)";

const char* kSmallQuasipotential = R"(
experiment: quasipotential
grid:
  modes: 8
integrator:
  dt: 0.01
phi:
  modes:
    - {k: [1, 0], amplitude: 0.4}
    - {k: [1, 1], amplitude: 0.2, phase: 0.3}
quasipotential:
  horizon: 4.0
  write_trajectory: true
)";

}  // namespace

TEST(Config, DefaultsAndPiLengths) {
    const RunConfig cfg = parse_config("experiment: verify-operators\ngrid:\n  length: 2pi\n");
    EXPECT_NEAR(cfg.grid.length, 6.283185307179586, 1e-15);
    EXPECT_EQ(cfg.grid.modes, 16);
    EXPECT_TRUE(cfg.grid.dealias);
    EXPECT_EQ(cfg.threads, 1u);
    EXPECT_NEAR(parse_config("experiment: verify-operators\ngrid: {length: 0.5pi}\n").grid.length,
                1.5707963267948966, 1e-15);
    EXPECT_EQ(parse_config("experiment: verify-operators\ngrid: {length: 3}\n").grid.length, 3.0);
}

TEST(Config, UnknownKeysNameThePathAndLine) {
    const std::string m = message_of("experiment: verify-operators\ngrid:\n  modes: 8\n  modez: 8\n");
    EXPECT_NE(m.find("grid.modez"), std::string::npos) << m;
    EXPECT_NE(m.find("line 4"), std::string::npos) << m;
    EXPECT_NE(m.find("unknown key"), std::string::npos) << m;
    EXPECT_NE(message_of("experiment: verify-operators\nseed: 3\n").find("seed"), std::string::npos);
}

TEST(Config, TypeAndRangeErrorsNameThePathAndLine) {
    std::string m = message_of("experiment: verify-operators\ngrid:\n  modes: lots\n");
    EXPECT_NE(m.find("grid.modes"), std::string::npos) << m;
    EXPECT_NE(m.find("line 3"), std::string::npos) << m;
    m = message_of("experiment: verify-operators\ngrid:\n  modes: 7\n");
    EXPECT_NE(m.find("even"), std::string::npos) << m;
    m = message_of("experiment: quasipotential\nintegrator:\n  dt: -1\nphi: {modes: [{k: [1, 0]}]}\n");
    EXPECT_NE(m.find("integrator.dt"), std::string::npos) << m;
    m = message_of("experiment: gamma-sweep\nnoise:\n  deltas: [0.1, 0.5]\nphi: {modes: [{k: [1, 0]}]}\n");
    EXPECT_NE(m.find("descending"), std::string::npos) << m;
    m = message_of("experiment: verify-operators\ngrid: [1, 2\n");
    EXPECT_NE(m.find("line"), std::string::npos) << m;
}

TEST(Config, ExperimentSpecificRequirements) {
    EXPECT_NE(message_of("experiment: quasipotential\n").find("phi"), std::string::npos);
    EXPECT_NE(message_of("experiment: exit-scan\n").find("exit.eps"), std::string::npos);
    EXPECT_NE(message_of("experiment: quasipotential\nnoise: {deltas: [1, 0.1]}\nphi: {modes: [{k: [1, 0]}]}\n")
                  .find("gamma-sweep"),
              std::string::npos);
    EXPECT_NE(message_of("experiment: quasipotential\nphi: {modes: [{k: [1, 0]}], file: x.json}\n").find("exactly one"),
              std::string::npos);
    EXPECT_THROW(parse_config("master_seed: 1\n"), ConfigError);
    EXPECT_EQ(parse_config("master_seed: 1\n", "x", Experiment::verify_operators).experiment,
              Experiment::verify_operators);
    EXPECT_THROW(parse_config("experiment: exit-scan\nexit: {eps: [0.1]}\n", "x", Experiment::quasipotential),
                 ConfigError);
}

TEST(Config, RandomFieldSeedDefaultsToMasterSeed) {
    const RunConfig cfg =
        parse_config("experiment: quasipotential\nmaster_seed: 99\nphi:\n  random: {h_norm: 0.5, max_k2: 4}\n");
    ASSERT_TRUE(cfg.phi.random);
    EXPECT_EQ(cfg.phi.random->seed, 99u);
}

TEST(Config, ResolvedEchoIsAFixedPointAndOmitsThreads) {
    RunConfig cfg = parse_config(kLinearExit);
    cfg.threads = 3;
    const std::string echo = resolved_config_yaml(cfg);
    EXPECT_EQ(echo.find("threads"), std::string::npos);
    const RunConfig again = parse_config(echo);
    EXPECT_EQ(resolved_config_yaml(again), echo);
    EXPECT_EQ(again.exit.eps, cfg.exit.eps);
    EXPECT_EQ(again.grid.truncation, cfg.grid.truncation);
    EXPECT_EQ(again.dt, cfg.dt);
}

TEST(Config, ThreadResolutionOrder) {
    EXPECT_EQ(resolve_threads(2, nullptr, std::nullopt), 2u);
    EXPECT_EQ(resolve_threads(2, "", std::nullopt), 2u);
    EXPECT_EQ(resolve_threads(2, "5", std::nullopt), 5u);
    EXPECT_EQ(resolve_threads(2, "5", 7u), 7u);
    EXPECT_THROW(resolve_threads(2, "many", std::nullopt), ConfigError);
    EXPECT_THROW(resolve_threads(2, "0", std::nullopt), ConfigError);
    EXPECT_THROW(resolve_threads(2, "4x", std::nullopt), ConfigError);
}

TEST(Runners, ExitScanArtifactsAreIdenticalAcrossThreadCounts) {
    RunConfig cfg = parse_config(kLinearExit);
    cfg.output_dir = scratch("exit_1");
    cfg.threads = 1;
    const RunResult a = run_experiment(cfg);
    ASSERT_EQ(a.exit_code, kOk) << a.summary;
    const FileMap fa = read_dir(cfg.output_dir);
    cfg.output_dir = scratch("exit_3");
    cfg.threads = 3;
    const RunResult b = run_experiment(cfg);
    ASSERT_EQ(b.exit_code, kOk) << b.summary;
    ASSERT_EQ(fa.size(), 3u);
    expect_same_files(fa, read_dir(cfg.output_dir));
    EXPECT_NE(fa.at("exit_scan.csv").find("eps,n_exited"), std::string::npos);
    EXPECT_NE(fa.at("exit_regression.json").find("\"slope\""), std::string::npos);
}

TEST(Runners, QuasipotentialArtifactsAreIdenticalAcrossThreadCounts) {
    RunConfig cfg = parse_config(kSmallQuasipotential);
    cfg.output_dir = scratch("qp_1");
    const RunResult a = run_experiment(cfg);
    ASSERT_EQ(a.exit_code, kOk) << a.summary;
    const auto fa = read_dir(cfg.output_dir);
    cfg.output_dir = scratch("qp_2");
    cfg.threads = 2;
    const RunResult b = run_experiment(cfg);
    ASSERT_EQ(b.exit_code, kOk) << b.summary;
    expect_same_files(fa, read_dir(cfg.output_dir));
    for (const char* name : {"resolved_config.yaml", "quasipotential.csv", "action_breakdown.csv", "trajectory.csv",
                             "quasipotential_summary.json"}) {
        EXPECT_TRUE(fa.contains(name)) << name;
    }
}

TEST(Runners, VerifyOperatorsFailsWithoutDealiasing) {
    RunConfig cfg = parse_config("experiment: verify-operators\nverify: {sizes: [8], samples: 5}\n");
    cfg.output_dir = scratch("verify_ok");
    EXPECT_EQ(run_experiment(cfg).exit_code, kOk);
    cfg.grid.dealias = false;
    cfg.output_dir = scratch("verify_aliased");
    const RunResult r = run_experiment(cfg);
    EXPECT_EQ(r.exit_code, kVerificationFailed);
    const std::string csv = read_dir(cfg.output_dir).at("verify_operators.csv");
    EXPECT_NE(csv.find("enstrophy_cancellation,8,"), std::string::npos);
    EXPECT_NE(csv.find(",0\n"), std::string::npos);
}

TEST(Runners, ErrorsMapToExitCodes) {
    RunConfig cfg = parse_config(kSmallQuasipotential);
    cfg.output_dir = scratch("qp_bad_mode");
    cfg.phi.modes[0].k = {3, 0};  // outside the 2/3 mask at N = 8
    EXPECT_EQ(run_experiment(cfg).exit_code, kValidationError);

    cfg = parse_config(kSmallQuasipotential);
    cfg.output_dir = scratch("qp_no_iterations");
    cfg.quasipotential.max_iterations = 1;
    cfg.quasipotential.gradient_tolerance = 1e-14;
    cfg.quasipotential.horizon = 1.0;
    EXPECT_EQ(run_experiment(cfg).exit_code, kNotConverged);

    cfg = parse_config(kLinearExit);
    cfg.output_dir = scratch("exit_bad_radius");
    cfg.phi.modes = {{{1, 0}, 2.0}};
    EXPECT_EQ(run_experiment(cfg).exit_code, kValidationError);
}

#ifdef NSQP_CLI_PATH
TEST(Cli, SubcommandsAndExitStatus) {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const fs::path config = dir / "verify.yaml";
    std::ofstream(config) << "verify: {sizes: [8], samples: 3}\n";
    const std::string exe = NSQP_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    EXPECT_EQ(run("verify-operators --config " + config.string() + " --out " + (dir / "a").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "a" / "verify_operators.csv"));
    EXPECT_EQ(run("quasipotential --config " + config.string() + " --out " + (dir / "b").string()), 2);
    EXPECT_EQ(run("verify-operators --config " + (dir / "missing.yaml").string()), 2);
    EXPECT_EQ(run("verify-operators --config " + config.string() + " --threads 0"), 2);
    std::ofstream(config) << "verify: {sizes: [8], samples: 3}\ngrid: {dealias: false}\n";
    EXPECT_EQ(run("verify-operators --config " + config.string() + " --out " + (dir / "c").string()), 5);
}
#endif
