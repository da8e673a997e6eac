#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "nsqp_tools/experiments.hpp"

namespace {

struct Invocation {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* sub, Invocation& inv) {
    sub->add_option("-c,--config", inv.config, "YAML configuration file")->required();
    sub->add_option("-o,--out", inv.out, "Output directory (overrides output_dir)");
    sub->add_option("--seed", inv.seed, "Master seed (overrides master_seed)");
    sub->add_option("-j,--threads", inv.threads, "Worker threads (overrides NSQP_THREADS and threads)")
        ->check(CLI::Range(1u, 1024u));
}

}  // namespace

int main(int argc, char** argv) {
    using namespace nsqp::tools;
    CLI::App app{"Quasipotential and exit-time experiments for the stochastic 2D Navier-Stokes equations"};
    app.require_subcommand(1);
    Invocation inv;
    const std::pair<const char*, Experiment> commands[] = {
        {"verify-operators", Experiment::verify_operators},
        {"quasipotential", Experiment::quasipotential},
        {"gamma-sweep", Experiment::gamma_sweep},
        {"exit-scan", Experiment::exit_scan},
    };
    const char* help[] = {
        "Check the discrete operator identities",
        "Minimize the action to a target field",
        "Minimize the action over a descending list of noise regularizations",
        "Monte Carlo exit times from a ball and the exponential-rate fit",
    };
    std::vector<std::pair<CLI::App*, Experiment>> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
        add_common(sub, inv);
        subs.emplace_back(sub, commands[i].second);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidationError;
    }

    RunConfig cfg;
    try {
        for (const auto& [sub, experiment] : subs) {
            if (sub->parsed()) cfg = load_config(inv.config, experiment);
        }
        if (inv.out) cfg.output_dir = *inv.out;
        if (inv.seed) cfg.master_seed = *inv.seed;
        cfg.threads = resolve_threads(cfg.threads, std::getenv("NSQP_THREADS"), inv.threads);
    } catch (const ConfigError& e) {
        std::cerr << "nsqp: " << e.what() << '\n';
        return kValidationError;
    }

    const RunResult result = run_experiment(cfg);
    (result.exit_code == kOk ? std::cout : std::cerr) << result.summary << '\n';
    for (const auto& p : result.outputs) std::cout << "  wrote " << p.string() << '\n';
    return result.exit_code;
}
