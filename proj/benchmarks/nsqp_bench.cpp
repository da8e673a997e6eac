#include <benchmark/benchmark.h>

#include <numbers>

#include "nsqp/action.hpp"
#include "nsqp/integrator.hpp"
#include "nsqp/noise.hpp"
#include "nsqp/operators.hpp"
#include "nsqp/random_fields.hpp"

using namespace nsqp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void BM_BilinearPseudoSpectral(benchmark::State& state) {
    const auto g = make_grid(kTwoPi, static_cast<int>(state.range(0)));
    PhiloxStream rng(1, 0);
    const FourierField u = random_field(g, rng, 1.0), v = random_field(g, rng, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(bilinear_B(u, v));
}
BENCHMARK(BM_BilinearPseudoSpectral)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_BilinearTriad(benchmark::State& state) {
    const auto g = make_grid(kTwoPi, static_cast<int>(state.range(0)), {.backend = NonlinearBackend::triad});
    PhiloxStream rng(1, 0);
    const FourierField u = random_field(g, rng, 1.0), v = random_field(g, rng, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(bilinear_B(u, v));
}
BENCHMARK(BM_BilinearTriad)->Arg(8)->Arg(16);

void BM_BilinearTriadTruncation(benchmark::State& state) {
    const auto g = make_grid(kTwoPi, 8, {.modes = {{1, 0}, {1, 1}, {2, 1}}, .parity = Parity::odd,
                                         .backend = NonlinearBackend::triad});
    PhiloxStream rng(1, 0);
    const FourierField u = random_field(g, rng, 1.0), v = random_field(g, rng, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(bilinear_B(u, v));
}
BENCHMARK(BM_BilinearTriadTruncation);

void BM_StochasticStep(benchmark::State& state) {
    const auto g = make_grid(kTwoPi, static_cast<int>(state.range(0)));
    const IntegratorConfig cfg(g, 1e-3);
    const NoiseOperator noise(g, 0.01);
    Stepper stepper(cfg);
    PhiloxStream init(2, 0), rng(2, 1);
    FourierField u = random_field(g, init, 0.5);
    for (auto _ : state) {
        stepper.stochastic(u, 0.01, noise, rng);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_StochasticStep)->Arg(16)->Arg(32)->Arg(64);

void BM_ActionGradient(benchmark::State& state) {
    const auto g = make_grid(kTwoPi, 16);
    const NoiseOperator noise(g, 0.0);
    const auto nodes = static_cast<std::size_t>(state.range(0));
    const DiscreteAction action(noise, 1e-2, nodes, {.scheme = ActionScheme::midpoint});
    PhiloxStream rng(3, 0);
    std::vector<double> x(action.size());
    for (double& v : x) v = 0.1 * rng.normal();
    std::vector<double> grad(x.size());
    for (auto _ : state) benchmark::DoNotOptimize(action.value_and_gradient(x, grad));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(nodes));
}
BENCHMARK(BM_ActionGradient)->Arg(101)->Arg(1001);

}  // namespace
BENCHMARK_MAIN();
