#include <gtest/gtest.h>

#include "nsqp/action.hpp"
#include "nsqp/error.hpp"
#include "nsqp/quasipotential.hpp"
#include "test_support.hpp"

using namespace nsqp;
using testing_support::kTwoPi;

namespace {

FourierField band_limited(const GridPtr& g, std::uint64_t seed) {
    PhiloxStream rng(seed, 0);
    return random_field(g, rng, 1.0, 5);
}

}  // namespace

TEST(Formula, ParsevalValues) {
    const auto g = make_grid(kTwoPi, 16);
    EXPECT_EQ(quasipotential_formula(FourierField(g)), 0.0);
    const FourierField a = mode_field(g, 1, 0, 0.8), b = mode_field(g, 2, 1, 0.5);
    EXPECT_NEAR(quasipotential_formula(a), g->lambda1() * 0.64, 1e-14);
    EXPECT_NEAR(quasipotential_formula(a + b), quasipotential_formula(a) + quasipotential_formula(b), 1e-14);
    const auto g1 = make_grid(1.0, 16);
    EXPECT_NEAR(quasipotential_formula(mode_field(g1, 0, 1, 2.0)), 4.0 * g1->lambda1(), 1e-10);
}

TEST(Formula, RegularityDiagnosticGrowsWithRoughness) {
    const auto g = make_grid(kTwoPi, 32);
    const double smooth = continuum_regularity_norm(mode_field(g, 1, 0, 1.0), 2.0);
    const double rough = continuum_regularity_norm(mode_field(g, 7, 5, 1.0), 2.0);
    EXPECT_NEAR(smooth, 1.0, 1e-14);
    EXPECT_NEAR(rough, std::pow(74.0, 1.5), 1e-9);
}

TEST(ReverseFlow, ZeroFieldGivesZeroPath) {
    const auto g = make_grid(kTwoPi, 16);
    const auto c = reverse_flow_candidate(FourierField(g), 1.0, IntegratorConfig(g, 1e-2));
    for (const auto& u : c.path.samples()) EXPECT_EQ(h_norm(u), 0.0);
    EXPECT_EQ(action_eval(c.path, NoiseOperator(g, 0.0)).total, 0.0);
}

TEST(ReverseFlow, TailRuleAndCandidateAction) {
    const auto g = make_grid(kTwoPi, 16);
    const FourierField phi = mode_field(g, 1, 0, 0.9);
    const IntegratorConfig cfg(g, 2e-3);
    const double t = tail_rule_horizon(phi, cfg);
    EXPECT_NEAR(t, std::log(1e3) / g->lambda1(), 2e-3 + 1e-9);
    const auto c = reverse_flow_candidate(phi, t, cfg);
    EXPECT_TRUE(c.tail_ok);
    EXPECT_LE(c.tail_v_norm, 1e-3 * v_norm(phi));
    EXPECT_DOUBLE_EQ(c.path.t1(), 0.0);
    EXPECT_NEAR(c.path.t0(), -t, 1e-12);
    const double s = action_eval(c.path, NoiseOperator(g, 0.0)).total;
    EXPECT_NEAR(s, quasipotential_formula(phi) - c.tail_v_norm * c.tail_v_norm, 1e-5);
    EXPECT_FALSE(reverse_flow_candidate(phi, 1.0, cfg).tail_ok);
    EXPECT_THROW(tail_rule_horizon(phi, cfg, 1e-3, 1.0), ValidationError);
}

TEST(ReverseFlow, GenericCandidateGapShrinksWithDt) {
    const auto g = make_grid(kTwoPi, 16);
    const FourierField phi = band_limited(g, 1);
    std::vector<double> gaps;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const IntegratorConfig cfg(g, dt);
        const auto c = reverse_flow_candidate(phi, tail_rule_horizon(phi, cfg, 1e-5), cfg, 1e-5);
        gaps.push_back(relative_gap(action_eval(c.path, NoiseOperator(g, 0.0)).total, quasipotential_formula(phi)));
    }
    EXPECT_LT(gaps.back(), 1e-4);
    EXPECT_GT(gaps[0] / gaps[1], 3.0);
    EXPECT_GT(gaps[1] / gaps[2], 3.0);
}

TEST(Minimize, ZeroTarget) {
    const auto g = make_grid(kTwoPi, 8);
    const auto rep = minimize_action(FourierField(g), NoiseOperator(g, 0.1), 1.0, 1e-2);
    EXPECT_EQ(rep.value, 0.0);
    EXPECT_TRUE(rep.converged);
    for (const auto& u : rep.path.samples()) EXPECT_EQ(h_norm(u), 0.0);
}

TEST(Minimize, LowestModeMatchesFormula) {
    const auto g = make_grid(kTwoPi, 16);
    const FourierField phi = mode_field(g, 1, 0, 1.0);
    const double dt = 2e-3;
    const double t = tail_rule_horizon(phi, IntegratorConfig(g, dt));
    const auto rep = minimize_action(phi, NoiseOperator(g, 0.0), t, dt);
    EXPECT_TRUE(rep.converged) << to_string(rep.status);
    EXPECT_LT(relative_gap(rep.value, rep.formula_value), 0.02);
    EXPECT_GE(rep.value, rep.formula_value * (1 - 1e-5));
    EXPECT_LE(rep.objective_value, rep.initial_value);
    EXPECT_EQ(h_norm(rep.path.front()), 0.0);
    EXPECT_EQ(h_norm(rep.path.back() - phi), 0.0);
    EXPECT_LE(rep.tail_v_norm, 1e-3 * v_norm(phi));
}

TEST(Minimize, GenericFieldSatisfiesReverseFlowEquation) {
    const auto g = make_grid(kTwoPi, 12);
    const FourierField phi = band_limited(g, 2);
    const double dt = 5e-3;
    const double t = tail_rule_horizon(phi, IntegratorConfig(g, dt));
    const auto rep = minimize_action(phi, NoiseOperator(g, 0.0), t, dt);
    EXPECT_TRUE(rep.converged) << to_string(rep.status);
    EXPECT_LT(relative_gap(rep.value, rep.formula_value), 0.02);
    const auto a = action_eval(rep.path, NoiseOperator(g, 0.0));
    EXPECT_LT(std::sqrt(a.residual_reverse), 0.05 * std::sqrt(a.total));
}

TEST(Minimize, RejectsFieldsOutsideTheTruncation) {
    GridOptions o;
    o.parity = Parity::odd;
    const auto g = make_grid(kTwoPi, 8, o);
    FourierField phi(g);
    phi.y(g->index_of(1, 0)) = 0.5;
    phi.y(g->index_of(-1, 0)) = 0.5;
    EXPECT_THROW(minimize_action(phi, NoiseOperator(g, 0.0), 1.0, 1e-2), ValidationError);
    EXPECT_THROW(minimize_action(mode_field(g, 1, 0, 1.0), NoiseOperator(g, 0.0), 1e-2, 1e-2), ValidationError);
}

TEST(Minimize, CollocationObjectiveUndercutsTheContinuumInfimum) {
    // The centered-difference objective lets a grid-scale zig-zag lower the discrete action
    // below |phi|_V^2; the midpoint objective does not.
    GridOptions o;
    o.modes = {{1, 0}};
    o.parity = Parity::odd;
    o.backend = NonlinearBackend::triad;
    const auto g = make_grid(kTwoPi, 8, o);
    const FourierField phi = mode_field(g, 1, 0, 1.0);
    const double dt = 1e-2, t = tail_rule_horizon(phi, IntegratorConfig(g, dt));
    MinimizeOptions col;
    col.scheme = ActionScheme::collocation;
    const auto a = minimize_action(phi, NoiseOperator(g, 0.0), t, dt, col);
    const auto b = minimize_action(phi, NoiseOperator(g, 0.0), t, dt);
    EXPECT_LT(a.objective_value, 1.0 - 1e-3);
    EXPECT_GE(b.objective_value, 1.0);
    EXPECT_LT(relative_gap(b.value, 1.0), 1e-4);
}

TEST(GammaSweep, MonotoneAndConvergent) {
    const auto g = make_grid(kTwoPi, 12);
    const FourierField phi = band_limited(g, 3);
    const double dt = 5e-3, t = tail_rule_horizon(phi, IntegratorConfig(g, dt));
    const std::vector<double> deltas{1, 0.1, 0.01, 1e-3, 1e-4};
    const auto r = gamma_sweep(phi, deltas, t, dt);
    ASSERT_EQ(r.rows.size(), deltas.size());
    EXPECT_TRUE(r.monotone);
    for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LE(r.rows[i].report.value, r.rows[i - 1].report.value);
    for (const auto& row : r.rows) EXPECT_TRUE(row.report.converged) << row.delta;
    EXPECT_LT(r.final_rel_gap, 0.01);
}

TEST(GammaSweep, EdgeCases) {
    const auto g = make_grid(kTwoPi, 8);
    const FourierField phi = mode_field(g, 1, 1, 0.5);
    const std::vector<double> zero{0.0};
    const auto single = gamma_sweep(phi, zero, 5.0, 1e-2);
    ASSERT_EQ(single.rows.size(), 1u);
    EXPECT_EQ(single.rows[0].delta, 0.0);
    const std::vector<double> deltas{0.1, 0.0};
    for (const auto& row : gamma_sweep(FourierField(g), deltas, 1.0, 1e-2).rows) EXPECT_EQ(row.report.value, 0.0);
    const std::vector<double> bad{0.1, 0.1};
    EXPECT_THROW(gamma_sweep(phi, bad, 1.0, 1e-2), ValidationError);
    const std::vector<double> negative{-0.1};
    EXPECT_THROW(gamma_sweep(phi, negative, 1.0, 1e-2), ValidationError);
}
