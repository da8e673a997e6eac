#include <gtest/gtest.h>

#include "nsqp/error.hpp"
#include "nsqp/exit_mc.hpp"
#include "nsqp/statistics.hpp"
#include "oracles/scalar_ou.hpp"
#include "test_support.hpp"

using namespace nsqp;
using testing_support::kTwoPi;

namespace {

GridPtr one_mode_grid() {
    GridOptions o;
    o.modes = {{1, 0}};
    o.parity = Parity::odd;
    o.backend = NonlinearBackend::triad;
    return make_grid(kTwoPi, 8, o);
}

GridPtr two_mode_grid() {
    GridOptions o;
    o.modes = {{1, 0}, {0, 1}};
    o.backend = NonlinearBackend::triad;
    return make_grid(kTwoPi, 8, o);
}

ExitConfig base_config(const GridPtr& g) {
    ExitConfig c{.phi = FourierField(g)};
    c.radius = 1.0;
    c.eps_list = {0.5};
    c.dt = 1e-2;
    c.t_max = 1e4;
    c.n_samples = 50;
    c.master_seed = 42;
    return c;
}

}  // namespace

TEST(ExitConfig, Validation) {
    const auto g = one_mode_grid();
    ExitConfig c = base_config(g);
    EXPECT_NO_THROW(validate_exit_config(c));
    c.radius = 0.0;
    EXPECT_THROW(validate_exit_config(c), ValidationError);
    c = base_config(g);
    c.phi = mode_field(g, 1, 0, 1.5);
    EXPECT_THROW(validate_exit_config(c), ValidationError);
    c = base_config(g);
    c.eps_list = {0.1, 0.2};
    EXPECT_THROW(validate_exit_config(c), ValidationError);
    c = base_config(g);
    c.n_samples = 1;
    EXPECT_THROW(validate_exit_config(c), ValidationError);
}

TEST(ExitTime, ZeroNoiseNeverExits) {
    const auto g = two_mode_grid();
    ExitConfig c = base_config(g);
    c.phi = mode_field(g, 1, 0, 0.5);
    c.t_max = 20.0;
    const ExitSample s = exit_time_single(c, 0.0, 0);
    EXPECT_EQ(s.outcome, ExitOutcome::censored);
    EXPECT_EQ(s.tau, 20.0);
}

TEST(ExitTime, SeededRunsRepeat) {
    const auto g = two_mode_grid();
    const ExitConfig c = base_config(g);
    const ExitSample a = exit_time_single(c, 0.5, 7), b = exit_time_single(c, 0.5, 7);
    EXPECT_EQ(a.outcome, ExitOutcome::exited);
    EXPECT_EQ(a.tau, b.tau);
    EXPECT_NE(a.tau, exit_time_single(c, 0.5, 8).tau);
}

TEST(ExitTime, CrossingIsInterpolatedWithinOneStep) {
    const auto g = one_mode_grid();
    ExitConfig c = base_config(g);
    c.nonlinear = false;
    int fractional = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const ExitSample s = exit_time_single(c, 0.5, i);
        ASSERT_EQ(s.outcome, ExitOutcome::exited);
        const double steps = s.tau / c.dt;
        EXPECT_GT(steps, 0.0);
        if (std::abs(steps - std::round(steps)) > 1e-9) ++fractional;
    }
    EXPECT_GT(fractional, 15);
}

TEST(ExitTime, OneModeLinearMatchesScalarOuOracleInDistribution) {
    const auto g = one_mode_grid();
    ExitConfig c = base_config(g);
    c.nonlinear = false;
    c.eps_list = {0.25};
    c.n_samples = 2000;
    const auto rows = exit_time_expectation(c);
    ASSERT_EQ(rows[0].taus.size(), c.n_samples);
    oracle::ScalarOuExit o;
    o.lambda = g->lambda_min_retained();
    o.eps = 0.25;
    o.dt = c.dt;
    o.radius = c.radius;
    const auto reference = oracle::scalar_ou_exit_sample(o, 2000, 2024);
    const KsResult ks = ks_two_sample(rows[0].taus, reference);
    EXPECT_GT(ks.p_value, 0.05) << "KS statistic " << ks.statistic;
}

TEST(ExitExpectation, CountsReproducibilityAndWorkerIndependence) {
    const auto g = two_mode_grid();
    ExitConfig c = base_config(g);
    c.eps_list = {0.6, 0.4, 0.3};
    c.n_samples = 40;
    const auto a = exit_time_expectation(c);
    c.threads = 3;
    const auto b = exit_time_expectation(c);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t r = 0; r < a.size(); ++r) {
        EXPECT_EQ(a[r].n_exited + a[r].n_censored + a[r].n_blowup, c.n_samples);
        EXPECT_EQ(exit_csv_row(a[r]), exit_csv_row(b[r]));
        EXPECT_LE(a[r].ci_lo, a[r].mean_tau);
        EXPECT_GE(a[r].ci_hi, a[r].mean_tau);
    }
    EXPECT_LT(a[0].mean_tau, a[2].mean_tau);
}

TEST(ExitExpectation, SmokeWithTwoSamplesAndHugeNoise) {
    const auto g = two_mode_grid();
    ExitConfig c = base_config(g);
    c.eps_list = {100.0};
    c.n_samples = 2;
    const auto rows = exit_time_expectation(c);
    EXPECT_EQ(rows[0].n_exited, 2u);
    EXPECT_TRUE(std::isfinite(rows[0].ci_lo));
    EXPECT_TRUE(std::isfinite(rows[0].ci_hi));
    EXPECT_LT(rows[0].mean_tau, 1.0);
}

TEST(ExitExpectation, AllCensoredRowIsFlagged) {
    const auto g = two_mode_grid();
    ExitConfig c = base_config(g);
    c.eps_list = {0.01};
    c.t_max = 1.0;
    c.n_samples = 4;
    const auto rows = exit_time_expectation(c);
    EXPECT_TRUE(rows[0].flagged);
    EXPECT_EQ(rows[0].n_censored, 4u);
    EXPECT_DOUBLE_EQ(rows[0].censored_fraction(), 1.0);
    EXPECT_TRUE(std::isnan(rows[0].mean_tau));
    EXPECT_THROW(fit_exit_rows(rows, c), ValidationError);
}

TEST(ExitScan, MollifiedNoiseRaisesTheSlope) {
    const auto g = one_mode_grid();
    ExitConfig c = base_config(g);
    c.nonlinear = false;
    c.radius = 0.6;
    c.eps_list = {0.09, 0.07, 0.06, 0.05};
    c.n_samples = 200;
    const auto white = exit_rate_scan(c);
    // q = 1 / (1 + delta lambda) = 0.8 for the single mode, so the exponent grows by 1 / q^2.
    c.delta = 0.25;
    for (double& e : c.eps_list) e *= 1.5625;
    const auto colored = exit_rate_scan(c, {.delta_corrected_target = true});
    EXPECT_GT(colored.slope, white.slope);
    EXPECT_GT(colored.target, white.target);
    EXPECT_NEAR(colored.target, 1.5625 * 0.36, 0.01);
    EXPECT_NEAR(white.target, 0.36, 1e-12);
}

TEST(ExitScan, CsvHeader) {
    EXPECT_EQ(exit_csv_header(), "eps,n_exited,n_censored,n_blowup,mean_tau,ci_lo,ci_hi,eps_log_mean");
}
