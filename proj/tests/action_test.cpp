#include <gtest/gtest.h>

#include "nsqp/action.hpp"
#include "nsqp/error.hpp"
#include "nsqp/integrator.hpp"
#include "test_support.hpp"

using namespace nsqp;
using testing_support::kTwoPi;
using testing_support::max_rel_diff;

namespace {

// u(t) = cos(t) a + sin(2t) b + t^2 c on [0, 1].
PathGrid smooth_path(const GridPtr& g, double dt, std::uint64_t seed) {
    PhiloxStream rng(seed, 0);
    const FourierField a = random_field(g, rng, 1.0, 4), b = random_field(g, rng, 0.5, 4),
                       c = random_field(g, rng, 0.3, 4);
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    std::vector<FourierField> s;
    for (std::size_t n = 0; n <= steps; ++n) {
        const double t = dt * static_cast<double>(n);
        s.push_back(std::cos(t) * a + std::sin(2 * t) * b + (t * t) * c);
    }
    return PathGrid(0.0, dt, std::move(s));
}

double max_error(const std::vector<FourierField>& f, const FourierField& target) {
    double e = 0.0;
    for (const auto& fn : f) e = std::max(e, h_norm(fn - target));
    return e;
}

}  // namespace

TEST(Action, NeedsThreeNodes) {
    const auto g = make_grid(kTwoPi, 8);
    const PathGrid p(0.0, 0.1, {FourierField(g), FourierField(g)});
    EXPECT_THROW(time_derivative(p), ValidationError);
    EXPECT_THROW(action_eval(p, NoiseOperator(g, 0.0)), ValidationError);
}

TEST(Action, ConstantPathResidual) {
    const auto g = make_grid(kTwoPi, 16);
    PhiloxStream rng(1, 1);
    const FourierField phi = random_field(g, rng, 1.0);
    const PathGrid p(0.0, 0.1, {phi, phi, phi, phi});
    const FourierField expected = stokes_apply(phi) + bilinear_B(phi, phi);
    for (const auto& f : residual_H(p)) EXPECT_LT(max_rel_diff(f, expected), 1e-13);
}

TEST(Action, ManufacturedForcingIsRecoveredAtSecondOrder) {
    const auto g = make_grid(kTwoPi, 16);
    PhiloxStream rng(2, 2);
    const FourierField u0 = random_field(g, rng, 1.0, 8), f = random_field(g, rng, 2.0, 4);
    const Forcing forcing = [&](double t) { return std::cos(t) * f; };
    std::vector<double> err;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const PathGrid path = solve_deterministic(u0, forcing, 1.0, IntegratorConfig(g, dt));
        const auto r = residual_H(path);
        double e = 0.0;
        for (std::size_t n = 0; n < path.size(); ++n) e = std::max(e, h_norm(r[n] - std::cos(path.time(n)) * f));
        err.push_back(e);
    }
    EXPECT_LT(err.back(), 1e-3 * h_norm(f));
    for (std::size_t i = 1; i < err.size(); ++i) {
        EXPECT_GT(err[i - 1] / err[i], 3.0);
        EXPECT_LT(err[i - 1] / err[i], 5.0);
    }
}

TEST(Action, FreeTrajectoryHasNearlyZeroAction) {
    const auto g = make_grid(kTwoPi, 16);
    PhiloxStream rng(3, 3);
    const FourierField u0 = random_field(g, rng, 1.0, 8);
    const PathGrid path = solve_deterministic(u0, {}, 1.0, IntegratorConfig(g, 1e-3));
    EXPECT_LT(max_error(residual_H(path), FourierField(g)), 1e-3);
    EXPECT_LT(action_eval(path, NoiseOperator(g, 0.0)).total, 1e-7);
}

TEST(Action, MollifiedActionIsMonotoneInDelta) {
    const auto g = make_grid(kTwoPi, 16);
    const PathGrid path = smooth_path(g, 1e-2, 4);
    double prev = std::numeric_limits<double>::infinity();
    const double s0 = action_eval(path, NoiseOperator(g, 0.0)).total;
    for (double delta : {1.0, 0.1, 0.01, 1e-3, 0.0}) {
        const double s = action_eval(path, NoiseOperator(g, delta)).total;
        EXPECT_LE(s, prev);
        EXPECT_GE(s, s0);
        EXPECT_GE(s, 0.0);
        prev = s;
    }
    EXPECT_NEAR(action_eval(path, NoiseOperator(g, 1e-9)).total, s0, 1e-6 * s0);
}

TEST(Action, DecompositionDefectIsSecondOrder) {
    const auto g = make_grid(kTwoPi, 16);
    std::vector<double> defect;
    for (double dt : {4e-3, 2e-3, 1e-3}) defect.push_back(action_decomposition_check(smooth_path(g, dt, 5)));
    EXPECT_LT(defect.back(), 1e-6);
    for (std::size_t i = 1; i < defect.size(); ++i) {
        EXPECT_GT(defect[i - 1] / defect[i], 3.5);
        EXPECT_LT(defect[i - 1] / defect[i], 4.5);
    }
}

TEST(Action, LinearInterpolationPathDefect) {
    const auto g = make_grid(kTwoPi, 16);
    PhiloxStream rng(6, 6);
    const FourierField phi = random_field(g, rng, 1.0, 8);
    std::vector<FourierField> s;
    for (int n = 0; n <= 1000; ++n) s.push_back((n / 1000.0) * phi);
    EXPECT_LT(action_decomposition_check(PathGrid(0.0, 1e-3, s)), 1e-6);
}

TEST(Action, LinearActionScalesQuadratically) {
    const auto g = make_grid(kTwoPi, 16);
    const PathGrid path = smooth_path(g, 1e-2, 7);
    std::vector<FourierField> scaled;
    for (const auto& u : path.samples()) scaled.push_back(3.0 * u);
    const ActionOptions linear{.nonlinear = false};
    const NoiseOperator noise(g, 0.1);
    const double s1 = action_eval(path, noise, linear).total;
    const double s3 = action_eval(PathGrid(0.0, path.dt(), scaled), noise, linear).total;
    EXPECT_NEAR(s3, 9.0 * s1, 1e-12 * s3);
}

TEST(Action, ThreadCountDoesNotChangeResults) {
    const auto g = make_grid(kTwoPi, 16);
    const PathGrid path = smooth_path(g, 1e-2, 8);
    const NoiseOperator noise(g, 0.01);
    const auto a = action_eval(path, noise, {.threads = 1});
    const auto b = action_eval(path, noise, {.threads = 3});
    EXPECT_EQ(a.total, b.total);
    EXPECT_EQ(action_csv_row(a), action_csv_row(b));
}

TEST(Action, DiscreteActionAgreesWithActionEval) {
    const auto g = make_grid(kTwoPi, 16);
    const PathGrid path = smooth_path(g, 1e-2, 9);
    const NoiseOperator noise(g, 0.05);
    const DiscreteAction da(noise, path.dt(), path.size());
    EXPECT_NEAR(da.value(da.pack(path)), action_eval(path, noise).total, 1e-12 * action_eval(path, noise).total);
    const PathGrid back = da.unpack(da.pack(path), path.t0());
    EXPECT_LT(max_rel_diff(back.back(), path.back()), 1e-15);
}

class GradientCheck : public ::testing::TestWithParam<ActionScheme> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
    const auto g = make_grid(kTwoPi, 12);
    const PathGrid path = smooth_path(g, 2e-2, 10);
    const NoiseOperator noise(g, 0.1);
    const DiscreteAction da(noise, path.dt(), path.size(), {.scheme = GetParam()});
    const auto x = da.pack(path);
    std::vector<double> grad(x.size());
    da.value_and_gradient(x, grad);
    PhiloxStream rng(11, 11);
    for (int dir = 0; dir < 20; ++dir) {
        std::vector<double> d(x.size()), xp(x), xm(x);
        double norm = 0.0;
        for (double& v : d) norm += (v = rng.normal()) * v;
        norm = std::sqrt(norm);
        const double h = 1e-5;
        double analytic = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            d[i] /= norm;
            xp[i] += h * d[i];
            xm[i] -= h * d[i];
            analytic += grad[i] * d[i];
        }
        const double fd = (da.value(xp) - da.value(xm)) / (2 * h);
        EXPECT_LT(std::abs(fd - analytic), 1e-5 * std::abs(analytic)) << "direction " << dir;
    }
}

INSTANTIATE_TEST_SUITE_P(Schemes, GradientCheck, ::testing::Values(ActionScheme::collocation, ActionScheme::midpoint));

TEST(Action, MidpointSchemeBoundedBelowByBoundaryGain) {
    const auto g = make_grid(kTwoPi, 12);
    PhiloxStream rng(12, 12);
    const NoiseOperator noise(g, 0.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<FourierField> s;
        for (int n = 0; n < 30; ++n) s.push_back(random_field(g, rng, 0.2 + 0.05 * n));
        const PathGrid p(0.0, 0.05, s);
        const DiscreteAction da(noise, p.dt(), p.size(), {.scheme = ActionScheme::midpoint});
        const double gain = std::pow(v_norm(p.back()), 2) - std::pow(v_norm(p.front()), 2);
        EXPECT_GE(da.value(da.pack(p)), gain * (1 - 1e-12));
    }
}

TEST(Action, CsvRow) {
    ActionBreakdown b;
    b.t0 = -1;
    b.t1 = 0;
    b.dt = 0.5;
    b.delta = 0.25;
    b.total = 1;
    EXPECT_EQ(action_csv_header(), "t0,t1,dt,delta,total,residual_reverse,boundary_gain,defect");
    EXPECT_EQ(action_csv_row(b), "-1,0,0.5,0.25,1,0,0,0");
}
