#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nsqp/fourier_field.hpp"
#include "nsqp/integrator.hpp"
#include "nsqp/noise.hpp"

namespace nsqp {

/// Exit problem for the stochastic flow from the H-ball of radius `radius` about 0.
struct ExitConfig {
    /// Start field, |phi|_H < radius; also fixes the grid (truncation).
    FourierField phi;
    double radius = 1.0;
    /// Noise intensities, strictly descending.
    std::vector<double> eps_list;
    double delta = 0.0;
    double beta = 2.0;
    double dt = 1e-2;
    /// Censoring horizon.
    double t_max = 1e3;
    std::size_t n_samples = 100;
    std::uint64_t master_seed = 0;
    /// When false B is dropped (linear OU dynamics).
    bool nonlinear = true;
    unsigned threads = 1;
};

/// Throws ValidationError describing the first violated requirement.
void validate_exit_config(const ExitConfig& cfg);

enum class ExitOutcome { exited, censored, blowup };

struct ExitSample {
    ExitOutcome outcome = ExitOutcome::censored;
    /// Interpolated crossing time; t_max when censored; time of the guard trip on blow-up.
    double tau = 0.0;
};

/// Single-trajectory simulator holding its own integrator scratch (one per worker).
class ExitSimulator {
public:
    explicit ExitSimulator(const ExitConfig& cfg);

    /// Steps from phi with noise eps until |u|_H >= radius or t_max.  The crossing time is
    /// interpolated linearly in |u|_H^2 within the crossing step.  The noise stream is
    /// (master_seed, trajectory_index).
    ExitSample run(double eps, std::uint64_t trajectory_index);

private:
    const ExitConfig& cfg_;
    IntegratorConfig integrator_;
    NoiseOperator noise_;
    Stepper stepper_;
};

ExitSample exit_time_single(const ExitConfig& cfg, double eps, std::uint64_t trajectory_index);

struct ExitStats {
    double eps = 0.0;
    std::size_t n_exited = 0;
    std::size_t n_censored = 0;
    std::size_t n_blowup = 0;
    /// Mean over exited samples (NaN when none exited).  Biased low when n_censored > 0.
    double mean_tau = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    /// eps * log(mean_tau).
    double eps_log_mean = 0.0;
    /// Every sample censored or blown up; the row carries no estimate.
    bool flagged = false;
    /// Exit times of exited samples in trajectory order.
    std::vector<double> taus;

    double censored_fraction() const noexcept {
        const auto n = n_exited + n_censored + n_blowup;
        return n == 0 ? 0.0 : static_cast<double>(n_censored) / static_cast<double>(n);
    }
};

/// Row r, sample i uses trajectory index r * n_samples + i, so results do not depend on the
/// number of workers.  CI: 95% percentile bootstrap (1000 resamples) from a fixed stream.
std::vector<ExitStats> exit_time_expectation(const ExitConfig& cfg);

struct ExitScanOptions {
    /// Also compute U_delta at the boundary minimizer radius * e_min and use it as the target.
    bool delta_corrected_target = false;
    double target_dt = 2e-3;
    int slope_resamples = 1000;
};

struct ExitRegression {
    std::vector<ExitStats> rows;
    /// Rows entering the fit (at least two exited samples).
    std::vector<std::size_t> used_rows;
    /// log(mean_tau) = intercept + slope / eps.
    double slope = 0.0;
    double intercept = 0.0;
    std::array<double, 2> slope_ci{};
    /// lambda_min * radius^2.
    double target_lambda = 0.0;
    /// Minimized action at radius * e_min (NaN unless requested).
    double target_delta = 0.0;
    double target = 0.0;
    double rel_dev = 0.0;
};

/// Runs exit_time_expectation and fits log(mean_tau) against 1 / eps.  Throws ValidationError
/// with fewer than three usable rows.
ExitRegression exit_rate_scan(const ExitConfig& cfg, const ExitScanOptions& options = {});

/// Fit only, for precomputed rows (same stream layout as exit_rate_scan).
ExitRegression fit_exit_rows(std::vector<ExitStats> rows, const ExitConfig& cfg, const ExitScanOptions& options = {});

std::string exit_csv_header();
std::string exit_csv_row(const ExitStats& s);

}  // namespace nsqp
