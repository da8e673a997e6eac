#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nsqp {

/// Pairwise (cascade) summation; the result depends only on the order of `x`.
double pairwise_sum(std::span<const double> x);
double pairwise_mean(std::span<const double> x);

/// Linear-interpolated empirical quantile (type 7), p in [0, 1].  Sorts a copy.
double quantile(std::span<const double> x, double p);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Ordinary least squares y = intercept + slope x.  Needs at least two distinct x.
LineFit ols_fit(std::span<const double> x, std::span<const double> y);

/// 95% percentile-bootstrap interval of the mean with `resamples` draws from the stream
/// (seed, stream).
std::array<double, 2> bootstrap_mean_ci(std::span<const double> x, std::uint64_t seed, std::uint64_t stream,
                                        int resamples = 1000);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic (Stephens-corrected) p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace nsqp
