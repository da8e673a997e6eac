#include "nsqp/statistics.hpp"

#include <algorithm>
#include <boost/math/statistics/linear_regression.hpp>
#include <cmath>

#include "nsqp/error.hpp"
#include "nsqp/rng.hpp"

namespace nsqp {

double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double pairwise_mean(std::span<const double> x) {
    if (x.empty()) throw ValidationError("mean of an empty sample");
    return pairwise_sum(x) / static_cast<double>(x.size());
}

double quantile(std::span<const double> x, double p) {
    if (x.empty()) throw ValidationError("quantile of an empty sample");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double h = std::clamp(p, 0.0, 1.0) * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

LineFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("line fit needs two or more (x, y) pairs");
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
        throw ValidationError("line fit needs at least two distinct x values");
    }
    const std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
    const auto [c0, c1] = boost::math::statistics::simple_ordinary_least_squares(xs, ys);
    return {c0, c1};
}

std::array<double, 2> bootstrap_mean_ci(std::span<const double> x, std::uint64_t seed, std::uint64_t stream,
                                        int resamples) {
    if (x.empty()) throw ValidationError("bootstrap of an empty sample");
    if (resamples < 2) throw ValidationError("bootstrap needs at least two resamples");
    PhiloxStream rng(seed, stream);
    std::vector<double> means(static_cast<std::size_t>(resamples)), draw(x.size());
    for (double& m : means) {
        for (double& d : draw) d = x[rng.index(x.size())];
        m = pairwise_mean(draw);
    }
    return {quantile(means, 0.025), quantile(means, 0.975)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("KS test needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    // Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
    double p = 0.0;
    if (lambda < 0.2) {
        p = 1.0;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::abs(term) < 1e-16) break;
        }
        p = std::clamp(p, 0.0, 1.0);
    }
    return {d, p};
}

}  // namespace nsqp
