#include "nsqp/spectral_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "nsqp/error.hpp"

namespace nsqp {

namespace {

int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

int wrap(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

SpectralGrid::SpectralGrid(double length, int modes, GridOptions options)
    : length_(length), n_(modes), options_(std::move(options)) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ValidationError("grid length must be positive and finite, got " + std::to_string(length));
    }
    if (modes < 4 || modes % 2 != 0) {
        throw ValidationError("modes per dimension must be even and >= 4, got " + std::to_string(modes));
    }
    wave_ = 2.0 * std::numbers::pi / length_;
    // Largest K with 3K < N: products of two masked modes reach 2K and alias to 2K - N,
    // which then falls strictly outside the mask.
    dealias_limit_ = options_.dealias ? (n_ - 1) / 3 : n_ / 2 - 1;

    const std::size_t total = size();
    kx_.resize(total);
    ky_.resize(total);
    lambda_.resize(total);
    dealias_mask_.assign(total, 0);
    retained_mask_.assign(total, 0);
    partner_.resize(total);
    for (int iy = 0; iy < n_; ++iy) {
        for (int ix = 0; ix < n_; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * n_ + ix;
            const int kx = wavenumber(ix, n_);
            const int ky = wavenumber(iy, n_);
            kx_[i] = kx;
            ky_[i] = ky;
            lambda_[i] = wave_ * wave_ * static_cast<double>(kx * kx + ky * ky);
            partner_[i] = static_cast<std::size_t>(wrap(-ky, n_)) * n_ + wrap(-kx, n_);
            const bool nonzero = kx != 0 || ky != 0;
            const bool inside = std::abs(kx) <= dealias_limit_ && std::abs(ky) <= dealias_limit_;
            dealias_mask_[i] = (nonzero && inside) ? 1 : 0;
        }
    }

    if (options_.modes.empty()) {
        retained_mask_ = dealias_mask_;
    } else {
        for (const auto& k : options_.modes) {
            if (k[0] == 0 && k[1] == 0) throw ValidationError("truncation cannot retain the zero mode");
            if (std::abs(k[0]) > dealias_limit_ || std::abs(k[1]) > dealias_limit_) {
                throw ValidationError("truncation mode (" + std::to_string(k[0]) + "," + std::to_string(k[1]) +
                                      ") lies outside the dealiasing mask |k_i| <= " +
                                      std::to_string(dealias_limit_));
            }
            const std::size_t i = index_of(k[0], k[1]);
            retained_mask_[i] = 1;
            retained_mask_[partner_[i]] = 1;
        }
    }

    lambda_min_ = std::numeric_limits<double>::infinity();
    lambda_max_ = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        if (!retained_mask_[i]) continue;
        retained_.push_back(i);
        lambda_min_ = std::min(lambda_min_, lambda_[i]);
        lambda_max_ = std::max(lambda_max_, lambda_[i]);
        if (ky_[i] > 0 || (ky_[i] == 0 && kx_[i] > 0)) half_plane_.push_back(i);
    }
    if (retained_.empty()) throw ValidationError("grid retains no modes");

    if (options_.backend == NonlinearBackend::triad) {
        for (std::size_t p : retained_) {
            for (std::size_t q : retained_) {
                const int kx = kx_[p] + kx_[q];
                const int ky = ky_[p] + ky_[q];
                if (std::abs(kx) > dealias_limit_ || std::abs(ky) > dealias_limit_) continue;
                if (kx == 0 && ky == 0) continue;
                const std::size_t k = index_of(kx, ky);
                if (retained_mask_[k]) triads_.push_back({k, p, q});
            }
        }
    }

    fft_ = std::make_unique<detail::FftPlans>(n_);
}

SpectralGrid::~SpectralGrid() = default;

std::size_t SpectralGrid::index_of(int kx, int ky) const {
    if (kx <= -n_ / 2 || kx > n_ / 2 || ky <= -n_ / 2 || ky > n_ / 2) {
        throw ValidationError("wavevector (" + std::to_string(kx) + "," + std::to_string(ky) +
                              ") is not on the lattice");
    }
    return static_cast<std::size_t>(wrap(ky, n_)) * n_ + wrap(kx, n_);
}

bool SpectralGrid::same_as(const SpectralGrid& other) const noexcept {
    return this == &other ||
           (length_ == other.length_ && n_ == other.n_ && options_ == other.options_);
}

GridPtr make_grid(double length, int modes, GridOptions options) {
    return std::make_shared<const SpectralGrid>(length, modes, std::move(options));
}

}  // namespace nsqp
