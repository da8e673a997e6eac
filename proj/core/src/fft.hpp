#pragma once

#include <complex>
#include <vector>

namespace nsqp::detail {

/// Unnormalized complex 2D transforms of one N x N grid.
///
/// Plans are created with FFTW_ESTIMATE so results do not depend on run-time measurement.
/// Execution goes through the new-array interface and is safe from several threads.
class FftPlans {
public:
    explicit FftPlans(int n);
    ~FftPlans();
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    /// out[x] = sum_k in[k] exp(+2 pi i k.x / N)
    void to_physical(const std::complex<double>* in, std::complex<double>* out) const;
    /// out[k] = sum_x in[x] exp(-2 pi i k.x / N)  (no 1/N^2 factor)
    void to_spectral(const std::complex<double>* in, std::complex<double>* out) const;

private:
    void* backward_ = nullptr;
    void* forward_ = nullptr;
};

/// Per-thread scratch buffer of at least `size` complex values; `slot` picks one of several.
std::complex<double>* scratch(int slot, std::size_t size);

}  // namespace nsqp::detail
