#include "fft.hpp"

#include <fftw3.h>

#include <array>
#include <mutex>
#include <stdexcept>

namespace nsqp::detail {

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

FftPlans::FftPlans(int n) {
    std::vector<fftw_complex> a(static_cast<std::size_t>(n) * n), b(a.size());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    backward_ = fftw_plan_dft_2d(n, n, a.data(), b.data(), FFTW_BACKWARD, flags);
    forward_ = fftw_plan_dft_2d(n, n, a.data(), b.data(), FFTW_FORWARD, flags);
    if (backward_ == nullptr || forward_ == nullptr) {
        throw std::runtime_error("FFTW plan creation failed");
    }
}

FftPlans::~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(backward_));
    fftw_destroy_plan(static_cast<fftw_plan>(forward_));
}

void FftPlans::to_physical(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(backward_),
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void FftPlans::to_spectral(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(forward_),
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

std::complex<double>* scratch(int slot, std::size_t size) {
    thread_local std::array<std::vector<std::complex<double>>, 8> buffers;
    auto& buf = buffers.at(static_cast<std::size_t>(slot));
    if (buf.size() < size) buf.resize(size);
    return buf.data();
}

}  // namespace nsqp::detail
