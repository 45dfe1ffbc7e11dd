#include "crestcap/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace crestcap {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

UnitaryFft::UnitaryFft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("UnitaryFft: zero length");
    buf_in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
    buf_out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf_in_ || !buf_out_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf_in_),
                                 reinterpret_cast<fftw_complex*>(buf_out_), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf_in_),
                                 reinterpret_cast<fftw_complex*>(buf_out_), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("UnitaryFft: fftw plan failed");
}

UnitaryFft::~UnitaryFft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_in_);
    fftw_free(buf_out_);
}

std::vector<std::complex<double>> UnitaryFft::forward(const std::vector<double>& x) {
    if (x.size() != n_) throw std::invalid_argument("UnitaryFft::forward: length mismatch");
    for (std::size_t i = 0; i < n_; ++i) buf_in_[i] = {x[i], 0.0};
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    std::vector<std::complex<double>> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_out_[i] * scale;
    return out;
}

std::vector<double> UnitaryFft::inverse_real(const std::vector<std::complex<double>>& spectrum) {
    if (spectrum.size() != n_) throw std::invalid_argument("UnitaryFft::inverse_real: length mismatch");
    for (std::size_t i = 0; i < n_; ++i) buf_in_[i] = spectrum[i];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = buf_out_[i].real() * scale;
    return out;
}

}  // namespace crestcap
