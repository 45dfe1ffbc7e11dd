#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace crestcap {

/// Unitary DFT of a fixed length (forward and inverse both scaled by
/// 1/sqrt(N), so Parseval holds with no extra factors). Not thread-safe per
/// instance; plan creation is serialized internally.
class UnitaryFft {
public:
    explicit UnitaryFft(std::size_t n);
    ~UnitaryFft();
    UnitaryFft(const UnitaryFft&) = delete;
    UnitaryFft& operator=(const UnitaryFft&) = delete;

    std::size_t size() const { return n_; }

    std::vector<std::complex<double>> forward(const std::vector<double>& x);
    /// Inverse transform keeping only the real part (the imaginary residue of
    /// conjugate-symmetric spectra is rounding noise).
    std::vector<double> inverse_real(const std::vector<std::complex<double>>& spectrum);

private:
    std::size_t n_;
    void* plan_fwd_;
    void* plan_bwd_;
    std::complex<double>* buf_in_;
    std::complex<double>* buf_out_;
};

}  // namespace crestcap
