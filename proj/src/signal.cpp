#include "crestcap/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crestcap {

Signal::Signal(std::vector<double> samples_in, double sample_rate_hz_in)
    : samples(std::move(samples_in)), sample_rate_hz(sample_rate_hz_in) {
    if (samples.empty())
        throw std::invalid_argument("Signal: needs at least one sample");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
        throw std::invalid_argument("Signal: sample rate must be positive and finite");
    for (double v : samples)
        if (!std::isfinite(v))
            throw std::invalid_argument("Signal: non-finite sample");
}

double Signal::duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
}

double peak_abs(const Signal& x) {
    double peak = 0.0;
    for (double v : x.samples) peak = std::max(peak, std::abs(v));
    return peak;
}

double l2_norm(const Signal& x) {
    double acc = 0.0;
    for (double v : x.samples) acc += v * v;
    return std::sqrt(acc);
}

Signal replicate_truncate(const Signal& x, double duration_s) {
    if (x.samples.empty())
        throw std::invalid_argument("replicate_truncate: empty signal");
    if (!(duration_s > 0.0))
        throw std::invalid_argument("replicate_truncate: duration must be positive");
    const auto n_out = static_cast<std::size_t>(std::llround(duration_s * x.sample_rate_hz));
    if (n_out == 0)
        throw std::invalid_argument("replicate_truncate: requested duration rounds to zero samples");
    std::vector<double> out(n_out);
    const std::size_t n = x.samples.size();
    for (std::size_t k = 0; k < n_out; ++k) out[k] = x.samples[k % n];
    return Signal(std::move(out), x.sample_rate_hz);
}

Signal reamplify_to_peak(const Signal& x, double target_peak) {
    if (!(target_peak > 0.0))
        throw std::invalid_argument("reamplify_to_peak: target peak must be positive");
    const double peak = peak_abs(x);
    if (peak == 0.0)
        throw std::invalid_argument("reamplify_to_peak: signal is identically zero");
    const double gain = target_peak / peak;
    std::vector<double> out(x.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x.samples[i] * gain;
        // rounding must not push any sample past the target, and the former
        // peak sample must land on it exactly
        if (std::abs(out[i]) > target_peak || std::abs(x.samples[i]) == peak)
            out[i] = std::copysign(target_peak, x.samples[i]);
    }
    return Signal(std::move(out), x.sample_rate_hz);
}

}  // namespace crestcap
