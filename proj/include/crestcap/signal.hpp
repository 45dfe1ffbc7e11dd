#pragma once

#include <cstddef>
#include <vector>

namespace crestcap {

/// Uniformly sampled mono audio clip. Amplitude 1.0 is digital full scale
/// (0 dBFS) everywhere in this library.
struct Signal {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;

    Signal() = default;
    Signal(std::vector<double> samples_in, double sample_rate_hz_in);

    std::size_t size() const { return samples.size(); }
    double duration_s() const;
};

/// max |x[n]|
double peak_abs(const Signal& x);
/// unnormalized l2 norm, sqrt(sum x^2)
double l2_norm(const Signal& x);

/// Periodically extend (or cut) the clip to the requested duration:
/// out[k] = in[k mod N], length = round(duration_s * sample_rate).
Signal replicate_truncate(const Signal& x, double duration_s);

/// Scale so that the absolute peak equals target_peak exactly.
/// Throws for an identically-zero input (the gain is undefined).
Signal reamplify_to_peak(const Signal& x, double target_peak);

}  // namespace crestcap
