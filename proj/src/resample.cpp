#include "crestcap/resample.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace crestcap {

namespace {

// Kaiser design for ~70 dB stopband, transition band 0.05 x the lower rate
// centered on 0.425 x the lower rate.
constexpr double kStopbandDb = 70.0;
constexpr double kCutoffFrac = 0.425;
constexpr double kTransitionFrac = 0.05;
constexpr std::int64_t kMaxUpsampleFactor = 4096;

double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

double sinc(double u) {
    if (std::abs(u) < 1e-12) return 1.0;
    const double pu = M_PI * u;
    return std::sin(pu) / pu;
}

// best rational approximation up/down of ratio with up <= cap, via
// continued-fraction convergents
void rational_ratio(double ratio, std::int64_t cap, std::int64_t& up, std::int64_t& down) {
    std::int64_t h2 = 0, k2 = 1;  // convergent n-2
    std::int64_t h1 = 1, k1 = 0;  // convergent n-1
    up = 1;
    down = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(1.0 / ratio)));
    double rest = ratio;
    for (int it = 0; it < 64; ++it) {
        const double a = std::floor(rest);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t h = ai * h1 + h2;
        const std::int64_t k = ai * k1 + k2;
        if (h > cap || h <= 0 || k < 0) break;
        if (k > 0) { up = h; down = k; }
        rest -= a;
        if (rest < 1e-12) break;
        rest = 1.0 / rest;
        h2 = h1; k2 = k1;
        h1 = h; k1 = k;
    }
    if (down <= 0) down = 1;
}

}  // namespace

Signal resample(const Signal& x, double target_rate_hz) {
    if (!(target_rate_hz > 0.0) || !std::isfinite(target_rate_hz))
        throw std::invalid_argument("resample: target rate must be positive and finite");
    const double source_rate = x.sample_rate_hz;
    const double ratio = target_rate_hz / source_rate;
    if (std::abs(ratio - 1.0) < 1e-12) {
        Signal out = x;
        out.sample_rate_hz = target_rate_hz;
        return out;
    }

    const std::size_t n_in = x.samples.size();
    const auto n_out =
        static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * ratio));
    if (n_out == 0)
        throw std::invalid_argument("resample: output would be empty");

    std::int64_t up, down;
    rational_ratio(ratio, kMaxUpsampleFactor, up, down);

    const double min_rate = std::min(source_rate, target_rate_hz);
    const double cutoff = kCutoffFrac * min_rate / source_rate;       // cycles per input sample
    const double transition = kTransitionFrac * min_rate / source_rate;
    const double beta = kaiser_beta(kStopbandDb);
    const auto half = static_cast<std::int64_t>(
        std::ceil(0.5 * (kStopbandDb - 7.95) / (14.36 * transition)));
    const std::int64_t taps = 2 * half + 1;

    // one kernel row per fractional phase p/up, each normalized to unit sum so
    // DC passes exactly
    const double i0_beta = std::cyl_bessel_i(0.0, beta);
    std::vector<double> table(static_cast<std::size_t>(up) * taps);
    for (std::int64_t p = 0; p < up; ++p) {
        const double frac = static_cast<double>(p) / static_cast<double>(up);
        double sum = 0.0;
        double* row = table.data() + p * taps;
        for (std::int64_t j = -half; j <= half; ++j) {
            const double t = static_cast<double>(j) - frac;
            const double w = std::abs(t) >= static_cast<double>(half)
                                 ? 0.0
                                 : std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - (t / half) * (t / half))) /
                                       i0_beta;
            const double v = 2.0 * cutoff * sinc(2.0 * cutoff * t) * w;
            row[j + half] = v;
            sum += v;
        }
        for (std::int64_t j = 0; j < taps; ++j) row[j] /= sum;
    }

    // input position of output m is m*down/up; this drifts from the true
    // ratio only when the rational approximation was capped
    std::vector<double> out(n_out, 0.0);
    std::int64_t base = 0, phase = 0;
    for (std::size_t m = 0; m < n_out; ++m) {
        const double* row = table.data() + phase * taps;
        double acc = 0.0;
        const std::int64_t lo = std::max<std::int64_t>(-half, -base);
        const std::int64_t hi = std::min<std::int64_t>(half, static_cast<std::int64_t>(n_in) - 1 - base);
        for (std::int64_t j = lo; j <= hi; ++j)
            acc += row[j + half] * x.samples[static_cast<std::size_t>(base + j)];
        out[m] = acc;
        phase += down;
        base += phase / up;
        phase %= up;
    }
    return Signal(std::move(out), target_rate_hz);
}

}  // namespace crestcap
