#include "crestcap/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "crestcap/resample.hpp"

namespace crestcap {

namespace {

constexpr double kMeterRateHz = 48000.0;
constexpr std::size_t kBlockLen = 19200;  // 400 ms at 48 kHz
constexpr std::size_t kBlockHop = 4800;   // 75% overlap
constexpr double kAbsoluteGateLufs = -70.0;
constexpr double kLoudnessOffset = -0.691;

struct Biquad {
    double b0, b1, b2, a1, a2;
    double z1 = 0.0, z2 = 0.0;
    double step(double x) {
        const double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
};

// BS.1770 K-weighting, coefficients specified at 48 kHz
Biquad shelf_stage() {
    return {1.53512485958697, -2.69169618940638, 1.19839281085285,
            -1.69065929318241, 0.73248077421585};
}
Biquad highpass_stage() {
    return {1.0, -2.0, 1.0, -1.99004745483398, 0.99007225036621};
}

std::vector<double> block_mean_squares(const Signal& x) {
    Signal at48 = std::abs(x.sample_rate_hz - kMeterRateHz) < 1e-9 * kMeterRateHz
                      ? x
                      : resample(x, kMeterRateHz);
    Biquad stage1 = shelf_stage();
    Biquad stage2 = highpass_stage();
    std::vector<double> weighted(at48.samples.size());
    for (std::size_t i = 0; i < weighted.size(); ++i)
        weighted[i] = stage2.step(stage1.step(at48.samples[i]));

    std::vector<double> ms;
    if (weighted.size() < kBlockLen) return ms;
    for (std::size_t start = 0; start + kBlockLen <= weighted.size(); start += kBlockHop) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + kBlockLen; ++i) acc += weighted[i] * weighted[i];
        ms.push_back(acc / static_cast<double>(kBlockLen));
    }
    return ms;
}

double loudness_of_mean_square(double ms) { return kLoudnessOffset + 10.0 * std::log10(ms); }

}  // namespace

double crest_factor_db(const Signal& x) {
    const double peak = peak_abs(x);
    if (peak == 0.0) throw std::invalid_argument("crest_factor: signal is identically zero");
    return 10.0 * std::log10(peak / l2_norm(x));
}

double peak_decrease_pct(const Signal& x0, const Signal& x) {
    const double p0 = peak_abs(x0);
    if (p0 == 0.0) throw std::invalid_argument("peak_decrease_pct: reference is identically zero");
    return 100.0 * ((p0 - peak_abs(x)) / p0);
}

std::optional<double> integrated_loudness_lufs(const Signal& x) {
    const auto ms = block_mean_squares(x);

    double abs_sum = 0.0;
    std::size_t abs_count = 0;
    for (double z : ms) {
        if (z > 0.0 && loudness_of_mean_square(z) > kAbsoluteGateLufs) {
            abs_sum += z;
            ++abs_count;
        }
    }
    if (abs_count == 0) return std::nullopt;

    const double relative_gate =
        loudness_of_mean_square(abs_sum / static_cast<double>(abs_count)) - 10.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (double z : ms) {
        if (z <= 0.0) continue;
        const double l = loudness_of_mean_square(z);
        if (l > kAbsoluteGateLufs && l > relative_gate) {
            sum += z;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return loudness_of_mean_square(sum / static_cast<double>(count));
}

double loudness_match_gain(const Signal& reference, const Signal& candidate) {
    const auto ref_l = integrated_loudness_lufs(reference);
    if (!ref_l) throw std::invalid_argument("loudness_match_gain: reference loudness undefined");
    auto cand_l = integrated_loudness_lufs(candidate);
    if (!cand_l) throw std::invalid_argument("loudness_match_gain: candidate loudness undefined");

    constexpr double kToleranceLu = 0.05;
    constexpr int kMaxRefinements = 5;
    double gain = std::pow(10.0, (*ref_l - *cand_l) / 20.0);
    Signal scaled = candidate;
    for (int it = 0; it <= kMaxRefinements; ++it) {
        for (std::size_t i = 0; i < scaled.samples.size(); ++i)
            scaled.samples[i] = candidate.samples[i] * gain;
        const auto l = integrated_loudness_lufs(scaled);
        if (!l)
            throw std::runtime_error("loudness_match_gain: candidate fully gated at matched gain");
        if (std::abs(*l - *ref_l) <= kToleranceLu) return gain;
        if (it == kMaxRefinements) break;
        gain *= std::pow(10.0, (*ref_l - *l) / 20.0);
    }
    throw std::runtime_error("loudness_match_gain: did not settle within 5 refinements");
}

}  // namespace crestcap
