#include "crestcap/drc.hpp"

#include <cmath>
#include <stdexcept>

namespace crestcap {

namespace {

constexpr double kSilenceFloorLin = 1e-6;  // -120 dBFS

void check_params(const DrcParams& p) {
    if (!(p.ratio >= 1.0)) throw std::invalid_argument("drc: ratio must be >= 1");
    if (p.knee_db < 0.0) throw std::invalid_argument("drc: knee width must be >= 0");
    if (p.attack_s < 0.0 || p.release_s < 0.0)
        throw std::invalid_argument("drc: attack/release must be >= 0");
}

double level_db(double sample) {
    const double mag = std::abs(sample);
    return 20.0 * std::log10(mag < kSilenceFloorLin ? kSilenceFloorLin : mag);
}

}  // namespace

double drc_gain_curve(double input_level_db, const DrcParams& params) {
    check_params(params);
    const double x = input_level_db;
    const double t = params.threshold_db;
    const double r = params.ratio;
    const double w = params.knee_db;
    if (w <= 0.0)
        return x <= t ? x : t + (x - t) / r;
    const double two_over = 2.0 * (x - t);
    if (two_over < -w) return x;
    if (two_over <= w) {
        const double e = x - t + w / 2.0;
        return x + (1.0 / r - 1.0) * e * e / (2.0 * w);
    }
    return t + (x - t) / r;
}

Signal drc_process(const Signal& x, const DrcParams& params) {
    check_params(params);
    const double fs = x.sample_rate_hz;
    const double alpha_attack =
        params.attack_s > 0.0 ? std::exp(-1.0 / (params.attack_s * fs)) : 0.0;
    const double alpha_release =
        params.release_s > 0.0 ? std::exp(-1.0 / (params.release_s * fs)) : 0.0;

    std::vector<double> out(x.samples.size());
    double gain_db = 0.0;  // smoothed gain reduction, always <= 0
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double in_db = level_db(x.samples[i]);
        const double target_db = drc_gain_curve(in_db, params) - in_db;
        const double alpha = target_db < gain_db ? alpha_attack : alpha_release;
        gain_db = alpha * gain_db + (1.0 - alpha) * target_db;
        const double total_db = gain_db + params.makeup_db;
        const double gain = total_db == 0.0 ? 1.0 : std::pow(10.0, total_db / 20.0);
        out[i] = x.samples[i] * gain;
    }
    return Signal(std::move(out), x.sample_rate_hz);
}

Signal soft_clip(const Signal& x, double threshold_db) {
    DrcParams p;
    p.threshold_db = threshold_db;
    p.ratio = 50.0;
    p.knee_db = 20.0;
    p.attack_s = 0.0;
    p.release_s = 0.0;
    p.makeup_db = 0.0;
    return drc_process(x, p);
}

}  // namespace crestcap
