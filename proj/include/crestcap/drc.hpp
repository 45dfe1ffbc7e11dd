#pragma once

#include "crestcap/signal.hpp"

namespace crestcap {

struct DrcParams {
    double threshold_db = -10.0;  // dBFS
    double ratio = 8.0;           // >= 1
    double knee_db = 0.0;
    double attack_s = 0.0;
    double release_s = 0.5;
    double makeup_db = 0.0;
};

/// Static compressor characteristic (dB in -> dB out): unity below the knee,
/// quadratic interpolation inside it, slope 1/ratio above.
double drc_gain_curve(double input_level_db, const DrcParams& params);

/// Feed-forward compressor: instantaneous level detection in dB, gain
/// computer per drc_gain_curve, branching one-pole smoothing of the gain in
/// the log domain, makeup applied last. Zero attack applies gain reduction
/// instantaneously.
Signal drc_process(const Signal& x, const DrcParams& params);

/// Soft clipper realized as an extreme compressor: zero attack/release,
/// ratio 50, knee 20 dB.
Signal soft_clip(const Signal& x, double threshold_db);

}  // namespace crestcap
