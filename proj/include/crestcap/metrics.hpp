#pragma once

#include <optional>

#include "crestcap/signal.hpp"

namespace crestcap {

/// 10*log10(||x||inf / ||x||2) with the unnormalized l2 norm. Throws for an
/// identically-zero signal.
double crest_factor_db(const Signal& x);

/// 100 * (||x0||inf - ||x||inf) / ||x0||inf.
double peak_decrease_pct(const Signal& x0, const Signal& x);

/// BS.1770 integrated loudness of a mono signal: internal resampling to
/// 48 kHz, K-weighting, 400 ms blocks with 75% overlap, -70 LUFS absolute
/// gate then a -10 LU relative gate. Returns nullopt when every block is
/// gated (digital silence, or clips shorter than one block).
std::optional<double> integrated_loudness_lufs(const Signal& x);

/// Linear gain g such that g * candidate has the reference's integrated
/// loudness within 0.05 LU: closed-form dB offset plus at most 5 fixed-point
/// refinements (gating can shift under gain). Throws when either loudness is
/// undefined or the refinement does not settle.
double loudness_match_gain(const Signal& reference, const Signal& candidate);

/// One clip's evaluation summary; loudness is empty for fully gated input
/// and detectability is empty when no reference was supplied.
struct MetricsReport {
    double crest_factor_db = 0.0;
    double peak_abs = 0.0;
    double peak_decrease_pct = 0.0;
    std::optional<double> loudness_lufs;
    std::optional<double> detectability;
};

}  // namespace crestcap
