#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crestcap/signal.hpp"

namespace crestcap {

/// Sampled magnitude responses of ERB-spaced 4th-order gammatone filters,
/// each multiplied by the outer/middle-ear transfer gain, on the N DFT bin
/// frequencies of a given sample rate.
struct GammatoneBank {
    double sample_rate_hz = 0.0;
    std::size_t transform_len = 0;
    std::vector<double> center_freqs_hz;  // strictly increasing
    std::vector<double> responses;        // n_filters x transform_len, row-major

    std::size_t n_filters() const { return center_freqs_hz.size(); }
    double response(std::size_t filt, std::size_t bin) const {
        return responses[filt * transform_len + bin];
    }
};

/// Model constants: c_s scales detectability, c_a sets the absolute
/// (quiet-threshold) floor, and spl_reference_db is the SPL assigned to an
/// RMS of 1.0 at digital full scale.
struct CalibrationConstants {
    double c_s = 0.0;
    double c_a = 0.0;
    double spl_reference_db = 100.0;

    static CalibrationConstants defaults();
};

/// Per-DFT-bin nonnegative weights derived from a masker. Conjugate
/// symmetric across bins for real maskers.
struct PerceptualWeights {
    std::vector<double> weights;
    std::uint64_t masker_fingerprint = 0;
};

double erb_bandwidth_hz(double f_hz);
double erb_scale(double f_hz);
double erb_scale_inv(double erbs);

/// 4th-order all-pole gammatone magnitude at f_hz for a filter centered at
/// center_hz.
double gammatone_magnitude(double f_hz, double center_hz);

/// Outer/middle-ear transfer in dB (the negated threshold-in-quiet
/// approximation, so low and very high frequencies get strongly attenuated).
double ear_gain_db(double f_hz);

GammatoneBank build_bank(double sample_rate_hz, std::size_t n, std::size_t n_filters,
                         double f_min_hz = 30.0);

/// Diagonal spectral weights for distortion heard against `masker`. Bins
/// below lowfreq_override_hz are forced to 10 x the largest regular weight
/// so optimizers cannot hide energy where playback systems do not reach.
/// Pass 0 to disable the override.
PerceptualWeights perceptual_weights(const Signal& masker, const GammatoneBank& bank,
                                     const CalibrationConstants& calib,
                                     double lowfreq_override_hz = 30.0);

/// Detectability of `error` against `masker`: the squared weighted spectral
/// norm || P w^ ||^2; 1.0 marks the just-detectable threshold once the
/// constants are calibrated.
double detectability(const Signal& masker, const Signal& error, const GammatoneBank& bank,
                     const CalibrationConstants& calib, double lowfreq_override_hz = 30.0);

struct QuietAnchor {
    double tone_hz = 1000.0;
    double threshold_db_spl = 3.0;
};

struct MaskedAnchor {
    double masker_hz = 1000.0;
    double masker_db_spl = 70.0;
    double probe_hz = 1200.0;
    double probe_db_spl = 52.0;
};

/// Solve for (c_s, c_a) so that both anchor conditions sit exactly at
/// detectability 1. The quiet anchor pins the ratio c_s/c_a; the masked
/// anchor then pins the absolute scale. Throws when the anchors admit no
/// positive solution.
CalibrationConstants calibrate(const GammatoneBank& bank, const QuietAnchor& quiet,
                               const MaskedAnchor& masked, double spl_reference_db = 100.0);

}  // namespace crestcap
