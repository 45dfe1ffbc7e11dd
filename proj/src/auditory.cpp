#include "crestcap/auditory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "crestcap/fft.hpp"

namespace crestcap {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

double bin_freq_abs_hz(std::size_t k, std::size_t n, double fs) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    return (2 * k <= n) ? f : fs - f;
}

// raw Eq.-style weights with no low-frequency override
std::vector<double> raw_weights(const std::vector<std::complex<double>>& masker_spectrum_spl,
                                const GammatoneBank& bank, const CalibrationConstants& calib) {
    const std::size_t n = bank.transform_len;
    const std::size_t nf = bank.n_filters();
    std::vector<double> w_sq(n, 0.0);
    for (std::size_t i = 0; i < nf; ++i) {
        const double* row = bank.responses.data() + i * n;
        double masked_energy = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            masked_energy += row[k] * row[k] * std::norm(masker_spectrum_spl[k]);
        const double denom = masked_energy + calib.c_a;
        for (std::size_t k = 0; k < n; ++k) w_sq[k] += calib.c_s * row[k] * row[k] / denom;
    }
    for (double& v : w_sq) v = std::sqrt(v);
    return w_sq;
}

void check_masker(const Signal& masker, const GammatoneBank& bank) {
    if (masker.samples.size() != bank.transform_len)
        throw std::invalid_argument("perceptual_weights: masker length differs from bank transform length");
    if (std::abs(masker.sample_rate_hz - bank.sample_rate_hz) > 1e-6 * bank.sample_rate_hz)
        throw std::invalid_argument("perceptual_weights: masker sample rate differs from bank rate");
}

}  // namespace

CalibrationConstants CalibrationConstants::defaults() {
    // calibrate() run on the default anchors against a 64-filter bank at
    // 48 kHz / N = 8192 with the 100 dB SPL full-scale reference; regenerate
    // with the `calibrate` CLI subcommand if the anchors change
    CalibrationConstants c;
    c.c_s = 2052599849.1095767;
    c.c_a = 2369.9087000166251;
    c.spl_reference_db = 100.0;
    return c;
}

double erb_bandwidth_hz(double f_hz) { return 24.7 * (4.37 * f_hz / 1000.0 + 1.0); }

double erb_scale(double f_hz) { return 21.4 * std::log10(4.37 * f_hz / 1000.0 + 1.0); }

double erb_scale_inv(double erbs) {
    return (std::pow(10.0, erbs / 21.4) - 1.0) * 1000.0 / 4.37;
}

double gammatone_magnitude(double f_hz, double center_hz) {
    const double u = (f_hz - center_hz) / (1.019 * erb_bandwidth_hz(center_hz));
    const double d = 1.0 + u * u;
    return 1.0 / (d * d);
}

double ear_gain_db(double f_hz) {
    if (f_hz <= 0.0) return -std::numeric_limits<double>::infinity();
    const double khz = f_hz / 1000.0;
    return -3.64 * std::pow(khz, -0.8) + 6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) -
           1e-3 * khz * khz * khz * khz;
}

GammatoneBank build_bank(double sample_rate_hz, std::size_t n, std::size_t n_filters,
                         double f_min_hz) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("build_bank: sample rate must be positive");
    if (n_filters < 2) throw std::invalid_argument("build_bank: need at least 2 filters");
    if (n_filters > n / 2)
        throw std::invalid_argument("build_bank: more filters than available spectrum bins");
    if (n > (std::size_t{1} << 25) / n_filters)
        throw std::invalid_argument(
            "build_bank: transform length too large for a dense bank; resample or trim the "
            "clip first");
    const double nyquist = sample_rate_hz / 2.0;
    const double f_max = 0.95 * nyquist;
    if (!(f_min_hz > 0.0) || f_min_hz >= f_max)
        throw std::invalid_argument("build_bank: bad center frequency range");

    GammatoneBank bank;
    bank.sample_rate_hz = sample_rate_hz;
    bank.transform_len = n;
    bank.center_freqs_hz.resize(n_filters);
    const double e_lo = erb_scale(f_min_hz);
    const double e_hi = erb_scale(f_max);
    for (std::size_t i = 0; i < n_filters; ++i) {
        const double e = e_lo + (e_hi - e_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_filters - 1);
        bank.center_freqs_hz[i] = erb_scale_inv(e);
    }

    bank.responses.resize(n_filters * n);
    for (std::size_t i = 0; i < n_filters; ++i) {
        const double fc = bank.center_freqs_hz[i];
        for (std::size_t k = 0; k < n; ++k) {
            const double f = bin_freq_abs_hz(k, n, sample_rate_hz);
            const double ear_db = ear_gain_db(f);
            const double ear = std::isfinite(ear_db) ? std::pow(10.0, ear_db / 20.0) : 0.0;
            bank.responses[i * n + k] = gammatone_magnitude(f, fc) * ear;
        }
    }
    return bank;
}

PerceptualWeights perceptual_weights(const Signal& masker, const GammatoneBank& bank,
                                     const CalibrationConstants& calib,
                                     double lowfreq_override_hz) {
    check_masker(masker, bank);
    if (!(calib.c_s > 0.0) || !(calib.c_a > 0.0))
        throw std::invalid_argument("perceptual_weights: calibration constants must be positive");
    if (lowfreq_override_hz < 0.0)
        throw std::invalid_argument("perceptual_weights: negative override cutoff");

    const std::size_t n = bank.transform_len;
    UnitaryFft fft(n);
    auto spectrum = fft.forward(masker.samples);
    const double spl_scale = std::pow(10.0, calib.spl_reference_db / 20.0);
    for (auto& v : spectrum) v *= spl_scale;

    PerceptualWeights pw;
    pw.weights = raw_weights(spectrum, bank, calib);

    if (lowfreq_override_hz > 0.0) {
        double w_max = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (bin_freq_abs_hz(k, n, bank.sample_rate_hz) >= lowfreq_override_hz)
                w_max = std::max(w_max, pw.weights[k]);
        const double w_override = 10.0 * w_max;
        for (std::size_t k = 0; k < n; ++k)
            if (bin_freq_abs_hz(k, n, bank.sample_rate_hz) < lowfreq_override_hz)
                pw.weights[k] = w_override;
    }

    pw.masker_fingerprint =
        fnv1a(masker.samples.data(), masker.samples.size() * sizeof(double),
              fnv1a(&masker.sample_rate_hz, sizeof(double), 0xcbf29ce484222325ULL));
    return pw;
}

double detectability(const Signal& masker, const Signal& error, const GammatoneBank& bank,
                     const CalibrationConstants& calib, double lowfreq_override_hz) {
    if (error.samples.size() != masker.samples.size())
        throw std::invalid_argument("detectability: masker and error lengths differ");
    if (std::abs(error.sample_rate_hz - masker.sample_rate_hz) > 1e-6 * masker.sample_rate_hz)
        throw std::invalid_argument("detectability: masker and error sample rates differ");
    const PerceptualWeights pw = perceptual_weights(masker, bank, calib, lowfreq_override_hz);
    UnitaryFft fft(bank.transform_len);
    const auto err_spectrum = fft.forward(error.samples);
    double d = 0.0;
    for (std::size_t k = 0; k < pw.weights.size(); ++k)
        d += pw.weights[k] * pw.weights[k] * std::norm(err_spectrum[k]);
    return d;
}

CalibrationConstants calibrate(const GammatoneBank& bank, const QuietAnchor& quiet,
                               const MaskedAnchor& masked, double spl_reference_db) {
    const std::size_t n = bank.transform_len;
    const double fs = bank.sample_rate_hz;
    const std::size_t nf = bank.n_filters();

    auto snapped_bin = [&](double f_hz, const char* what) {
        const auto k = static_cast<std::size_t>(std::llround(f_hz * static_cast<double>(n) / fs));
        if (k < 1 || 2 * k >= n)
            throw std::invalid_argument(std::string("calibrate: ") + what +
                                        " frequency outside the transform's range");
        return k;
    };
    auto tone = [&](std::size_t bin, double level_db_spl) {
        // RMS convention: a sine at level L dB SPL has digital amplitude
        // sqrt(2) * 10^((L - ref)/20)
        const double amp = std::sqrt(2.0) * std::pow(10.0, (level_db_spl - spl_reference_db) / 20.0);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i)
            s[i] = amp * std::sin(2.0 * M_PI * static_cast<double>(bin) * static_cast<double>(i) /
                                  static_cast<double>(n));
        return s;
    };

    UnitaryFft fft(n);
    const auto quiet_probe = fft.forward(tone(snapped_bin(quiet.tone_hz, "quiet tone"),
                                              quiet.threshold_db_spl));
    const auto masked_probe = fft.forward(tone(snapped_bin(masked.probe_hz, "masked probe"),
                                               masked.probe_db_spl));
    auto masker_spec = fft.forward(tone(snapped_bin(masked.masker_hz, "masker"),
                                        masked.masker_db_spl));
    const double spl_scale = std::pow(10.0, spl_reference_db / 20.0);
    for (auto& v : masker_spec) v *= spl_scale;

    // D_quiet = (c_s/c_a) * quiet_energy; D_masked = c_s * sum_i E_i/(M_i + c_a)
    double quiet_energy = 0.0;
    std::vector<double> probe_energy(nf, 0.0), masker_energy(nf, 0.0);
    for (std::size_t i = 0; i < nf; ++i) {
        const double* row = bank.responses.data() + i * n;
        for (std::size_t k = 0; k < n; ++k) {
            const double r2 = row[k] * row[k];
            quiet_energy += r2 * std::norm(quiet_probe[k]);
            probe_energy[i] += r2 * std::norm(masked_probe[k]);
            masker_energy[i] += r2 * std::norm(masker_spec[k]);
        }
    }
    if (!(quiet_energy > 0.0))
        throw std::invalid_argument("calibrate: quiet probe carries no energy through the bank");

    double probe_total = 0.0;
    for (double e : probe_energy) probe_total += e;
    if (!(probe_total > quiet_energy))
        throw std::invalid_argument(
            "calibrate: anchors admit no positive solution (masked probe is weaker than the "
            "quiet anchor through the bank)");

    // f(c_a) = (c_a / quiet_energy) * sum_i E_i/(M_i + c_a) is strictly
    // increasing from 0 toward probe_total/quiet_energy > 1; bisect for the
    // root of f = 1 in log space
    auto masked_d = [&](double c_a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < nf; ++i) acc += probe_energy[i] / (masker_energy[i] + c_a);
        return c_a / quiet_energy * acc;
    };
    double lo_exp = -60.0, hi_exp = 60.0;
    while (masked_d(std::pow(10.0, lo_exp)) > 1.0 && lo_exp > -300.0) lo_exp -= 60.0;
    while (masked_d(std::pow(10.0, hi_exp)) < 1.0 && hi_exp < 300.0) hi_exp += 60.0;
    if (masked_d(std::pow(10.0, lo_exp)) > 1.0 || masked_d(std::pow(10.0, hi_exp)) < 1.0)
        throw std::invalid_argument("calibrate: anchors admit no positive solution");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo_exp + hi_exp);
        (masked_d(std::pow(10.0, mid)) < 1.0 ? lo_exp : hi_exp) = mid;
    }

    CalibrationConstants out;
    out.c_a = std::pow(10.0, 0.5 * (lo_exp + hi_exp));
    out.c_s = out.c_a / quiet_energy;
    out.spl_reference_db = spl_reference_db;
    return out;
}

}  // namespace crestcap
