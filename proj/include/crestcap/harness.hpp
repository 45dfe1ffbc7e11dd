#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crestcap/auditory.hpp"
#include "crestcap/drc.hpp"
#include "crestcap/signal.hpp"
#include "crestcap/solvers.hpp"

namespace crestcap {

enum class Method { min_peak, min_detect, hard_clip, soft_clip, drc };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

/// How sweep grid values map to per-clip parameters. In `relative` mode a
/// grid value v means: v x the clip's weighted-norm ceiling for min_peak,
/// v x the clip's peak for the clip thresholds (converted to dB for
/// soft_clip/drc). In `absolute` mode grid values are used verbatim
/// (c, lambda, or threshold dB).
enum class GridScale { relative, absolute };

GridScale grid_scale_from_string(const std::string& s);
std::string grid_scale_to_string(GridScale s);

struct PreprocessSpec {
    std::optional<double> resample_hz = 1000.0;
    double replicate_to_s = 1.0;  // also caps the processed clip duration
};

struct SweepSpec {
    Method method = Method::min_peak;
    std::vector<double> grid;
    GridScale grid_scale = GridScale::relative;
    std::vector<std::string> clip_paths;
    PreprocessSpec preprocess;
};

struct ModelConfig {
    std::size_t n_filters = 64;
    double f_min_hz = 30.0;
    double spl_reference_db = 100.0;
    double c_s = 0.0;  // zero means "use the library defaults"
    double c_a = 0.0;
    double lowfreq_override_hz = 30.0;

    CalibrationConstants constants() const;
};

struct SweepRow {
    std::string method;
    double param = 0.0;
    std::string clip;  // file path, or "mean" for per-grid-value averages
    std::optional<double> peak_decrease_pct;
    std::optional<double> crest_factor_db_before;
    std::optional<double> crest_factor_db_after;
    std::optional<double> lufs_before;
    std::optional<double> lufs_after_reamp;
    std::optional<double> detectability_matched;
    std::optional<bool> converged;
    std::string error;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    void write_csv(std::ostream& os) const;
    std::string to_csv() const;
};

/// Fixed CSV float formatting: 9 significant digits, '%g' style.
std::string format_float(double v);

/// Default 12-point parameter grid per method (relative scale).
std::vector<double> default_grid(Method m);

/// Decaying sine with an exponentially gliding instantaneous frequency from
/// f_start down to f_end; amplitude envelope exp(-t/decay_s); peak normalized
/// to exactly 1.
Signal synth_kick(double sample_rate_hz, double duration_s, double f_start_hz, double f_end_hz,
                  double decay_s);

struct KickParams {
    double f_start_hz, f_end_hz, decay_s;
};

/// Deterministic spread of kick parameters used for synthetic test sets.
std::vector<KickParams> default_kick_params(std::size_t count);

/// Run one method over (grid x clips): preprocess, process, measure raw and
/// reamplified variants, loudness on the replicated clips, detectability of
/// the loudness-matched error. Emits per-clip rows plus one average row per
/// grid value. Per-clip failures land in the error column without aborting
/// the sweep.
SweepTable run_sweep(const SweepSpec& spec, const ModelConfig& model,
                     const SolverOptions& solver_opts, const DrcParams& drc_base);

}  // namespace crestcap
