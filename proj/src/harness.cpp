#include "crestcap/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "crestcap/metrics.hpp"
#include "crestcap/resample.hpp"
#include "crestcap/wav.hpp"

namespace crestcap {

Method method_from_string(const std::string& s) {
    if (s == "min_peak") return Method::min_peak;
    if (s == "min_detect") return Method::min_detect;
    if (s == "hard_clip") return Method::hard_clip;
    if (s == "soft_clip") return Method::soft_clip;
    if (s == "drc") return Method::drc;
    throw std::invalid_argument("unknown method: " + s);
}

std::string method_to_string(Method m) {
    switch (m) {
        case Method::min_peak: return "min_peak";
        case Method::min_detect: return "min_detect";
        case Method::hard_clip: return "hard_clip";
        case Method::soft_clip: return "soft_clip";
        case Method::drc: return "drc";
    }
    return "?";
}

GridScale grid_scale_from_string(const std::string& s) {
    if (s == "relative") return GridScale::relative;
    if (s == "absolute") return GridScale::absolute;
    throw std::invalid_argument("unknown grid scale: " + s);
}

std::string grid_scale_to_string(GridScale s) {
    return s == GridScale::relative ? "relative" : "absolute";
}

CalibrationConstants ModelConfig::constants() const {
    CalibrationConstants c = CalibrationConstants::defaults();
    if (c_s > 0.0) c.c_s = c_s;
    if (c_a > 0.0) c.c_a = c_a;
    c.spl_reference_db = spl_reference_db;
    return c;
}

std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<double> default_grid(Method m) {
    std::vector<double> g(12);
    switch (m) {
        case Method::min_peak:
            // relative detectability budget c / c_max, log spaced, stopping
            // short of the degenerate c = c_max point (solution = silence)
            for (int i = 0; i < 12; ++i)
                g[i] = std::pow(10.0, -2.2 + (std::log10(0.95) + 2.2) * i / 11.0);
            break;
        case Method::min_detect:
        case Method::hard_clip:
        case Method::soft_clip:
            // relative peak bound lambda / ||x0||inf
            for (int i = 0; i < 12; ++i) g[i] = std::pow(10.0, -2.0 + 2.0 * i / 11.0);
            break;
        case Method::drc:
            // threshold relative to the clip peak, linear in dB
            for (int i = 0; i < 12; ++i)
                g[i] = std::pow(10.0, (-33.0 + 33.0 * i / 11.0) / 20.0);
            break;
    }
    return g;
}

Signal synth_kick(double sample_rate_hz, double duration_s, double f_start_hz, double f_end_hz,
                  double decay_s) {
    if (!(f_start_hz > f_end_hz) || !(f_end_hz > 0.0))
        throw std::invalid_argument("synth_kick: need f_start > f_end > 0");
    if (!(decay_s > 0.0)) throw std::invalid_argument("synth_kick: decay must be positive");
    if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0))
        throw std::invalid_argument("synth_kick: bad duration or rate");

    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    if (n == 0) throw std::invalid_argument("synth_kick: zero-length output");
    const double glide_tau = decay_s / 4.0;  // pitch settles faster than the envelope
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        const double phase =
            2.0 * M_PI *
            (f_end_hz * t + (f_start_hz - f_end_hz) * glide_tau * (1.0 - std::exp(-t / glide_tau)));
        out[i] = std::exp(-t / decay_s) * std::sin(phase);
    }
    return reamplify_to_peak(Signal(std::move(out), sample_rate_hz), 1.0);
}

std::vector<KickParams> default_kick_params(std::size_t count) {
    // beater-click onset gliding down to the shell resonance
    static const KickParams base[8] = {{380.0, 55.0, 0.12}, {340.0, 60.0, 0.16},
                                       {420.0, 58.0, 0.14}, {360.0, 62.0, 0.18},
                                       {330.0, 56.0, 0.20}, {400.0, 64.0, 0.13},
                                       {350.0, 57.0, 0.15}, {390.0, 61.0, 0.17}};
    std::vector<KickParams> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = base[i % 8];
        out[i].f_start_hz *= 1.0 + 0.01 * static_cast<double>(i / 8);
    }
    return out;
}

namespace {

std::optional<double> parse_back(std::optional<double> v) {
    if (!v) return std::nullopt;
    return std::strtod(format_float(*v).c_str(), nullptr);
}

// per-clip state shared across grid values
struct ClipContext {
    Signal x0;          // preprocessed clip
    Signal replicated;  // replicate_truncate(x0, replicate_to_s)
    double peak0 = 0.0;
    double crest0 = 0.0;
    double c_max = 0.0;  // ||diag(w) F x0||_2
    std::optional<double> lufs0;
    GammatoneBank bank_clip;
    GammatoneBank bank_rep;
    PerceptualWeights weights_clip;
    PerceptualWeights weights_rep;
};

ClipContext make_context(const Signal& raw, const PreprocessSpec& pre, const ModelConfig& model,
                         const CalibrationConstants& calib) {
    ClipContext ctx;
    Signal x = raw;
    if (pre.resample_hz) x = resample(x, *pre.resample_hz);
    const auto cap = static_cast<std::size_t>(std::llround(pre.replicate_to_s * x.sample_rate_hz));
    if (cap > 0 && x.samples.size() > cap) {
        x.samples.resize(cap);
        x = Signal(std::move(x.samples), x.sample_rate_hz);
    }
    ctx.x0 = std::move(x);
    ctx.peak0 = peak_abs(ctx.x0);
    ctx.crest0 = crest_factor_db(ctx.x0);
    ctx.replicated = replicate_truncate(ctx.x0, pre.replicate_to_s);
    ctx.lufs0 = integrated_loudness_lufs(ctx.replicated);

    ctx.bank_clip = build_bank(ctx.x0.sample_rate_hz, ctx.x0.samples.size(), model.n_filters,
                               model.f_min_hz);
    ctx.weights_clip = perceptual_weights(ctx.x0, ctx.bank_clip, calib, model.lowfreq_override_hz);
    if (ctx.replicated.samples.size() == ctx.x0.samples.size()) {
        ctx.bank_rep = ctx.bank_clip;
        ctx.weights_rep = ctx.weights_clip;
    } else {
        ctx.bank_rep = build_bank(ctx.replicated.sample_rate_hz, ctx.replicated.samples.size(),
                                  model.n_filters, model.f_min_hz);
        ctx.weights_rep =
            perceptual_weights(ctx.replicated, ctx.bank_rep, calib, model.lowfreq_override_hz);
    }
    ctx.c_max = std::sqrt(detectability(ctx.x0, ctx.x0, ctx.bank_clip, calib,
                                        model.lowfreq_override_hz));
    return ctx;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec, const ModelConfig& model,
                     const SolverOptions& solver_opts, const DrcParams& drc_base) {
    if (spec.grid.empty()) throw std::invalid_argument("run_sweep: empty parameter grid");
    if (spec.clip_paths.empty()) throw std::invalid_argument("run_sweep: empty clip list");
    for (double v : spec.grid) {
        if (!std::isfinite(v)) throw std::invalid_argument("run_sweep: non-finite grid value");
        if (spec.method == Method::min_peak) {
            if (v < 0.0) throw std::invalid_argument("run_sweep: c must be >= 0");
        } else if (spec.method != Method::drc || spec.grid_scale == GridScale::relative) {
            if (!(v > 0.0)) throw std::invalid_argument("run_sweep: grid values must be positive");
        }
    }

    const CalibrationConstants calib = model.constants();
    const std::string method_name = method_to_string(spec.method);

    // per-clip setup; a clip that fails here produces error rows at every
    // grid value instead of aborting the sweep
    std::vector<std::optional<ClipContext>> contexts(spec.clip_paths.size());
    std::vector<std::string> context_errors(spec.clip_paths.size());
    for (std::size_t ci = 0; ci < spec.clip_paths.size(); ++ci) {
        try {
            contexts[ci] = make_context(load_wav(spec.clip_paths[ci]), spec.preprocess, model, calib);
        } catch (const std::exception& e) {
            context_errors[ci] = e.what();
        }
    }

    SweepTable table;
    for (double grid_value : spec.grid) {
        std::vector<SweepRow> clip_rows;
        for (std::size_t ci = 0; ci < spec.clip_paths.size(); ++ci) {
            SweepRow row;
            row.method = method_name;
            row.param = grid_value;
            row.clip = spec.clip_paths[ci];
            if (!contexts[ci]) {
                row.error = context_errors[ci];
                clip_rows.push_back(std::move(row));
                continue;
            }
            const ClipContext& ctx = *contexts[ci];
            row.crest_factor_db_before = ctx.crest0;
            row.lufs_before = ctx.lufs0;
            try {
                Signal processed = ctx.x0;
                bool converged = true;
                const bool relative = spec.grid_scale == GridScale::relative;
                switch (spec.method) {
                    case Method::min_peak: {
                        const double c = relative ? grid_value * ctx.c_max : grid_value;
                        SolverReport rep = solve_min_peak(ctx.x0, ctx.weights_clip, c, solver_opts);
                        processed = std::move(rep.solution);
                        converged = rep.converged;
                        break;
                    }
                    case Method::min_detect: {
                        const double lambda = relative ? grid_value * ctx.peak0 : grid_value;
                        SolverReport rep =
                            solve_min_detectability(ctx.x0, ctx.weights_clip, lambda, solver_opts);
                        processed = std::move(rep.solution);
                        converged = rep.converged;
                        break;
                    }
                    case Method::hard_clip: {
                        const double lambda = relative ? grid_value * ctx.peak0 : grid_value;
                        processed = hard_clip(ctx.x0, lambda);
                        break;
                    }
                    case Method::soft_clip:
                    case Method::drc: {
                        const double threshold_db = relative
                                                        ? 20.0 * std::log10(grid_value * ctx.peak0)
                                                        : grid_value;
                        if (spec.method == Method::soft_clip) {
                            processed = soft_clip(ctx.x0, threshold_db);
                        } else {
                            DrcParams p = drc_base;
                            p.threshold_db = threshold_db;
                            processed = drc_process(ctx.x0, p);
                        }
                        break;
                    }
                }
                row.converged = converged;
                row.peak_decrease_pct = peak_decrease_pct(ctx.x0, processed);
                row.crest_factor_db_after = crest_factor_db(processed);

                const Signal reamped = reamplify_to_peak(processed, ctx.peak0);
                const Signal rep_reamped = replicate_truncate(reamped, spec.preprocess.replicate_to_s);
                row.lufs_after_reamp = integrated_loudness_lufs(rep_reamped);

                const double gain = loudness_match_gain(ctx.replicated, rep_reamped);
                std::vector<double> err(ctx.replicated.samples.size());
                for (std::size_t i = 0; i < err.size(); ++i)
                    err[i] = gain * rep_reamped.samples[i] - ctx.replicated.samples[i];
                row.detectability_matched =
                    detectability(ctx.replicated, Signal(std::move(err), ctx.replicated.sample_rate_hz),
                                  ctx.bank_rep, calib, model.lowfreq_override_hz);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            clip_rows.push_back(std::move(row));
        }

        // averages are taken over the values as they will appear in the CSV,
        // so a reader re-averaging the formatted rows reproduces them exactly
        SweepRow mean_row;
        mean_row.method = method_name;
        mean_row.param = grid_value;
        mean_row.clip = "mean";
        auto accumulate = [&](auto getter, std::optional<double>& out_cell) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const SweepRow& r : clip_rows) {
                if (!r.error.empty()) continue;
                const auto v = parse_back(getter(r));
                if (!v) continue;
                sum += *v;
                ++count;
            }
            if (count > 0) out_cell = sum / static_cast<double>(count);
        };
        accumulate([](const SweepRow& r) { return r.peak_decrease_pct; }, mean_row.peak_decrease_pct);
        accumulate([](const SweepRow& r) { return r.crest_factor_db_before; },
                   mean_row.crest_factor_db_before);
        accumulate([](const SweepRow& r) { return r.crest_factor_db_after; },
                   mean_row.crest_factor_db_after);
        accumulate([](const SweepRow& r) { return r.lufs_before; }, mean_row.lufs_before);
        accumulate([](const SweepRow& r) { return r.lufs_after_reamp; }, mean_row.lufs_after_reamp);
        accumulate([](const SweepRow& r) { return r.detectability_matched; },
                   mean_row.detectability_matched);
        bool all_converged = true;
        bool any_row = false;
        for (const SweepRow& r : clip_rows) {
            if (!r.error.empty()) continue;
            any_row = true;
            all_converged = all_converged && r.converged.value_or(false);
        }
        if (any_row) mean_row.converged = all_converged;

        for (SweepRow& r : clip_rows) table.rows.push_back(std::move(r));
        table.rows.push_back(std::move(mean_row));
    }
    return table;
}

void SweepTable::write_csv(std::ostream& os) const {
    os << "method,param,clip,peak_decrease_pct,crest_factor_db_before,crest_factor_db_after,"
          "lufs_before,lufs_after_reamp,detectability_matched,converged,error\n";
    auto num = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string(); };
    for (const SweepRow& r : rows) {
        // loudness cells distinguish "undefined" (fully gated) from the
        // blanks a failed row leaves behind
        auto lufs = [&](const std::optional<double>& v) {
            if (v) return format_float(*v);
            return r.error.empty() ? std::string("undefined") : std::string();
        };
        os << r.method << ',' << format_float(r.param) << ',' << r.clip << ','
           << num(r.peak_decrease_pct) << ',' << num(r.crest_factor_db_before) << ','
           << num(r.crest_factor_db_after) << ',' << lufs(r.lufs_before) << ','
           << lufs(r.lufs_after_reamp) << ',' << num(r.detectability_matched) << ','
           << (r.converged ? (*r.converged ? "true" : "false") : "") << ',';
        // commas inside error messages would break the flat schema
        std::string msg = r.error;
        for (char& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        os << msg << '\n';
    }
}

std::string SweepTable::to_csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
}

}  // namespace crestcap
