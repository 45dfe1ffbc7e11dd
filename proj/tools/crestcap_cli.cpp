#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "crestcap/config.hpp"
#include "crestcap/harness.hpp"
#include "crestcap/metrics.hpp"
#include "crestcap/resample.hpp"
#include "crestcap/wav.hpp"

namespace {

using nlohmann::json;
using namespace crestcap;

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json("undefined");
}

Signal preprocess(Signal x, double resample_hz, double truncate_s) {
    if (resample_hz > 0.0) x = resample(x, resample_hz);
    if (truncate_s > 0.0) {
        const auto cap = static_cast<std::size_t>(std::llround(truncate_s * x.sample_rate_hz));
        if (cap > 0 && x.samples.size() > cap) {
            x.samples.resize(cap);
            x = Signal(std::move(x.samples), x.sample_rate_hz);
        }
    }
    return x;
}

int run_process(const std::string& config_path, const std::string& method_name,
                std::optional<double> c, std::optional<double> lambda,
                std::optional<double> threshold_db, double resample_hz, double truncate_s,
                const std::string& depth_name, const std::string& in_path,
                const std::string& out_path) {
    HarnessConfig cfg = config_path.empty() ? HarnessConfig{} : load_config(config_path);
    const Method method = method_from_string(method_name);
    const CalibrationConstants calib = cfg.model.constants();

    const Signal x0 = preprocess(load_wav(in_path), resample_hz, truncate_s);
    const double peak0 = peak_abs(x0);

    Signal processed = x0;
    json diag;
    double param = 0.0;
    switch (method) {
        case Method::min_peak: {
            if (!c) throw std::runtime_error("process: --method min_peak needs --c");
            param = *c;
            const auto bank =
                build_bank(x0.sample_rate_hz, x0.samples.size(), cfg.model.n_filters, cfg.model.f_min_hz);
            const auto w = perceptual_weights(x0, bank, calib, cfg.model.lowfreq_override_hz);
            SolverReport rep = solve_min_peak(x0, w, *c, cfg.solver);
            diag["converged"] = rep.converged;
            diag["iterations"] = rep.iterations;
            diag["constraint_value"] = rep.constraint_value;
            processed = std::move(rep.solution);
            break;
        }
        case Method::min_detect: {
            if (!lambda) throw std::runtime_error("process: --method min_detect needs --lambda");
            param = *lambda;
            const auto bank =
                build_bank(x0.sample_rate_hz, x0.samples.size(), cfg.model.n_filters, cfg.model.f_min_hz);
            const auto w = perceptual_weights(x0, bank, calib, cfg.model.lowfreq_override_hz);
            SolverReport rep = solve_min_detectability(x0, w, *lambda, cfg.solver);
            diag["converged"] = rep.converged;
            diag["iterations"] = rep.iterations;
            diag["objective"] = rep.objective;
            processed = std::move(rep.solution);
            break;
        }
        case Method::hard_clip:
            if (!lambda) throw std::runtime_error("process: --method hard_clip needs --lambda");
            param = *lambda;
            processed = hard_clip(x0, *lambda);
            break;
        case Method::soft_clip:
            if (!threshold_db) throw std::runtime_error("process: --method soft_clip needs --threshold-db");
            param = *threshold_db;
            processed = soft_clip(x0, *threshold_db);
            break;
        case Method::drc: {
            if (!threshold_db) throw std::runtime_error("process: --method drc needs --threshold-db");
            param = *threshold_db;
            DrcParams p = cfg.drc;
            p.threshold_db = *threshold_db;
            processed = drc_process(x0, p);
            break;
        }
    }

    WavDepth depth = WavDepth::float32;
    if (depth_name == "16") depth = WavDepth::pcm16;
    else if (depth_name == "24") depth = WavDepth::pcm24;
    else if (depth_name != "float32") throw std::runtime_error("process: bad --bit-depth");
    save_wav(processed, out_path, depth);

    json out;
    out["method"] = method_name;
    out["param"] = param;
    out["input"] = in_path;
    out["output"] = out_path;
    out["peak_before"] = peak0;
    out["peak_after"] = peak_abs(processed);
    out["peak_decrease_pct"] = peak_decrease_pct(x0, processed);
    out["crest_factor_db_before"] = crest_factor_db(x0);
    if (peak_abs(processed) > 0.0) out["crest_factor_db_after"] = crest_factor_db(processed);
    out["lufs_before"] = optional_json(integrated_loudness_lufs(replicate_truncate(x0, 1.0)));
    if (peak_abs(processed) > 0.0) {
        const Signal reamped = reamplify_to_peak(processed, peak0);
        out["lufs_after_reamp"] =
            optional_json(integrated_loudness_lufs(replicate_truncate(reamped, 1.0)));
    }
    if (!diag.empty()) out["solver"] = diag;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path) {
    HarnessConfig cfg = load_config(config_path);
    if (!cfg.has_sweep) throw std::runtime_error("sweep: config has no \"sweep\" section");
    if (cfg.sweep.clip_paths.empty()) throw std::runtime_error("sweep: config lists no clips");
    SweepTable table = run_sweep(cfg.sweep, cfg.model, cfg.solver, cfg.drc);
    std::ofstream f(out_path, std::ios::trunc);
    if (!f) throw std::runtime_error("sweep: cannot open " + out_path);
    table.write_csv(f);
    return 0;
}

int run_metrics(const std::string& in_path, const std::string& ref_path,
                const std::string& config_path) {
    HarnessConfig cfg = config_path.empty() ? HarnessConfig{} : load_config(config_path);
    const Signal x = load_wav(in_path);
    MetricsReport report;
    report.peak_abs = peak_abs(x);
    report.crest_factor_db = crest_factor_db(x);
    report.loudness_lufs = integrated_loudness_lufs(x);

    json out;
    out["file"] = in_path;
    out["peak_abs"] = report.peak_abs;
    out["crest_factor_db"] = report.crest_factor_db;
    out["loudness_lufs"] = optional_json(report.loudness_lufs);
    if (!ref_path.empty()) {
        const Signal ref = load_wav(ref_path);
        if (ref.samples.size() != x.samples.size() ||
            std::abs(ref.sample_rate_hz - x.sample_rate_hz) > 1e-9)
            throw std::runtime_error("metrics: reference must match the input length and rate");
        report.peak_decrease_pct = peak_decrease_pct(ref, x);
        const auto bank =
            build_bank(ref.sample_rate_hz, ref.samples.size(), cfg.model.n_filters, cfg.model.f_min_hz);
        std::vector<double> err(x.samples.size());
        for (std::size_t i = 0; i < err.size(); ++i) err[i] = x.samples[i] - ref.samples[i];
        report.detectability = detectability(ref, Signal(std::move(err), ref.sample_rate_hz), bank,
                                             cfg.model.constants(), cfg.model.lowfreq_override_hz);
        out["reference"] = ref_path;
        out["peak_decrease_pct"] = report.peak_decrease_pct;
        out["detectability"] = *report.detectability;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_synth(const std::string& out_dir, std::size_t count, double rate, double duration) {
    std::filesystem::create_directories(out_dir);
    const auto params = default_kick_params(count);
    json listing = json::array();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Signal kick =
            synth_kick(rate, duration, params[i].f_start_hz, params[i].f_end_hz, params[i].decay_s);
        char name[32];
        std::snprintf(name, sizeof(name), "kick_%02zu.wav", i + 1);
        const std::string path = (std::filesystem::path(out_dir) / name).string();
        save_wav(kick, path, WavDepth::float32);
        listing.push_back({{"file", path},
                           {"f_start_hz", params[i].f_start_hz},
                           {"f_end_hz", params[i].f_end_hz},
                           {"decay_s", params[i].decay_s}});
    }
    std::cout << listing.dump(2) << "\n";
    return 0;
}

int run_calibrate(const std::string& config_path, double rate, std::size_t n,
                  std::size_t n_filters, double f_min, double spl_ref) {
    HarnessConfig cfg = config_path.empty() ? HarnessConfig{} : load_config(config_path);
    const auto bank = build_bank(rate, n, n_filters, f_min);
    const CalibrationConstants cc = calibrate(bank, cfg.quiet_anchor, cfg.masked_anchor, spl_ref);
    json out;
    out["c_s"] = cc.c_s;
    out["c_a"] = cc.c_a;
    out["spl_reference_db"] = cc.spl_reference_db;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crestcap: peak reduction under a perceptual detectability budget"};
    app.require_subcommand(1);

    // process
    auto* proc = app.add_subcommand("process", "process one clip with one method");
    std::string p_method, p_config, p_depth = "float32", p_in, p_out;
    std::optional<double> p_c, p_lambda, p_threshold;
    double p_resample = 1000.0, p_truncate = 1.0;
    proc->add_option("--method", p_method, "min_peak|min_detect|hard_clip|soft_clip|drc")->required();
    proc->add_option("--c", p_c, "detectability bound (min_peak)");
    proc->add_option("--lambda", p_lambda, "peak bound, linear amplitude (min_detect, hard_clip)");
    proc->add_option("--threshold-db", p_threshold, "threshold in dBFS (soft_clip, drc)");
    proc->add_option("--config", p_config, "JSON config for model/solver/drc settings");
    proc->add_option("--resample-hz", p_resample, "preprocess resample rate, 0 disables (default 1000)");
    proc->add_option("--truncate-s", p_truncate, "preprocess duration cap, 0 disables (default 1)");
    proc->add_option("--bit-depth", p_depth, "output depth: 16|24|float32");
    proc->add_option("input", p_in, "input WAV")->required();
    proc->add_option("output", p_out, "output WAV")->required();

    // sweep
    auto* swp = app.add_subcommand("sweep", "run a parameter sweep from a config file");
    std::string s_config, s_out;
    swp->add_option("--config", s_config, "JSON sweep config")->required();
    swp->add_option("--out", s_out, "output CSV path")->required();

    // metrics
    auto* met = app.add_subcommand("metrics", "report metrics for a WAV");
    std::string m_in, m_ref, m_config;
    met->add_option("input", m_in, "input WAV")->required();
    met->add_option("--reference", m_ref, "reference WAV for error detectability");
    met->add_option("--config", m_config, "JSON config for model settings");

    // synth
    auto* syn = app.add_subcommand("synth", "generate synthetic kick-drum test clips");
    std::string g_dir;
    std::size_t g_count = 8;
    double g_rate = 1000.0, g_dur = 1.0;
    syn->add_option("--out-dir", g_dir, "output directory")->required();
    syn->add_option("--count", g_count, "number of clips (default 8)");
    syn->add_option("--sample-rate", g_rate, "sample rate in Hz (default 1000)");
    syn->add_option("--duration", g_dur, "clip duration in seconds (default 1)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "solve model constants from anchor conditions");
    std::string c_config;
    double c_rate = 48000.0, c_fmin = 30.0, c_spl = 100.0;
    std::size_t c_n = 8192, c_nf = 64;
    cal->add_option("--config", c_config, "JSON config with an \"anchors\" section");
    cal->add_option("--sample-rate", c_rate, "bank sample rate (default 48000)");
    cal->add_option("--n", c_n, "transform length (default 8192)");
    cal->add_option("--n-filters", c_nf, "filter count (default 64)");
    cal->add_option("--f-min", c_fmin, "lowest center frequency (default 30)");
    cal->add_option("--spl-ref", c_spl, "dB SPL at full scale (default 100)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (proc->parsed())
            return run_process(p_config, p_method, p_c, p_lambda, p_threshold, p_resample,
                               p_truncate, p_depth, p_in, p_out);
        if (swp->parsed()) return run_sweep_cmd(s_config, s_out);
        if (met->parsed()) return run_metrics(m_in, m_ref, m_config);
        if (syn->parsed()) return run_synth(g_dir, g_count, g_rate, g_dur);
        if (cal->parsed()) return run_calibrate(c_config, c_rate, c_n, c_nf, c_fmin, c_spl);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
