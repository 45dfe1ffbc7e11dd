#include "crestcap/config.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace crestcap {

namespace {

using nlohmann::json;

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_sweep(const json& j, SweepSpec& out) {
    if (j.contains("method")) out.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("grid_scale"))
        out.grid_scale = grid_scale_from_string(j.at("grid_scale").get<std::string>());
    if (j.contains("grid"))
        out.grid = j.at("grid").get<std::vector<double>>();
    else
        out.grid = default_grid(out.method);
    get_if(j, "clips", out.clip_paths);
    if (j.contains("preprocess")) {
        const json& p = j.at("preprocess");
        if (p.contains("resample_hz")) {
            const double hz = p.at("resample_hz").get<double>();
            out.preprocess.resample_hz = hz > 0.0 ? std::optional<double>(hz) : std::nullopt;
        }
        get_if(p, "replicate_to_s", out.preprocess.replicate_to_s);
    }
}

void parse_model(const json& j, ModelConfig& out) {
    get_if(j, "n_filters", out.n_filters);
    get_if(j, "f_min_hz", out.f_min_hz);
    get_if(j, "spl_reference_db", out.spl_reference_db);
    get_if(j, "c_s", out.c_s);
    get_if(j, "c_a", out.c_a);
    get_if(j, "lowfreq_override_hz", out.lowfreq_override_hz);
}

void parse_solver(const json& j, SolverOptions& out) {
    get_if(j, "max_inner_iters", out.max_inner_iters);
    get_if(j, "inner_tol", out.inner_tol);
    get_if(j, "bisection_tol", out.bisection_tol);
    get_if(j, "max_bisection_iters", out.max_bisection_iters);
}

void parse_drc(const json& j, DrcParams& out) {
    get_if(j, "threshold_db", out.threshold_db);
    get_if(j, "ratio", out.ratio);
    get_if(j, "knee_db", out.knee_db);
    get_if(j, "attack_s", out.attack_s);
    get_if(j, "release_s", out.release_s);
    get_if(j, "makeup_db", out.makeup_db);
}

void parse_anchors(const json& j, QuietAnchor& quiet, MaskedAnchor& masked) {
    if (j.contains("quiet")) {
        const json& q = j.at("quiet");
        get_if(q, "tone_hz", quiet.tone_hz);
        get_if(q, "threshold_db_spl", quiet.threshold_db_spl);
    }
    if (j.contains("masked")) {
        const json& m = j.at("masked");
        get_if(m, "masker_hz", masked.masker_hz);
        get_if(m, "masker_db_spl", masked.masker_db_spl);
        get_if(m, "probe_hz", masked.probe_hz);
        get_if(m, "probe_db_spl", masked.probe_db_spl);
    }
}

}  // namespace

HarnessConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    HarnessConfig cfg;
    if (j.contains("sweep")) {
        parse_sweep(j.at("sweep"), cfg.sweep);
        cfg.has_sweep = true;
    }
    if (j.contains("model")) parse_model(j.at("model"), cfg.model);
    if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
    if (j.contains("drc")) parse_drc(j.at("drc"), cfg.drc);
    if (j.contains("anchors")) parse_anchors(j.at("anchors"), cfg.quiet_anchor, cfg.masked_anchor);
    return cfg;
}

HarnessConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

}  // namespace crestcap
