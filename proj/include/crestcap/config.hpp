#pragma once

#include <string>

#include "crestcap/auditory.hpp"
#include "crestcap/drc.hpp"
#include "crestcap/harness.hpp"
#include "crestcap/solvers.hpp"

namespace crestcap {

/// Everything a sweep or process run needs, loaded from one JSON file with
/// optional "sweep", "model", "solver", "drc" and "anchors" sections; absent
/// keys keep their defaults.
struct HarnessConfig {
    SweepSpec sweep;
    ModelConfig model;
    SolverOptions solver;
    DrcParams drc;
    QuietAnchor quiet_anchor;
    MaskedAnchor masked_anchor;
    bool has_sweep = false;
};

HarnessConfig load_config(const std::string& path);
HarnessConfig parse_config(const std::string& json_text);

}  // namespace crestcap
