#pragma once

#include <string>
#include <utility>

#include "voltguard/config.hpp"
#include "voltguard/metrics.hpp"
#include "voltguard/trace.hpp"

namespace voltguard {

struct ScenarioResult {
    TimeSeriesTrace trace;
    MetricsReport report;
};

/// Runs one scenario end to end: plant simulation, attack channel,
/// Coulomb counting, the secure Koopman estimator plus the enabled
/// baselines, and metrics. Deterministic for identical config and seed.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Writes trace.csv and report.txt (and trace.svg when plot is set) into
/// cfg.output_dir. Returns the trace.csv path.
std::string emit_outputs(const ScenarioResult& result,
                         const ScenarioConfig& cfg, bool plot = false);

}  // namespace voltguard
