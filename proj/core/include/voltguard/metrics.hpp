#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voltguard/attack.hpp"
#include "voltguard/trace.hpp"

namespace voltguard {

struct EstimatorMetrics {
    double rmse_all = 0.0;
    double maxabs_all = 0.0;
    std::optional<double> rmse_attack;
    std::optional<double> maxabs_attack;
    std::optional<double> mean_err_attack;  // signed, for bias tracking
};

struct MetricsReport {
    // keyed by estimator name: corrupt_meas, v_pred, secure, stage1_only,
    // open_loop, closed_loop (only those with columns present)
    std::map<std::string, EstimatorMetrics> estimators;
    std::optional<double> soc_at_onset;
    std::vector<std::pair<double, int>> region_switches;  // (t, new region)
};

/// RMSE / max-abs of every present estimator column against v_true over
/// the whole trace and over the attack interval. extra_columns lets the
/// harness score series that have no CSV column (e.g. stage1_only).
MetricsReport compute_metrics(
    const TimeSeriesTrace& trace, const AttackSpec& attack,
    const std::map<std::string, std::vector<std::optional<double>>>&
        extra_columns = {});

std::string format_report(const MetricsReport& report);

}  // namespace voltguard
