#pragma once

#include <optional>
#include <vector>

namespace voltguard {

/// One sample of a simulated charging run. The plant columns (t, current,
/// soc_true, v_true, v_meas) are filled by the simulator / attack channel;
/// the remaining columns are filled downstream by the estimation harness.
struct TraceRow {
    double t = 0.0;         // seconds
    double current = 0.0;   // amperes, positive = charging
    double soc_true = 0.0;  // plant state of charge, fraction
    double v_true = 0.0;    // true terminal voltage, volts
    double v_meas = 0.0;    // possibly corrupted measurement, volts

    double soc_cc = 0.0;    // Coulomb-counted SOC (trusted current channel)
    std::optional<double> v_pred;        // Koopman prediction V_p
    std::optional<double> e1;            // stage I error estimate
    std::optional<double> v_hat;         // secure estimate (attack only)
    std::optional<double> v_openloop;    // open-loop observer
    std::optional<double> v_closedloop;  // closed-loop observer
    int region = 0;                      // SOC region index, 0 = unset
    bool attack_active = false;
};

struct TimeSeriesTrace {
    double dt = 1.0;  // sample spacing, seconds
    std::vector<TraceRow> rows;

    bool empty() const { return rows.empty(); }
    std::size_t size() const { return rows.size(); }
};

}  // namespace voltguard
