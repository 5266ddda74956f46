#pragma once

#include <array>
#include <vector>

#include "voltguard/battery.hpp"
#include "voltguard/trace.hpp"

namespace voltguard {

/// Simulates the ECM forward from init using only the trusted current
/// series of the trace; never reads v_meas. Observer params may differ
/// from the plant's (model-mismatch knob).
std::vector<double> open_loop_observe(const BatteryParams& params,
                                      const TimeSeriesTrace& trace,
                                      const BatteryState& init);

/// Constant-gain output-injection observer: the ECM propagation plus
/// gain * (v_meas - v_hat) on (soc, v_rc1, v_rc2) each step.
/// Throws NumericError if v_hat leaves a sanity band around v_max.
std::vector<double> closed_loop_observe(const BatteryParams& params,
                                        const TimeSeriesTrace& trace,
                                        const BatteryState& init,
                                        const std::array<double, 3>& gain);

/// Config-time gain check: on a short nominal constant-current segment a
/// perturbed observer must contract toward the truth.
/// Throws ConfigError otherwise.
void validate_observer_gain(const BatteryParams& params,
                            const std::array<double, 3>& gain, double i_cc,
                            double soc0, double dt);

}  // namespace voltguard
