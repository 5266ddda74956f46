#pragma once

#include <utility>
#include <vector>

#include "voltguard/trace.hpp"

namespace voltguard {

/// Second-order equivalent-circuit model parameters: OCV source behind a
/// series resistance and two RC pairs, plus the CCCV policy limits.
struct BatteryParams {
    double capacity_ah = 7.0;  // ampere-hours
    double r0 = 0.010;         // ohms
    double r1 = 0.015;         // ohms
    double c1 = 2000.0;        // farads
    double r2 = 0.025;         // ohms
    double c2 = 20000.0;       // farads
    // (soc, ocv) anchors; soc strictly increasing spanning [0,1],
    // ocv strictly increasing.
    std::vector<std::pair<double, double>> ocv_table;
    double v_max = 4.2;      // CV ceiling, volts
    double i_cutoff = 0.25;  // CV termination current, amperes

    /// Throws ConfigError if any invariant is violated.
    void validate() const;
};

/// Default parameter set for a ~7 Ah prismatic NMC cell with 30 s and
/// 500 s RC time constants; OCV anchors at the SOC region boundaries.
BatteryParams default_battery_params();

struct BatteryState {
    double soc = 0.0;    // fraction in [0,1]
    double v_rc1 = 0.0;  // volts
    double v_rc2 = 0.0;  // volts
};

/// Monotone shape-preserving piecewise-cubic interpolant of an OCV table
/// (Fritsch-Carlson tangents). Exact at anchors, strictly increasing.
class OcvCurve {
public:
    explicit OcvCurve(const std::vector<std::pair<double, double>>& table);

    /// OCV at soc. Throws std::domain_error outside [0,1].
    double value(double soc) const;

    double span() const { return y_.back() - y_.front(); }

private:
    std::vector<double> x_, y_, m_;  // knots and tangents
};

/// Convenience wrapper: builds the interpolant from params.ocv_table.
double ocv_lookup(const BatteryParams& params, double soc);

/// One exact zero-order-hold step of the ECM. current > 0 charges.
/// Throws std::domain_error for dt <= 0. SOC is clamped to [0,1].
BatteryState step_ecm(const BatteryState& state, double current,
                      const BatteryParams& params, double dt);

/// Terminal voltage OCV(soc) + v_rc1 + v_rc2 + r0*current.
double terminal_voltage(const BatteryState& state, double current,
                        const BatteryParams& params, const OcvCurve& ocv);
double terminal_voltage(const BatteryState& state, double current,
                        const BatteryParams& params);

/// Simulates a CCCV charge: constant current i_cc until the terminal
/// voltage hits v_max, then a per-step closed-form current solve that pins
/// the terminal voltage at v_max, until current < i_cutoff or t_end.
/// Row convention: row k holds the state at t = k*dt and the current
/// applied over [t, t+dt); v_meas is initialized equal to v_true.
TimeSeriesTrace run_cccv(const BatteryParams& params, double i_cc,
                         double soc0, double dt, double t_end);

/// Returns a copy with r0 scaled by aging_factor (>= 1); when scale_rc is
/// set, r1 and r2 scale too. Throws std::domain_error for factor < 1.
BatteryParams age_params(const BatteryParams& params, double aging_factor,
                         bool scale_rc = false);

}  // namespace voltguard
