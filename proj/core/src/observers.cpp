#include "voltguard/observers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voltguard/errors.hpp"

namespace voltguard {

std::vector<double> open_loop_observe(const BatteryParams& params,
                                      const TimeSeriesTrace& trace,
                                      const BatteryState& init) {
    const OcvCurve ocv(params.ocv_table);
    std::vector<double> out;
    out.reserve(trace.size());
    BatteryState state = init;
    for (const auto& row : trace.rows) {
        out.push_back(terminal_voltage(state, row.current, params, ocv));
        state = step_ecm(state, row.current, params, trace.dt);
    }
    return out;
}

std::vector<double> closed_loop_observe(const BatteryParams& params,
                                        const TimeSeriesTrace& trace,
                                        const BatteryState& init,
                                        const std::array<double, 3>& gain) {
    const OcvCurve ocv(params.ocv_table);
    const double sanity = 3.0 * params.v_max;
    std::vector<double> out;
    out.reserve(trace.size());
    BatteryState state = init;
    for (const auto& row : trace.rows) {
        const double v_hat = terminal_voltage(state, row.current, params, ocv);
        if (!std::isfinite(v_hat) || std::abs(v_hat) > sanity)
            throw NumericError("closed-loop observer diverged at t = " +
                               std::to_string(row.t));
        out.push_back(v_hat);
        const double innovation = row.v_meas - v_hat;
        state = step_ecm(state, row.current, params, trace.dt);
        state.soc = std::clamp(state.soc + gain[0] * innovation, 0.0, 1.0);
        state.v_rc1 += gain[1] * innovation;
        state.v_rc2 += gain[2] * innovation;
    }
    return out;
}

void validate_observer_gain(const BatteryParams& params,
                            const std::array<double, 3>& gain, double i_cc,
                            double soc0, double dt) {
    const OcvCurve ocv(params.ocv_table);
    BatteryState plant{soc0, 0.0, 0.0};
    BatteryState obs{std::clamp(soc0 + 0.05, 0.0, 1.0), 0.0, 0.0};
    double first_err = 0.0, last_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double v_true = terminal_voltage(plant, i_cc, params, ocv);
        const double v_hat = terminal_voltage(obs, i_cc, params, ocv);
        if (!std::isfinite(v_hat))
            throw ConfigError("observer gain drives the estimate non-finite");
        const double err = std::abs(v_hat - v_true);
        if (k == 0) first_err = err;
        last_err = err;
        const double innovation = v_true - v_hat;
        plant = step_ecm(plant, i_cc, params, dt);
        obs = step_ecm(obs, i_cc, params, dt);
        obs.soc = std::clamp(obs.soc + gain[0] * innovation, 0.0, 1.0);
        obs.v_rc1 += gain[1] * innovation;
        obs.v_rc2 += gain[2] * innovation;
    }
    if (!(last_err < 0.5 * first_err))
        throw ConfigError(
            "observer gain does not contract the estimation error on a "
            "nominal segment");
}

}  // namespace voltguard
