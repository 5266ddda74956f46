#include "voltguard/battery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "voltguard/errors.hpp"

namespace voltguard {

void BatteryParams::validate() const {
    if (capacity_ah <= 0.0) throw ConfigError("battery.capacity_ah must be > 0");
    if (r0 <= 0.0 || r1 <= 0.0 || r2 <= 0.0)
        throw ConfigError("battery resistances must be > 0");
    if (c1 <= 0.0 || c2 <= 0.0)
        throw ConfigError("battery capacitances must be > 0");
    if (ocv_table.size() < 2) throw ConfigError("ocv_table needs >= 2 anchors");
    if (ocv_table.front().first != 0.0 || ocv_table.back().first != 1.0)
        throw ConfigError("ocv_table must span soc 0 to 1");
    for (std::size_t i = 1; i < ocv_table.size(); ++i) {
        if (ocv_table[i].first <= ocv_table[i - 1].first)
            throw ConfigError("ocv_table soc values must be strictly increasing");
        if (ocv_table[i].second <= ocv_table[i - 1].second)
            throw ConfigError("ocv_table ocv values must be strictly increasing");
    }
    if (v_max <= 0.0) throw ConfigError("battery.v_max must be > 0");
    if (i_cutoff <= 0.0) throw ConfigError("battery.i_cutoff must be > 0");
}

BatteryParams default_battery_params() {
    BatteryParams p;
    // NMC-like shape: steep below 0.4, flatter mid-region, steep near 1;
    // interior anchors sit on the empirical-correction region boundaries.
    p.ocv_table = {{0.00, 3.00}, {0.40, 3.65}, {0.66, 3.78}, {0.73, 3.85},
                   {0.75, 3.87}, {0.86, 3.98}, {1.00, 4.20}};
    return p;
}

OcvCurve::OcvCurve(const std::vector<std::pair<double, double>>& table) {
    if (table.size() < 2) throw ConfigError("OCV table needs >= 2 anchors");
    const std::size_t n = table.size();
    x_.resize(n);
    y_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        x_[i] = table[i].first;
        y_[i] = table[i].second;
    }
    // Fritsch-Carlson monotone tangents. All secants are positive for a
    // strictly increasing table, so the limiter only scales, never zeroes.
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.resize(n);
    m_[0] = delta[0];
    m_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        m_[i] = 0.5 * (delta[i - 1] + delta[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = m_[i] / delta[i];
        const double b = m_[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m_[i] = tau * a * delta[i];
            m_[i + 1] = tau * b * delta[i];
        }
    }
}

double OcvCurve::value(double soc) const {
    if (soc < 0.0 || soc > 1.0)
        throw std::domain_error("ocv_lookup: soc outside [0,1]");
    const std::size_t n = x_.size();
    if (soc <= x_.front()) return y_.front();
    if (soc >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), soc);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double u = (soc - x_[i]) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double ocv_lookup(const BatteryParams& params, double soc) {
    return OcvCurve(params.ocv_table).value(soc);
}

BatteryState step_ecm(const BatteryState& state, double current,
                      const BatteryParams& params, double dt) {
    if (dt <= 0.0) throw std::domain_error("step_ecm: dt must be > 0");
    BatteryState next;
    next.soc = std::clamp(
        state.soc + dt * current / (3600.0 * params.capacity_ah), 0.0, 1.0);
    const double a1 = std::exp(-dt / (params.r1 * params.c1));
    const double a2 = std::exp(-dt / (params.r2 * params.c2));
    next.v_rc1 = state.v_rc1 * a1 + params.r1 * (1.0 - a1) * current;
    next.v_rc2 = state.v_rc2 * a2 + params.r2 * (1.0 - a2) * current;
    return next;
}

double terminal_voltage(const BatteryState& state, double current,
                        const BatteryParams& params, const OcvCurve& ocv) {
    return ocv.value(state.soc) + state.v_rc1 + state.v_rc2 +
           params.r0 * current;
}

double terminal_voltage(const BatteryState& state, double current,
                        const BatteryParams& params) {
    return terminal_voltage(state, current, params, OcvCurve(params.ocv_table));
}

TimeSeriesTrace run_cccv(const BatteryParams& params, double i_cc,
                         double soc0, double dt, double t_end) {
    if (soc0 < 0.0 || soc0 > 1.0)
        throw std::domain_error("run_cccv: soc0 outside [0,1]");
    if (i_cc <= 0.0) throw std::domain_error("run_cccv: i_cc must be > 0");
    if (dt <= 0.0) throw std::domain_error("run_cccv: dt must be > 0");

    const OcvCurve ocv(params.ocv_table);
    TimeSeriesTrace trace;
    trace.dt = dt;
    BatteryState state{soc0, 0.0, 0.0};
    bool cv_phase = false;

    const long n_steps = static_cast<long>(std::floor(t_end / dt)) + 1;
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        double current = i_cc;
        double v = terminal_voltage(state, current, params, ocv);
        if (!cv_phase && v >= params.v_max) cv_phase = true;
        if (cv_phase) {
            // Affine solve: OCV(soc) + v_rc1 + v_rc2 + r0*I = v_max.
            current = (params.v_max - ocv.value(state.soc) - state.v_rc1 -
                       state.v_rc2) /
                      params.r0;
            if (current < params.i_cutoff) break;
            v = params.v_max;
        }
        TraceRow row;
        row.t = t;
        row.current = current;
        row.soc_true = state.soc;
        row.v_true = v;
        row.v_meas = v;
        trace.rows.push_back(row);
        state = step_ecm(state, current, params, dt);
    }
    return trace;
}

BatteryParams age_params(const BatteryParams& params, double aging_factor,
                         bool scale_rc) {
    if (aging_factor < 1.0)
        throw std::domain_error("age_params: aging_factor must be >= 1");
    BatteryParams aged = params;
    aged.r0 *= aging_factor;
    if (scale_rc) {
        aged.r1 *= aging_factor;
        aged.r2 *= aging_factor;
    }
    return aged;
}

}  // namespace voltguard
