#include "voltguard/attack.hpp"

#include <stdexcept>

#include "voltguard/errors.hpp"

namespace voltguard {

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::none: return "none";
        case AttackKind::dos_hold: return "dos_hold";
        case AttackKind::fdi_bias: return "fdi_bias";
    }
    return "none";
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::none;
    if (s == "dos_hold") return AttackKind::dos_hold;
    if (s == "fdi_bias") return AttackKind::fdi_bias;
    throw ConfigError("unknown attack.kind '" + s + "'");
}

void AttackSpec::validate() const {
    if (t_end && *t_end <= t_start)
        throw ConfigError("attack.t_end must be > attack.t_start");
    if (detect_delay < 0.0)
        throw ConfigError("attack.detect_delay must be >= 0");
}

bool attack_active(double t, const AttackSpec& spec) {
    if (spec.kind == AttackKind::none) return false;
    if (t < spec.t_start) return false;
    return !spec.t_end || t < *spec.t_end;
}

bool detection_active(double t, const AttackSpec& spec) {
    return attack_active(t - spec.detect_delay, spec) && attack_active(t, spec);
}

TimeSeriesTrace apply_attack(const TimeSeriesTrace& trace,
                             const AttackSpec& spec) {
    if (trace.empty()) throw std::domain_error("apply_attack: empty trace");
    TimeSeriesTrace out = trace;
    if (spec.kind == AttackKind::none) return out;
    if (spec.t_start < trace.rows.front().t)
        throw std::domain_error("apply_attack: t_start before trace start");

    double held = trace.rows.front().v_true;
    for (auto& row : out.rows) {
        if (!attack_active(row.t, spec)) {
            if (row.t < spec.t_start) held = row.v_true;
            continue;
        }
        if (spec.kind == AttackKind::dos_hold) {
            row.v_meas = held;
        } else {
            // additive, so a double application is observable in tests
            row.v_meas += spec.bias;
        }
    }
    return out;
}

}  // namespace voltguard
