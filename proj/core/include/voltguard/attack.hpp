#pragma once

#include <optional>
#include <string>

#include "voltguard/trace.hpp"

namespace voltguard {

enum class AttackKind { none, dos_hold, fdi_bias };

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

/// Additive sensor attack on the voltage measurement channel.
/// The interval is half-open [t_start, t_end); an absent t_end means the
/// attack holds to the end of the trace.
struct AttackSpec {
    AttackKind kind = AttackKind::none;
    double t_start = 0.0;
    std::optional<double> t_end;
    double bias = 0.0;         // volts, fdi_bias only
    double detect_delay = 0.0; // seconds before the estimator reacts

    void validate() const;
};

/// Returns a copy of the trace with v_meas corrupted on the attack
/// interval; v_true is untouched. dos_hold freezes v_meas at the last
/// sample strictly before t_start; fdi_bias adds spec.bias.
/// Throws std::domain_error if t_start precedes the trace start.
TimeSeriesTrace apply_attack(const TimeSeriesTrace& trace,
                             const AttackSpec& spec);

/// True iff the attack is physically present at time t.
bool attack_active(double t, const AttackSpec& spec);

/// True iff the (oracle) detector has flagged the attack at time t,
/// i.e. attack_active shifted by detect_delay.
bool detection_active(double t, const AttackSpec& spec);

}  // namespace voltguard
