#pragma once

#include <array>
#include <vector>

namespace voltguard {

/// SOC region boundaries and the per-region / per-switch coefficient
/// functions of the empirical stage II corrector.
struct RegionTable {
    static constexpr std::array<double, 5> boundaries{0.40, 0.66, 0.73,
                                                      0.75, 0.86};

    /// (l1, l2, l3) for region j in {1..6} evaluated at soc.
    std::array<double, 3> l_funcs(int j, double soc) const;

    /// (m1, m2, m3) for the forward switch j_prev -> j_prev+1 at soc.
    /// Throws std::domain_error for a switch without a table row.
    std::array<double, 3> m_funcs(int j_prev, double soc) const;
};

/// Region index j in {1..6}; half-open intervals, lower bound inclusive,
/// soc = 1 in region 6. Throws std::domain_error outside [0,1].
int soc_region(double soc);

enum class CorrectorMode { empirical, gpr };

/// Running state of the secure estimator's correction chain: the stage I
/// error, the current SOC region, and the OCV finite-difference trackers.
struct CorrectionState {
    double e1 = 0.0;
    int region = 1;
    double ocv_prev = 0.0;
    double docv_prev = 0.0;
    int samples_seen = 0;  // first two samples emit zero differences
    CorrectorMode mode = CorrectorMode::empirical;
};

/// Per-step OCV finite differences from the Coulomb-counted SOC's OCV.
/// Returns (docv, d2ocv) and advances the trackers in state. By
/// convention docv is zero at the first sample and d2ocv at the first
/// two, until the trackers warm up.
std::array<double, 2> ocv_differences(CorrectionState& state, double ocv_now);

/// Stage I error: arithmetic mean of the nominal prediction residuals
/// V_nom - V_p over the most recent prediction window.
/// Throws std::domain_error on an empty list.
double stage1_error(const std::vector<double>& nominal_residuals);

/// Stage II empirical correction E2 = l1(soc)*e1 + l2(soc)*docv +
/// l3(soc)*d2ocv with the region-j coefficient row.
double empirical_e2(double e1, double soc, double docv, double d2ocv,
                    const RegionTable& table = {});

/// Stage I error update when charging crosses from region j_prev into
/// j_new = j_prev + 1. Throws std::domain_error for non-adjacent or
/// backward switches (discharge is out of scope).
double region_switch_update(double e1_prev, double soc, double docv,
                            double d2ocv, int j_prev, int j_new,
                            const RegionTable& table = {});

}  // namespace voltguard
