#include "voltguard/correction.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace voltguard {

int soc_region(double soc) {
    if (soc < 0.0 || soc > 1.0)
        throw std::domain_error("soc_region: soc outside [0,1]");
    int j = 1;
    for (double b : RegionTable::boundaries)
        if (soc >= b) ++j;
    return j;
}

std::array<double, 3> RegionTable::l_funcs(int j, double soc) const {
    switch (j) {
        case 1: return {1.0 - soc, 0.0, 0.0};
        case 2: return {soc, 1.0 - soc, soc};
        case 3: return {1.0 - soc, 1.0 - soc, soc};
        case 4: return {soc, 1.0 - soc, soc};
        case 5: return {1.0 - soc, 1.0 - soc, soc};
        case 6: return {soc, 1.0 - soc, soc};
        default:
            throw std::domain_error("RegionTable: region index " +
                                    std::to_string(j) + " out of range");
    }
}

std::array<double, 3> RegionTable::m_funcs(int j_prev, double soc) const {
    switch (j_prev) {
        case 1: return {soc, soc, soc};
        case 2: return {1.0, 1.0 - soc, soc};
        case 3: return {soc - 1.0, 1.0 - soc, soc};
        case 4: return {1.0, 0.0, 0.0};
        case 5: return {1.0 - soc, soc, soc};
        default:
            throw std::domain_error("RegionTable: no switch row for " +
                                    std::to_string(j_prev) + " -> " +
                                    std::to_string(j_prev + 1));
    }
}

std::array<double, 2> ocv_differences(CorrectionState& state, double ocv_now) {
    double docv = 0.0, d2ocv = 0.0;
    if (state.samples_seen >= 1) docv = ocv_now - state.ocv_prev;
    if (state.samples_seen >= 2) d2ocv = docv - state.docv_prev;
    state.ocv_prev = ocv_now;
    state.docv_prev = docv;
    ++state.samples_seen;
    return {docv, d2ocv};
}

double stage1_error(const std::vector<double>& nominal_residuals) {
    if (nominal_residuals.empty())
        throw std::domain_error("stage1_error: empty residual list");
    const double sum = std::accumulate(nominal_residuals.begin(),
                                       nominal_residuals.end(), 0.0);
    return sum / static_cast<double>(nominal_residuals.size());
}

double empirical_e2(double e1, double soc, double docv, double d2ocv,
                    const RegionTable& table) {
    const auto l = table.l_funcs(soc_region(soc), soc);
    return l[0] * e1 + l[1] * docv + l[2] * d2ocv;
}

double region_switch_update(double e1_prev, double soc, double docv,
                            double d2ocv, int j_prev, int j_new,
                            const RegionTable& table) {
    if (j_new != j_prev + 1)
        throw std::domain_error(
            "region_switch_update: only forward adjacent switches are defined");
    const auto m = table.m_funcs(j_prev, soc);
    return m[0] * e1_prev + m[1] * docv + m[2] * d2ocv;
}

}  // namespace voltguard
