#include "voltguard/metrics.hpp"

#include <cmath>
#include <sstream>

namespace voltguard {

namespace {

EstimatorMetrics score(const TimeSeriesTrace& trace,
                       const std::vector<std::optional<double>>& est,
                       const AttackSpec& attack) {
    EstimatorMetrics m;
    double sse = 0.0, maxabs = 0.0;
    double sse_a = 0.0, maxabs_a = 0.0, sum_a = 0.0;
    std::size_t count = 0, count_a = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!est[i]) continue;
        const double err = *est[i] - trace.rows[i].v_true;
        sse += err * err;
        maxabs = std::max(maxabs, std::abs(err));
        ++count;
        if (attack_active(trace.rows[i].t, attack)) {
            sse_a += err * err;
            maxabs_a = std::max(maxabs_a, std::abs(err));
            sum_a += err;
            ++count_a;
        }
    }
    if (count > 0) {
        m.rmse_all = std::sqrt(sse / static_cast<double>(count));
        m.maxabs_all = maxabs;
    }
    if (count_a > 0 && attack.kind != AttackKind::none) {
        m.rmse_attack = std::sqrt(sse_a / static_cast<double>(count_a));
        m.maxabs_attack = maxabs_a;
        m.mean_err_attack = sum_a / static_cast<double>(count_a);
    }
    return m;
}

}  // namespace

MetricsReport compute_metrics(
    const TimeSeriesTrace& trace, const AttackSpec& attack,
    const std::map<std::string, std::vector<std::optional<double>>>&
        extra_columns) {
    MetricsReport report;
    const std::size_t n = trace.size();

    std::map<std::string, std::vector<std::optional<double>>> columns =
        extra_columns;
    auto& corrupt = columns["corrupt_meas"];
    corrupt.resize(n);
    for (std::size_t i = 0; i < n; ++i) corrupt[i] = trace.rows[i].v_meas;
    auto add_optional = [&](const char* name, auto getter) {
        std::vector<std::optional<double>> col(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = getter(trace.rows[i]);
            any = any || col[i].has_value();
        }
        if (any) columns[name] = std::move(col);
    };
    add_optional("v_pred", [](const TraceRow& r) { return r.v_pred; });
    add_optional("secure", [](const TraceRow& r) { return r.v_hat; });
    add_optional("open_loop", [](const TraceRow& r) { return r.v_openloop; });
    add_optional("closed_loop",
                 [](const TraceRow& r) { return r.v_closedloop; });

    for (const auto& [name, col] : columns)
        report.estimators[name] = score(trace, col, attack);

    if (attack.kind != AttackKind::none) {
        for (const auto& row : trace.rows) {
            if (attack_active(row.t, attack)) {
                report.soc_at_onset = row.soc_cc;
                break;
            }
        }
    }
    int prev_region = 0;
    for (const auto& row : trace.rows) {
        if (prev_region != 0 && row.region > prev_region)
            report.region_switches.emplace_back(row.t, row.region);
        prev_region = row.region;
    }
    return report;
}

std::string format_report(const MetricsReport& report) {
    std::ostringstream out;
    out.precision(9);
    out << "estimator            rmse_all     maxabs_all   rmse_attack  "
           "maxabs_attack mean_err_attack\n";
    for (const auto& [name, m] : report.estimators) {
        out << name;
        for (std::size_t i = name.size(); i < 21; ++i) out << ' ';
        out << m.rmse_all << "  " << m.maxabs_all;
        if (m.rmse_attack)
            out << "  " << *m.rmse_attack << "  " << *m.maxabs_attack << "  "
                << *m.mean_err_attack;
        out << "\n";
    }
    if (report.soc_at_onset)
        out << "soc_at_attack_onset " << *report.soc_at_onset << "\n";
    for (const auto& [t, region] : report.region_switches)
        out << "region_switch t=" << t << " -> " << region << "\n";
    return out.str();
}

}  // namespace voltguard
