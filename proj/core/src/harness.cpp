#include "voltguard/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "voltguard/csv.hpp"
#include "voltguard/errors.hpp"
#include "voltguard/estimator.hpp"
#include "voltguard/gpr.hpp"
#include "voltguard/observers.hpp"

namespace voltguard {

namespace {

/// CCCV plant whose controller reads the corrupted measurement instead of
/// the true voltage: the CC->CV switch triggers on v_meas, the CV phase
/// regulates v_meas to v_max, and under a DoS hold the controller keeps
/// the last commanded current (a frozen reading carries no feedback).
TimeSeriesTrace run_cccv_corrupt_feedback(const BatteryParams& params,
                                          const ScenarioConfig& cfg) {
    const OcvCurve ocv(params.ocv_table);
    TimeSeriesTrace trace;
    trace.dt = cfg.dt;
    BatteryState state{cfg.soc0, 0.0, 0.0};
    bool cv_phase = false;
    double held = 0.0;
    bool have_held = false;
    double last_current = cfg.i_cc;

    const long n_steps = static_cast<long>(std::floor(cfg.t_end / cfg.dt)) + 1;
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const bool attacked = attack_active(t, cfg.attack);
        double current = cv_phase ? last_current : cfg.i_cc;

        if (cv_phase && !(attacked && cfg.attack.kind == AttackKind::dos_hold)) {
            const double bias =
                attacked && cfg.attack.kind == AttackKind::fdi_bias
                    ? cfg.attack.bias
                    : 0.0;
            current = (params.v_max - bias - ocv.value(state.soc) -
                       state.v_rc1 - state.v_rc2) /
                      params.r0;
            if (current < params.i_cutoff) break;
        }
        double v_true = terminal_voltage(state, current, params, ocv);
        double v_meas = v_true;
        if (attacked) {
            if (cfg.attack.kind == AttackKind::dos_hold)
                v_meas = have_held ? held : v_true;
            else
                v_meas = v_true + cfg.attack.bias;
        } else {
            held = v_true;
            have_held = true;
        }
        if (!cv_phase && v_meas >= params.v_max) {
            cv_phase = true;
            if (state.soc >= 1.0) break;
        }
        TraceRow row;
        row.t = t;
        row.current = current;
        row.soc_true = state.soc;
        row.v_true = v_true;
        row.v_meas = v_meas;
        trace.rows.push_back(row);
        last_current = current;
        state = step_ecm(state, current, params, cfg.dt);
        if (state.soc >= 1.0 && !cv_phase && attacked) {
            // overcharged to full under attack; stop the run
            break;
        }
    }
    return trace;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const BatteryParams fresh = cfg.battery;
    const BatteryParams plant =
        age_params(fresh, cfg.aging_factor, cfg.aging_scales_rc);
    const OcvCurve ocv(fresh.ocv_table);

    TimeSeriesTrace trace;
    if (cfg.charge_feedback == "corrupt") {
        trace = run_cccv_corrupt_feedback(plant, cfg);
    } else {
        trace = run_cccv(plant, cfg.i_cc, cfg.soc0, cfg.dt, cfg.t_end);
        trace = apply_attack(trace, cfg.attack);
    }
    const int n = static_cast<int>(trace.size());
    if (n == 0) throw ConfigError("scenario produced an empty trace");

    // trusted-channel SOC and the oracle detection flag
    EstimatorInputs in;
    in.dt = cfg.dt;
    double soc = cfg.soc0;
    for (int t = 0; t < n; ++t) {
        auto& row = trace.rows[static_cast<std::size_t>(t)];
        if (t > 0)
            soc = coulomb_count(
                soc, trace.rows[static_cast<std::size_t>(t - 1)].current,
                cfg.dt, fresh.capacity_ah);
        row.soc_cc = soc;
        row.region = soc_region(soc);
        row.attack_active = attack_active(row.t, cfg.attack);
        in.currents.push_back(row.current);
        in.v_meas.push_back(row.v_meas);
        in.soc_cc.push_back(soc);
        in.attack_flags.push_back(detection_active(row.t, cfg.attack));
    }

    std::map<std::string, std::vector<std::optional<double>>> extra;

    if (cfg.estimators_enabled.count("secure")) {
        GprBank bank;
        const GprBank* bank_ptr = nullptr;
        FeedbackPolicy policy = FeedbackPolicy::empirical;
        if (cfg.corrector == CorrectorMode::gpr) {
            bank = load_gpr_bank(*cfg.gpr_model_dir);
            bank_ptr = &bank;
            policy = FeedbackPolicy::gpr;
        }
        SlidingKoopmanEstimator est(cfg.koopman, policy, &ocv, bank_ptr);
        const EstimatorOutputs outs = est.run(in);
        for (int t = 0; t < n; ++t) {
            auto& row = trace.rows[static_cast<std::size_t>(t)];
            row.v_pred = outs.v_pred[static_cast<std::size_t>(t)];
            row.e1 = outs.e1[static_cast<std::size_t>(t)];
            row.v_hat = outs.v_hat[static_cast<std::size_t>(t)];
        }
    }

    if (cfg.estimators_enabled.count("stage1_only")) {
        SlidingKoopmanEstimator est(cfg.koopman, FeedbackPolicy::stage1, &ocv);
        const EstimatorOutputs outs = est.run(in);
        extra["stage1_only"] = outs.v_hat;
        if (!cfg.estimators_enabled.count("secure")) {
            for (int t = 0; t < n; ++t) {
                auto& row = trace.rows[static_cast<std::size_t>(t)];
                row.v_pred = outs.v_pred[static_cast<std::size_t>(t)];
                row.e1 = outs.e1[static_cast<std::size_t>(t)];
            }
        }
    }

    const BatteryParams observer_params = cfg.observer_fresh_model ? fresh : plant;
    const BatteryState init{cfg.soc0, 0.0, 0.0};
    if (cfg.estimators_enabled.count("open_loop")) {
        const auto v = open_loop_observe(observer_params, trace, init);
        for (int t = 0; t < n; ++t)
            trace.rows[static_cast<std::size_t>(t)].v_openloop =
                v[static_cast<std::size_t>(t)];
    }
    if (cfg.estimators_enabled.count("closed_loop")) {
        validate_observer_gain(observer_params, cfg.observer_gain, cfg.i_cc,
                               cfg.soc0, cfg.dt);
        const auto v =
            closed_loop_observe(observer_params, trace, init, cfg.observer_gain);
        for (int t = 0; t < n; ++t)
            trace.rows[static_cast<std::size_t>(t)].v_closedloop =
                v[static_cast<std::size_t>(t)];
    }

    ScenarioResult result;
    result.report = compute_metrics(trace, cfg.attack, extra);
    result.trace = std::move(trace);
    return result;
}

std::string emit_outputs(const ScenarioResult& result,
                         const ScenarioConfig& cfg, bool plot) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + cfg.output_dir +
                          ": " + ec.message());
    const auto trace_path = fs::path(cfg.output_dir) / "trace.csv";
    write_trace_csv(result.trace, trace_path.string());
    const auto report_path = fs::path(cfg.output_dir) / "report.txt";
    std::ofstream report(report_path);
    if (!report) throw ConfigError("cannot write " + report_path.string());
    report << format_report(result.report);
    if (plot)
        write_trace_svg(result.trace,
                        (fs::path(cfg.output_dir) / "trace.svg").string());
    return trace_path.string();
}

}  // namespace voltguard
