#include "voltguard/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "voltguard/errors.hpp"

namespace voltguard {

SlidingKoopmanEstimator::SlidingKoopmanEstimator(WindowConfig cfg,
                                                 FeedbackPolicy policy,
                                                 const OcvCurve* ocv,
                                                 const GprBank* bank)
    : cfg_(cfg), policy_(policy), ocv_(ocv), bank_(bank) {
    cfg_.validate();
    if (ocv_ == nullptr)
        throw ConfigError("estimator needs an OCV curve");
    if (policy_ == FeedbackPolicy::gpr && bank_ == nullptr)
        throw ConfigError("GPR corrector selected but no model bank loaded");
}

EstimatorOutputs SlidingKoopmanEstimator::run(const EstimatorInputs& in) {
    const int n = static_cast<int>(in.v_meas.size());
    if (static_cast<int>(in.currents.size()) != n ||
        static_cast<int>(in.soc_cc.size()) != n ||
        static_cast<int>(in.attack_flags.size()) != n)
        throw std::domain_error("estimator inputs misaligned");

    const int d = cfg_.embed_depth;
    const int sl = cfg_.s_learn;
    const int slide = cfg_.slide();

    EstimatorOutputs out;
    out.v_pred.resize(static_cast<std::size_t>(n));
    out.v_hat.resize(static_cast<std::size_t>(n));
    out.e1.resize(static_cast<std::size_t>(n));
    out.region.resize(static_cast<std::size_t>(n));

    auto measured = [&](int t) {
        if (access_log_) access_log_->push_back(t);
        return in.v_meas[static_cast<std::size_t>(t)];
    };

    std::vector<double> fb(static_cast<std::size_t>(n), 0.0);
    KoopmanModel model;
    bool have_model = false;
    std::vector<double> group_residuals;
    std::optional<double> last_window_e1;
    CorrectionState ctx;
    bool attack_started = false;

    for (int t = 0; t < n; ++t) {
        const bool flag = in.attack_flags[static_cast<std::size_t>(t)];
        const double soc = in.soc_cc[static_cast<std::size_t>(t)];
        out.region[static_cast<std::size_t>(t)] = soc_region(soc);

        if (t >= sl && (t - sl) % slide == 0) {
            // The previous prediction cycle is complete; a fully nominal
            // cycle refreshes the stage I error estimate.
            if (static_cast<int>(group_residuals.size()) == slide)
                last_window_e1 = stage1_error(group_residuals);
            if (!flag) group_residuals.clear();

            bool window_flagged = false;
            for (int k = t - sl; k < t && !window_flagged; ++k)
                window_flagged = in.attack_flags[static_cast<std::size_t>(k)];
            if (refit_during_attack_ || !window_flagged || !have_model) {
                FeedbackStacks stacks;
                stacks.voltage_stack.assign(fb.begin() + (t - sl),
                                            fb.begin() + t);
                stacks.input_stack.reserve(static_cast<std::size_t>(sl));
                for (int k = t - sl; k < t; ++k)
                    stacks.input_stack.push_back(
                        {in.currents[static_cast<std::size_t>(k)],
                         in.soc_cc[static_cast<std::size_t>(k)]});
                model = fit_koopman(stacks, cfg_);
                have_model = true;
            }
        }

        if (!have_model) {
            if (flag)
                throw NumericError(
                    "attack flagged at t index " + std::to_string(t) +
                    " before the first learning window completed");
            fb[static_cast<std::size_t>(t)] = measured(t);
            continue;
        }

        // One-step prediction from the feedback stack's latest embedding.
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i)
            z(i) = fb[static_cast<std::size_t>(t - d + i)];
        const Eigen::Vector2d u(in.currents[static_cast<std::size_t>(t - 1)],
                                in.soc_cc[static_cast<std::size_t>(t - 1)]);
        const double v_p = model.c_row.dot(model.a_mat * z + model.b_mat * u);
        out.v_pred[static_cast<std::size_t>(t)] = v_p;

        if (!flag) {
            attack_started = false;
            fb[static_cast<std::size_t>(t)] = measured(t);
            group_residuals.push_back(fb[static_cast<std::size_t>(t)] - v_p);
            out.e1[static_cast<std::size_t>(t)] = last_window_e1;
            continue;
        }

        if (!attack_started) {
            ctx = CorrectionState{};
            ctx.mode = policy_ == FeedbackPolicy::empirical
                           ? CorrectorMode::empirical
                           : CorrectorMode::gpr;
            if (last_window_e1)
                ctx.e1 = *last_window_e1;
            else if (!group_residuals.empty())
                ctx.e1 = stage1_error(group_residuals);
            ctx.region = soc_region(soc);
            // seed the OCV trackers from the two preceding samples
            ocv_differences(
                ctx, ocv_->value(in.soc_cc[static_cast<std::size_t>(t - 2)]));
            ocv_differences(
                ctx, ocv_->value(in.soc_cc[static_cast<std::size_t>(t - 1)]));
            attack_started = true;
        }

        double v_hat = 0.0, fb_val = 0.0;
        switch (policy_) {
            case FeedbackPolicy::stage1: {
                v_hat = v_p + ctx.e1;
                fb_val = v_hat;
                break;
            }
            case FeedbackPolicy::empirical: {
                const auto diffs = ocv_differences(ctx, ocv_->value(soc));
                const int j_new = soc_region(soc);
                if (j_new < ctx.region)
                    throw std::domain_error(
                        "backward SOC region switch during attack (discharge "
                        "is out of scope)");
                while (j_new > ctx.region) {
                    ctx.e1 = region_switch_update(ctx.e1, soc, diffs[0],
                                                  diffs[1], ctx.region,
                                                  ctx.region + 1);
                    ++ctx.region;
                }
                const double e2 =
                    empirical_e2(ctx.e1, soc, diffs[0], diffs[1]);
                v_hat = v_p + e2;
                fb_val = v_hat;
                break;
            }
            case FeedbackPolicy::gpr: {
                const int j = soc_region(soc);
                const auto it = bank_->find(j);
                if (it == bank_->end()) {
                    std::string have;
                    for (const auto& [r, m] : *bank_)
                        have += (have.empty() ? "" : ", ") + std::to_string(r);
                    throw ConfigError("no GPR model for SOC region " +
                                      std::to_string(j) +
                                      " (available: " + have + ")");
                }
                const double v_bar = v_p + ctx.e1;
                Eigen::VectorXd x(4);
                x << in.currents[static_cast<std::size_t>(t)], soc, v_bar,
                    ctx.e1;
                const double y_hat = gpr_predict_mean(it->second, x);
                v_hat = v_bar - y_hat;
                fb_val = v_bar;
                break;
            }
        }
        if (!std::isfinite(v_hat))
            throw NumericError("secure estimate diverged at t index " +
                               std::to_string(t));
        fb[static_cast<std::size_t>(t)] = fb_val;
        out.v_hat[static_cast<std::size_t>(t)] = v_hat;
        out.e1[static_cast<std::size_t>(t)] = ctx.e1;
    }
    return out;
}

std::map<int, std::pair<Eigen::MatrixXd, Eigen::VectorXd>>
build_gpr_training_set(const TimeSeriesTrace& nominal_trace,
                       const WindowConfig& koopman_cfg, const OcvCurve& ocv,
                       double capacity_ah, double soc0, int n_max) {
    const int n = static_cast<int>(nominal_trace.size());
    if (n < koopman_cfg.s_total)
        throw std::domain_error(
            "build_gpr_training_set: trace shorter than one sliding window");
    if (n_max < 1)
        throw std::domain_error("build_gpr_training_set: n_max must be >= 1");

    EstimatorInputs in;
    in.dt = nominal_trace.dt;
    in.currents.reserve(static_cast<std::size_t>(n));
    in.v_meas.reserve(static_cast<std::size_t>(n));
    in.soc_cc.reserve(static_cast<std::size_t>(n));
    double soc = soc0;
    for (int t = 0; t < n; ++t) {
        const auto& row = nominal_trace.rows[static_cast<std::size_t>(t)];
        if (t > 0)
            soc = coulomb_count(
                soc, nominal_trace.rows[static_cast<std::size_t>(t - 1)].current,
                nominal_trace.dt, capacity_ah);
        in.currents.push_back(row.current);
        in.v_meas.push_back(row.v_true);
        in.soc_cc.push_back(soc);
        // force self-learning after the first full prediction cycle
        in.attack_flags.push_back(t >= koopman_cfg.s_total);
    }

    SlidingKoopmanEstimator est(koopman_cfg, FeedbackPolicy::stage1, &ocv);
    const EstimatorOutputs outs = est.run(in);

    std::map<int, std::vector<std::pair<Eigen::Vector4d, double>>> by_region;
    for (int t = koopman_cfg.s_total; t < n; ++t) {
        const auto& v_bar = outs.v_hat[static_cast<std::size_t>(t)];
        const auto& e1 = outs.e1[static_cast<std::size_t>(t)];
        if (!v_bar || !e1) continue;
        Eigen::Vector4d x;
        x << in.currents[static_cast<std::size_t>(t)],
            in.soc_cc[static_cast<std::size_t>(t)], *v_bar, *e1;
        const double target =
            *v_bar - nominal_trace.rows[static_cast<std::size_t>(t)].v_true;
        by_region[outs.region[static_cast<std::size_t>(t)]].emplace_back(
            x, target);
    }

    std::map<int, std::pair<Eigen::MatrixXd, Eigen::VectorXd>> datasets;
    for (const auto& [region, rows] : by_region) {
        const int count = static_cast<int>(rows.size());
        const int stride = (count + n_max - 1) / n_max;
        std::vector<int> keep;
        for (int i = 0; i < count; i += stride) keep.push_back(i);
        Eigen::MatrixXd x(static_cast<int>(keep.size()), 4);
        Eigen::VectorXd y(static_cast<int>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            x.row(static_cast<int>(i)) =
                rows[static_cast<std::size_t>(keep[i])].first.transpose();
            y(static_cast<int>(i)) =
                rows[static_cast<std::size_t>(keep[i])].second;
        }
        datasets[region] = {x, y};
    }
    return datasets;
}

}  // namespace voltguard
