#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "voltguard/battery.hpp"
#include "voltguard/correction.hpp"
#include "voltguard/gpr.hpp"
#include "voltguard/koopman.hpp"
#include "voltguard/trace.hpp"

namespace voltguard {

/// What the estimator feeds back into its data stack once the attack flag
/// is raised (before onset the stack always holds measurements).
enum class FeedbackPolicy {
    stage1,     // V_p + E1 (stage I correction only)
    empirical,  // V_p + E2 via the OCV-map corrector
    gpr,        // stack gets V_p + E1; reported estimate is V_p + E2 (GPR)
};

struct EstimatorInputs {
    double dt = 1.0;
    std::vector<double> currents;
    std::vector<double> v_meas;
    std::vector<double> soc_cc;       // Coulomb-counted, trusted
    std::vector<bool> attack_flags;   // detector output per sample
};

struct EstimatorOutputs {
    std::vector<std::optional<double>> v_pred;  // Koopman prediction V_p
    std::vector<std::optional<double>> v_hat;   // secure estimate, attack only
    std::vector<std::optional<double>> e1;      // stage I error in effect
    std::vector<int> region;                    // SOC region per sample
};

/// Online sliding-window Koopman voltage estimator (one scenario, one
/// sequential state machine). Learns on the feedback stack, emits a
/// prediction every step past the first learning window, refits every
/// slide() steps, and switches to self-learning feedback with two-stage
/// error compensation while the attack flag is raised.
class SlidingKoopmanEstimator {
public:
    SlidingKoopmanEstimator(WindowConfig cfg, FeedbackPolicy policy,
                            const OcvCurve* ocv, const GprBank* bank = nullptr);

    EstimatorOutputs run(const EstimatorInputs& in);

    /// When set, records every index of in.v_meas the estimator reads.
    void set_measurement_access_log(std::vector<int>* log) { access_log_ = log; }

    /// Refit policy while the attack flag is raised. When false the model
    /// from the last fully measured learning window stays in force.
    void set_refit_during_attack(bool refit) { refit_during_attack_ = refit; }

private:
    WindowConfig cfg_;
    bool refit_during_attack_ = true;
    FeedbackPolicy policy_;
    const OcvCurve* ocv_;
    const GprBank* bank_;
    std::vector<int>* access_log_ = nullptr;
};

/// Per-region GPR training data generated from a nominal trace by forcing
/// self-learning (stage I feedback) after the first prediction cycle.
/// Rows are features (current, soc, v_bar_p, e1) with target
/// v_bar_p - v_nom; each region is subsampled to at most n_max rows,
/// stratified in time. Throws std::domain_error when the trace is shorter
/// than one sliding window.
std::map<int, std::pair<Eigen::MatrixXd, Eigen::VectorXd>>
build_gpr_training_set(const TimeSeriesTrace& nominal_trace,
                       const WindowConfig& koopman_cfg, const OcvCurve& ocv,
                       double capacity_ah, double soc0, int n_max = 2000);

}  // namespace voltguard
