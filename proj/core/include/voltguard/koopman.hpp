#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace voltguard {

/// Sliding-window geometry for the online Koopman learner.
/// A window of s_total samples splits into a learning window of s_learn
/// samples and a prediction horizon of s_total - s_learn samples; the
/// window slides by s_total - s_learn - 1 after each prediction cycle.
struct WindowConfig {
    int s_total = 51;
    int s_learn = 40;
    int embed_depth = 5;
    double ridge = 1e-8;

    int slide() const { return s_total - s_learn - 1; }
    int horizon() const { return s_total - s_learn; }

    /// Throws ConfigError unless s_learn < s_total, slide() >= 1,
    /// embed_depth >= 1, s_learn - embed_depth >= embed_depth + 2 and
    /// ridge >= 0.
    void validate() const;
};

/// Finite-dimensional linear voltage model over delay-embedded
/// coordinates: z(k+1) = A z(k) + B u(k), V_p(k) = C z(k). C is a fixed
/// selector of the most recent delay coordinate.
struct KoopmanModel {
    Eigen::MatrixXd a_mat;     // d x d
    Eigen::MatrixXd b_mat;     // d x 2, inputs (current, soc)
    Eigen::RowVectorXd c_row;  // 1 x d, e_d^T
};

/// Learning-window data: voltages to be delay-embedded (measurements
/// under nominal operation, secure estimates under attack) plus the
/// trusted (current, soc) input sequence aligned sample-for-sample.
struct FeedbackStacks {
    std::vector<double> voltage_stack;
    std::vector<std::array<double, 2>> input_stack;
};

/// Coulomb counting on the trusted current channel:
/// soc' = soc + dt*current / (3600*capacity), clamped to [0,1].
double coulomb_count(double soc_prev, double current, double dt,
                     double capacity_ah);

/// Paired Hankel snapshot matrices of depth-d delay embeddings.
/// Columns of z_now are z(k) = [V(k-d+1),...,V(k)]^T, z_next the shifted
/// embeddings z(k+1); column count = len(voltages) - d.
/// Throws std::domain_error when the series is shorter than d+1.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
build_hankel(const std::vector<double>& voltages, int embed_depth);

/// Ridge least-squares fit of [A B] over the learning-window snapshot
/// pairs, solved through an SVD of the stacked regressor (relative
/// singular-value cutoff 1e-10 when ridge == 0). Deterministic.
/// Throws std::domain_error when fewer than embed_depth + 2 snapshot
/// pairs are available.
KoopmanModel fit_koopman(const FeedbackStacks& stacks,
                         const WindowConfig& cfg);

/// Rolls z forward `horizon` steps via z <- A z + B u, emitting C z after
/// each step. inputs[i] is the input at the step being advanced from.
std::vector<double> predict_horizon(const KoopmanModel& model,
                                    const Eigen::VectorXd& init_embedding,
                                    const std::vector<std::array<double, 2>>& inputs,
                                    int horizon);

/// Next window start after one prediction cycle.
int advance_window(int window_start, const WindowConfig& cfg);

/// Feedback selection for the learning window: measurements under nominal
/// operation, secure estimates under attack. The per-sample overload
/// splices a window that straddles the attack onset.
std::vector<double> select_feedback(bool attack_flag,
                                    const std::vector<double>& measurements,
                                    const std::vector<double>& secure_estimates);
std::vector<double> select_feedback(const std::vector<bool>& attack_flags,
                                    const std::vector<double>& measurements,
                                    const std::vector<double>& secure_estimates);

}  // namespace voltguard
