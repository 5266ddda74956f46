#include "voltguard/koopman.hpp"

#include <algorithm>
#include <stdexcept>

#include "voltguard/errors.hpp"

namespace voltguard {

void WindowConfig::validate() const {
    if (embed_depth < 1) throw ConfigError("koopman.embed_depth must be >= 1");
    if (s_learn >= s_total)
        throw ConfigError("koopman.s_learn must be < koopman.s_total");
    if (slide() < 1) throw ConfigError("koopman window slide must be >= 1");
    if (s_learn - embed_depth < embed_depth + 2)
        throw ConfigError(
            "koopman.s_learn too short: need s_learn - embed_depth >= "
            "embed_depth + 2 snapshot pairs");
    if (ridge < 0.0) throw ConfigError("koopman.ridge must be >= 0");
}

double coulomb_count(double soc_prev, double current, double dt,
                     double capacity_ah) {
    return std::clamp(soc_prev + dt * current / (3600.0 * capacity_ah), 0.0,
                      1.0);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
build_hankel(const std::vector<double>& voltages, int embed_depth) {
    const int n = static_cast<int>(voltages.size());
    const int d = embed_depth;
    if (d < 1) throw std::domain_error("build_hankel: embed_depth must be >= 1");
    if (n < d + 1)
        throw std::domain_error("build_hankel: series shorter than depth + 1");
    const int m = n - d;
    Eigen::MatrixXd z_now(d, m), z_next(d, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < d; ++i) {
            z_now(i, j) = voltages[static_cast<std::size_t>(j + i)];
            z_next(i, j) = voltages[static_cast<std::size_t>(j + i + 1)];
        }
    return {z_now, z_next};
}

KoopmanModel fit_koopman(const FeedbackStacks& stacks,
                         const WindowConfig& cfg) {
    const int d = cfg.embed_depth;
    const auto [z_now, z_next] = build_hankel(stacks.voltage_stack, d);
    const int m = static_cast<int>(z_now.cols());
    if (m < d + 2)
        throw std::domain_error("fit_koopman: fewer snapshot pairs than d + 2");
    if (stacks.input_stack.size() < stacks.voltage_stack.size())
        throw std::domain_error("fit_koopman: input stack shorter than voltages");

    // Column j of z_now ends at sample index d-1+j; pair it with u there.
    Eigen::MatrixXd u(2, m);
    for (int j = 0; j < m; ++j) {
        const auto& uj = stacks.input_stack[static_cast<std::size_t>(d - 1 + j)];
        u(0, j) = uj[0];
        u(1, j) = uj[1];
    }

    Eigen::MatrixXd g(d + 2, m);
    g.topRows(d) = z_now;
    g.bottomRows(2) = u;

    // Ridge anchored at the delay-shift prior A0 (advance every delay
    // coordinate, persist the newest one), so regularization pulls the model
    // toward continuing the feedback stack rather than toward zero output.
    // A zero-anchored ridge collapses self-fed predictions onto the learning
    // window's mean level, which contradicts the predictor's role of carrying
    // the last learned trajectory forward.
    Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) a0(i, i + 1) = 1.0;
    a0(d - 1, d - 1) = 1.0;
    const Eigen::MatrixXd resid = z_next - a0 * z_now;

    // Y = (Z' - A0 Z) G^T (G G^T + ridge I)^-1 via the SVD of G; with
    // ridge = 0 the pseudoinverse truncates singular values below 1e-10
    // relative, and [A B] = [A0 0] + Y.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
    const double cutoff = 1e-10 * sv(0);
    for (int i = 0; i < sv.size(); ++i) {
        if (cfg.ridge > 0.0)
            inv_sv(i) = sv(i) / (sv(i) * sv(i) + cfg.ridge);
        else if (sv(i) > cutoff)
            inv_sv(i) = 1.0 / sv(i);
    }
    const Eigen::MatrixXd y = resid * svd.matrixV() * inv_sv.asDiagonal() *
                              svd.matrixU().transpose();

    KoopmanModel model;
    model.a_mat = a0 + y.leftCols(d);
    model.b_mat = y.rightCols(2);
    model.c_row = Eigen::RowVectorXd::Zero(d);
    model.c_row(d - 1) = 1.0;
    return model;
}

std::vector<double> predict_horizon(const KoopmanModel& model,
                                    const Eigen::VectorXd& init_embedding,
                                    const std::vector<std::array<double, 2>>& inputs,
                                    int horizon) {
    if (horizon < 0) throw std::domain_error("predict_horizon: horizon < 0");
    if (static_cast<int>(inputs.size()) < horizon)
        throw std::domain_error("predict_horizon: not enough inputs");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    Eigen::VectorXd z = init_embedding;
    for (int i = 0; i < horizon; ++i) {
        const Eigen::Vector2d u(inputs[static_cast<std::size_t>(i)][0],
                                inputs[static_cast<std::size_t>(i)][1]);
        z = model.a_mat * z + model.b_mat * u;
        out.push_back(model.c_row.dot(z));
    }
    return out;
}

int advance_window(int window_start, const WindowConfig& cfg) {
    return window_start + cfg.slide();
}

std::vector<double> select_feedback(bool attack_flag,
                                    const std::vector<double>& measurements,
                                    const std::vector<double>& secure_estimates) {
    if (attack_flag && measurements.size() != secure_estimates.size())
        throw std::domain_error("select_feedback: misaligned stack lengths");
    return attack_flag ? secure_estimates : measurements;
}

std::vector<double> select_feedback(const std::vector<bool>& attack_flags,
                                    const std::vector<double>& measurements,
                                    const std::vector<double>& secure_estimates) {
    if (attack_flags.size() != measurements.size() ||
        measurements.size() != secure_estimates.size())
        throw std::domain_error("select_feedback: misaligned stack lengths");
    std::vector<double> out(measurements.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = attack_flags[i] ? secure_estimates[i] : measurements[i];
    return out;
}

}  // namespace voltguard
