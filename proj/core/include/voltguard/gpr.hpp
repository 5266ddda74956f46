#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace voltguard {

/// Squared-exponential kernel hyperparameters with per-feature length
/// scales. Length scales apply to standardized features.
struct GprHyper {
    Eigen::VectorXd length_scales;  // one per feature, > 0
    double signal_var = 1.0;
    double noise_var = 1e-6;
    double jitter = 1e-10;

    static GprHyper defaults(int n_features);
    void validate() const;
};

/// A fitted Gaussian process over residual targets. Training features are
/// stored raw together with the standardization statistics; the Cholesky
/// factor and weight vector are recomputed deterministically from them.
struct GprModel {
    Eigen::MatrixXd x_train;    // n x f, raw features
    Eigen::VectorXd y_train;    // n
    Eigen::VectorXd feat_mean;  // f
    Eigen::VectorXd feat_std;   // f, zero-variance features stored as 1
    Eigen::MatrixXd chol_lower; // L with L L^T = K + noise_var I (+ jitter)
    Eigen::VectorXd alpha;      // (K + noise_var I)^{-1} y
    GprHyper hyper;
    int region = 0;

    int n() const { return static_cast<int>(y_train.size()); }
};

/// k(x1, x2) = signal_var * exp(-1/2 sum_i ((x1_i - x2_i)/l_i)^2).
double gpr_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                  const GprHyper& hyper);

/// Fits a GP: standardizes features, forms K + noise_var I, factorizes
/// (escalating jitter up to 3 times on failure) and solves for alpha.
/// Throws NumericError when factorization keeps failing.
GprModel gpr_fit(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                 const GprHyper& hyper);

/// Posterior mean and variance at x_star (variance clamped at >= 0).
std::pair<double, double> gpr_predict(const GprModel& model,
                                      const Eigen::VectorXd& x_star);

/// Posterior mean only; O(n) and used in the estimation loop.
double gpr_predict_mean(const GprModel& model, const Eigen::VectorXd& x_star);

/// log p(y | X, hyper) = -1/2 y^T alpha - sum log L_ii - n/2 log(2 pi).
double log_marginal_likelihood(const GprModel& model);

/// Coarse model selection: refits with every common length scale in
/// `scales` applied to all features and keeps the best marginal
/// likelihood.
GprModel gpr_fit_grid_search(const Eigen::MatrixXd& x_train,
                             const Eigen::VectorXd& y_train,
                             const GprHyper& base,
                             const std::vector<double>& scales = {0.3, 1.0, 3.0});

/// One trained model per SOC region.
using GprBank = std::map<int, GprModel>;

/// Text (de)serialization; full precision, bit-exact round trip.
void save_gpr_model(const GprModel& model, const std::string& path);
GprModel load_gpr_model(const std::string& path);
void save_gpr_bank(const GprBank& bank, const std::string& dir);
GprBank load_gpr_bank(const std::string& dir);

}  // namespace voltguard
