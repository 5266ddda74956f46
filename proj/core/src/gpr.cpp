#include "voltguard/gpr.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <utility>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "voltguard/errors.hpp"

namespace voltguard {

namespace {

Eigen::VectorXd standardize(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& std) {
    return (x - mean).cwiseQuotient(std);
}

double kernel_standardized(const Eigen::VectorXd& s1, const Eigen::VectorXd& s2,
                           const GprHyper& hyper) {
    const Eigen::VectorXd r = (s1 - s2).cwiseQuotient(hyper.length_scales);
    return hyper.signal_var * std::exp(-0.5 * r.squaredNorm());
}

}  // namespace

GprHyper GprHyper::defaults(int n_features) {
    GprHyper h;
    h.length_scales = Eigen::VectorXd::Ones(n_features);
    return h;
}

void GprHyper::validate() const {
    if (length_scales.size() < 1 || (length_scales.array() <= 0.0).any())
        throw ConfigError("gpr length scales must all be > 0");
    if (signal_var <= 0.0 || noise_var <= 0.0 || jitter <= 0.0)
        throw ConfigError("gpr variances and jitter must be > 0");
}

double gpr_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                  const GprHyper& hyper) {
    if (x1.size() != x2.size() || x1.size() != hyper.length_scales.size())
        throw std::domain_error("gpr_kernel: feature dimension mismatch");
    const Eigen::VectorXd r = (x1 - x2).cwiseQuotient(hyper.length_scales);
    return hyper.signal_var * std::exp(-0.5 * r.squaredNorm());
}

GprModel gpr_fit(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                 const GprHyper& hyper) {
    const int n = static_cast<int>(x_train.rows());
    const int f = static_cast<int>(x_train.cols());
    if (n < 1) throw std::domain_error("gpr_fit: need at least one sample");
    if (y_train.size() != n)
        throw std::domain_error("gpr_fit: x/y size mismatch");
    hyper.validate();
    if (hyper.length_scales.size() != f)
        throw std::domain_error("gpr_fit: length_scales dimension mismatch");
    if (!x_train.allFinite() || !y_train.allFinite())
        throw std::domain_error("gpr_fit: non-finite training data");

    GprModel model;
    model.x_train = x_train;
    model.y_train = y_train;
    model.hyper = hyper;
    model.feat_mean = x_train.colwise().mean();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(f);
    for (int j = 0; j < f; ++j)
        var(j) = (x_train.col(j).array() - model.feat_mean(j)).square().mean();
    model.feat_std = var.cwiseSqrt();
    for (int j = 0; j < f; ++j)
        if (model.feat_std(j) == 0.0) model.feat_std(j) = 1.0;

    Eigen::MatrixXd s(n, f);
    for (int i = 0; i < n; ++i)
        s.row(i) = standardize(x_train.row(i).transpose(), model.feat_mean,
                               model.feat_std)
                       .transpose();

    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = hyper.signal_var;
        for (int j = i + 1; j < n; ++j) {
            const double v = kernel_standardized(s.row(i).transpose(),
                                                 s.row(j).transpose(), hyper);
            k(i, j) = v;
            k(j, i) = v;
        }
    }

    double diag = hyper.noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd kn = k;
        kn.diagonal().array() += diag;
        llt.compute(kn);
        if (llt.info() == Eigen::Success) break;
        if (attempt >= 3)
            throw NumericError(
                "gpr_fit: Cholesky failed after jitter escalation (n=" +
                std::to_string(n) + ", final diagonal boost=" +
                std::to_string(diag) + ")");
        diag += hyper.jitter * std::pow(100.0, attempt);
    }
    model.chol_lower = llt.matrixL();
    model.alpha = llt.solve(y_train);
    return model;
}

std::pair<double, double> gpr_predict(const GprModel& model,
                                      const Eigen::VectorXd& x_star) {
    const int n = model.n();
    const Eigen::VectorXd s_star =
        standardize(x_star, model.feat_mean, model.feat_std);
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd si = standardize(
            model.x_train.row(i).transpose(), model.feat_mean, model.feat_std);
        k_star(i) = kernel_standardized(si, s_star, model.hyper);
    }
    const double mean = k_star.dot(model.alpha);
    const Eigen::VectorXd v =
        model.chol_lower.triangularView<Eigen::Lower>().solve(k_star);
    double variance = model.hyper.signal_var - v.squaredNorm();
    if (variance < 0.0) variance = 0.0;
    return {mean, variance};
}

double gpr_predict_mean(const GprModel& model, const Eigen::VectorXd& x_star) {
    const int n = model.n();
    const Eigen::VectorXd s_star =
        standardize(x_star, model.feat_mean, model.feat_std);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd si = standardize(
            model.x_train.row(i).transpose(), model.feat_mean, model.feat_std);
        mean += kernel_standardized(si, s_star, model.hyper) * model.alpha(i);
    }
    return mean;
}

double log_marginal_likelihood(const GprModel& model) {
    const int n = model.n();
    const double quad = model.y_train.dot(model.alpha);
    const double logdet = model.chol_lower.diagonal().array().log().sum();
    return -0.5 * quad - logdet -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

GprModel gpr_fit_grid_search(const Eigen::MatrixXd& x_train,
                             const Eigen::VectorXd& y_train,
                             const GprHyper& base,
                             const std::vector<double>& scales) {
    GprModel best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (double s : scales) {
        GprHyper h = base;
        h.length_scales = base.length_scales * s;
        GprModel m = gpr_fit(x_train, y_train, h);
        const double lml = log_marginal_likelihood(m);
        if (lml > best_lml) {
            best_lml = lml;
            best = std::move(m);
        }
    }
    return best;
}

void save_gpr_model(const GprModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write GPR model file " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    const int n = model.n();
    const int f = static_cast<int>(model.x_train.cols());
    out << "gpr_model 1\n";
    out << "region " << model.region << "\n";
    out << "n " << n << "\nfeatures " << f << "\n";
    out << "signal_var ";
    put(model.hyper.signal_var);
    out << "\nnoise_var ";
    put(model.hyper.noise_var);
    out << "\njitter ";
    put(model.hyper.jitter);
    out << "\nlength_scales";
    for (int j = 0; j < f; ++j) {
        out << ' ';
        put(model.hyper.length_scales(j));
    }
    out << "\ndata\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < f; ++j) {
            put(model.x_train(i, j));
            out << ' ';
        }
        put(model.y_train(i));
        out << '\n';
    }
    if (!out) throw ConfigError("write failed for GPR model file " + path);
}

GprModel load_gpr_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read GPR model file " + path);
    std::string tag;
    int version = 0, region = 0, n = 0, f = 0;
    GprHyper hyper;
    if (!(in >> tag >> version) || tag != "gpr_model" || version != 1)
        throw ConfigError("bad GPR model header in " + path);
    if (!(in >> tag >> region) || tag != "region")
        throw ConfigError("bad GPR model region in " + path);
    if (!(in >> tag >> n) || tag != "n" || n < 1)
        throw ConfigError("bad GPR model size in " + path);
    if (!(in >> tag >> f) || tag != "features" || f < 1)
        throw ConfigError("bad GPR model feature count in " + path);
    if (!(in >> tag >> hyper.signal_var) || tag != "signal_var")
        throw ConfigError("bad GPR model signal_var in " + path);
    if (!(in >> tag >> hyper.noise_var) || tag != "noise_var")
        throw ConfigError("bad GPR model noise_var in " + path);
    if (!(in >> tag >> hyper.jitter) || tag != "jitter")
        throw ConfigError("bad GPR model jitter in " + path);
    if (!(in >> tag) || tag != "length_scales")
        throw ConfigError("bad GPR model length_scales in " + path);
    hyper.length_scales.resize(f);
    for (int j = 0; j < f; ++j)
        if (!(in >> hyper.length_scales(j)))
            throw ConfigError("bad GPR model length scale in " + path);
    if (!(in >> tag) || tag != "data")
        throw ConfigError("bad GPR model data section in " + path);
    Eigen::MatrixXd x(n, f);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < f; ++j)
            if (!(in >> x(i, j)))
                throw ConfigError("truncated GPR model data in " + path);
        if (!(in >> y(i)))
            throw ConfigError("truncated GPR model data in " + path);
    }
    // Refit from the stored inputs; deterministic, so predictions are
    // identical to the saved model's.
    GprModel model = gpr_fit(x, y, hyper);
    model.region = region;
    return model;
}

void save_gpr_bank(const GprBank& bank, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [region, model] : bank) {
        const auto path =
            std::filesystem::path(dir) /
            ("region_" + std::to_string(region) + ".gpr");
        save_gpr_model(model, path.string());
    }
}

GprBank load_gpr_bank(const std::string& dir) {
    GprBank bank;
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("GPR model directory not found: " + dir);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".gpr") continue;
        GprModel model = load_gpr_model(entry.path().string());
        bank[model.region] = std::move(model);
    }
    if (bank.empty())
        throw ConfigError("no .gpr model files in directory " + dir);
    return bank;
}

}  // namespace voltguard
