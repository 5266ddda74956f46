// voltguard: secure terminal-voltage estimation toolkit CLI.
//
// Subcommands:
//   simulate      nominal CCCV trace only
//   gen-gpr-data  training data for the data-driven stage II corrector
//   train-gpr     fit per-region GPR models from generated data
//   run-scenario  full attack scenario with estimators and baselines
//   report        recompute metrics from an existing trace CSV

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "voltguard/csv.hpp"
#include "voltguard/errors.hpp"
#include "voltguard/estimator.hpp"
#include "voltguard/gpr.hpp"
#include "voltguard/harness.hpp"

namespace fs = std::filesystem;
using namespace voltguard;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "current,soc,v_bar_p,e1,target\n";
    char buf[32];
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < 4; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", y(i));
        out << buf << '\n';
    }
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> read_dataset_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != "current,soc,v_bar_p,e1,target")
        throw ConfigError("unexpected dataset header in " + path);
    std::vector<std::array<double, 5>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 5> row{};
        std::stringstream ss(line);
        std::string field;
        for (int j = 0; j < 5; ++j) {
            if (!std::getline(ss, field, ','))
                throw ConfigError("bad dataset row in " + path);
            row[static_cast<std::size_t>(j)] = std::stod(field);
        }
        rows.push_back(row);
    }
    Eigen::MatrixXd x(static_cast<int>(rows.size()), 4);
    Eigen::VectorXd y(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < 4; ++j)
            x(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
        y(static_cast<int>(i)) = rows[i][4];
    }
    return {x, y};
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    ScenarioConfig cfg = load_scenario_config(config_path);
    const BatteryParams plant =
        age_params(cfg.battery, cfg.aging_factor, cfg.aging_scales_rc);
    TimeSeriesTrace trace =
        run_cccv(plant, cfg.i_cc, cfg.soc0, cfg.dt, cfg.t_end);
    double soc = cfg.soc0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        if (t > 0)
            soc = coulomb_count(soc, trace.rows[t - 1].current, cfg.dt,
                                cfg.battery.capacity_ah);
        trace.rows[t].soc_cc = soc;
        trace.rows[t].region = soc_region(soc);
    }
    fs::create_directories(out_dir);
    const auto path = fs::path(out_dir) / "trace.csv";
    write_trace_csv(trace, path.string());
    std::cout << "wrote " << path.string() << " (" << trace.size()
              << " rows)\n";
    return 0;
}

int run_gen_gpr_data(const std::string& config_path,
                     const std::string& out_dir, int n_max) {
    ScenarioConfig cfg = load_scenario_config(config_path);
    const BatteryParams plant =
        age_params(cfg.battery, cfg.aging_factor, cfg.aging_scales_rc);
    const OcvCurve ocv(cfg.battery.ocv_table);
    const TimeSeriesTrace trace =
        run_cccv(plant, cfg.i_cc, cfg.soc0, cfg.dt, cfg.t_end);
    const auto datasets = build_gpr_training_set(
        trace, cfg.koopman, ocv, cfg.battery.capacity_ah, cfg.soc0, n_max);
    fs::create_directories(out_dir);
    for (const auto& [region, data] : datasets) {
        const auto path = fs::path(out_dir) /
                          ("region_" + std::to_string(region) + ".csv");
        write_dataset_csv(path.string(), data.first, data.second);
        std::cout << "region " << region << ": " << data.second.size()
                  << " rows -> " << path.string() << "\n";
    }
    return 0;
}

int run_train_gpr(const std::string& data_dir, const std::string& out_dir,
                  bool grid_search) {
    GprBank bank;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.path().extension() != ".csv" || name.rfind("region_", 0) != 0)
            continue;
        const int region = std::stoi(name.substr(7));
        const auto [x, y] = read_dataset_csv(entry.path().string());
        GprHyper hyper = GprHyper::defaults(4);
        const double y_var = (y.array() - y.mean()).square().mean();
        hyper.signal_var = y_var > 0.0 ? y_var : 1e-6;
        GprModel model = grid_search ? gpr_fit_grid_search(x, y, hyper)
                                     : gpr_fit(x, y, hyper);
        model.region = region;
        std::cout << "region " << region << ": n=" << model.n()
                  << " log_ml=" << log_marginal_likelihood(model) << "\n";
        bank[region] = std::move(model);
    }
    if (bank.empty())
        throw ConfigError("no region_*.csv datasets found in " + data_dir);
    save_gpr_bank(bank, out_dir);
    std::cout << "saved " << bank.size() << " models to " << out_dir << "\n";
    return 0;
}

int run_run_scenario(const std::string& config_path,
                     const std::string& corrector, const std::string& models,
                     const std::string& out_dir, bool plot) {
    ScenarioConfig cfg = load_scenario_config(config_path);
    if (!corrector.empty()) {
        if (corrector == "empirical")
            cfg.corrector = CorrectorMode::empirical;
        else if (corrector == "gpr")
            cfg.corrector = CorrectorMode::gpr;
        else
            throw ConfigError("--corrector must be empirical or gpr");
    }
    if (!models.empty()) cfg.gpr_model_dir = models;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    const ScenarioResult result = run_scenario(cfg);
    const auto path = emit_outputs(result, cfg, plot);
    std::cout << format_report(result.report);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int run_report(const std::string& trace_path) {
    const TimeSeriesTrace trace = read_trace_csv(trace_path);
    AttackSpec spec;  // reconstruct the interval from the flag column
    for (const auto& row : trace.rows) {
        if (row.attack_active) {
            if (spec.kind == AttackKind::none) {
                spec.kind = AttackKind::fdi_bias;
                spec.t_start = row.t;
            }
            spec.t_end = row.t + trace.dt;
        }
    }
    std::cout << format_report(compute_metrics(trace, spec));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure terminal-voltage estimation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, model_dir, corrector,
        trace_path;
    int n_max = 2000;
    bool plot = false, grid_search = false;

    auto* sim = app.add_subcommand("simulate", "nominal CCCV trace only");
    sim->add_option("--config", config_path, "scenario config file")
        ->required();
    sim->add_option("--out", out_dir, "output directory")->default_val("out");

    auto* gen = app.add_subcommand("gen-gpr-data",
                                   "generate GPR training data from a "
                                   "nominal self-learning run");
    gen->add_option("--config", config_path, "scenario config file")
        ->required();
    gen->add_option("--out", out_dir, "dataset output directory")->required();
    gen->add_option("--n-max", n_max, "max rows per SOC region");

    auto* train =
        app.add_subcommand("train-gpr", "fit per-region GPR models");
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out", model_dir, "model output directory")
        ->required();
    train->add_flag("--grid-search", grid_search,
                    "coarse length-scale selection by marginal likelihood");

    auto* run = app.add_subcommand("run-scenario", "full scenario run");
    run->add_option("--config", config_path, "scenario config file")
        ->required();
    run->add_option("--corrector", corrector,
                    "override corrector: empirical|gpr");
    run->add_option("--models", model_dir, "GPR model directory");
    run->add_option("--out", out_dir, "override output directory");
    run->add_flag("--plot", plot, "also emit trace.svg");

    auto* rep =
        app.add_subcommand("report", "recompute metrics from a trace CSV");
    rep->add_option("--trace", trace_path, "trace.csv path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (sim->parsed()) return run_simulate(config_path, out_dir);
        if (gen->parsed()) return run_gen_gpr_data(config_path, out_dir, n_max);
        if (train->parsed())
            return run_train_gpr(data_dir, model_dir, grid_search);
        if (run->parsed())
            return run_run_scenario(config_path, corrector, model_dir, out_dir,
                                    plot);
        if (rep->parsed()) return run_report(trace_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
