#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "voltguard/battery.hpp"
#include "voltguard/config.hpp"
#include "voltguard/csv.hpp"
#include "voltguard/errors.hpp"
#include "voltguard/harness.hpp"
#include "voltguard/metrics.hpp"
#include "voltguard/observers.hpp"

using namespace voltguard;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / "voltguard_pipeline_test";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& body) {
    const auto path = scratch() / name;
    std::ofstream out(path);
    out << body;
    return path.string();
}

}  // namespace

TEST_CASE("key-value reader handles comments, blanks and whitespace") {
    const auto path = write_file("kv.cfg",
                                 "# full-line comment\n"
                                 "\n"
                                 "  a = 1  \n"
                                 "b=two # trailing comment\n"
                                 "c.d = 3:4, 5:6\n");
    const auto kv = read_kv_file(path);
    REQUIRE(kv.size() == 3);
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "two");
    CHECK(kv.at("c.d") == "3:4, 5:6");
}

TEST_CASE("key-value reader rejects malformed lines") {
    CHECK_THROWS_AS(read_kv_file(write_file("dup.cfg", "a = 1\na = 2\n")),
                    ConfigError);
    CHECK_THROWS_AS(read_kv_file(write_file("noeq.cfg", "just a line\n")),
                    ConfigError);
    CHECK_THROWS_AS(read_kv_file(write_file("nokey.cfg", "= 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(read_kv_file((scratch() / "missing.cfg").string()),
                    ConfigError);
}

TEST_CASE("scenario config parsing") {
    const auto path = write_file("good.cfg",
                                 "charge.i_cc = 4.5\n"
                                 "charge.soc0 = 0.3\n"
                                 "charge.t_end = 500\n"
                                 "attack.kind = fdi_bias\n"
                                 "attack.t_start = 80\n"
                                 "attack.t_end = 400\n"
                                 "attack.bias = -0.06\n"
                                 "battery.aging_factor = 1.5\n"
                                 "battery.ocv_table = 0:3.0, 0.5:3.7, 1:4.2\n"
                                 "koopman.ridge = 1e4\n"
                                 "corrector = gpr\n"
                                 "gpr.model_dir = models\n"
                                 "estimators = secure, open_loop\n"
                                 "observer.gain = 0.2, 0.1, 0.1\n"
                                 "output.dir = out_test\n");
    const auto cfg = load_scenario_config(path);
    CHECK(cfg.i_cc == 4.5);
    CHECK(cfg.soc0 == 0.3);
    CHECK(cfg.attack.kind == AttackKind::fdi_bias);
    CHECK(cfg.attack.t_end.has_value());
    CHECK(cfg.attack.bias == -0.06);
    CHECK(cfg.aging_factor == 1.5);
    REQUIRE(cfg.battery.ocv_table.size() == 3);
    CHECK(cfg.battery.ocv_table[1].first == 0.5);
    CHECK(cfg.battery.ocv_table[1].second == 3.7);
    CHECK(cfg.koopman.ridge == 1e4);
    CHECK(cfg.corrector == CorrectorMode::gpr);
    CHECK(cfg.gpr_model_dir == std::string("models"));
    CHECK(cfg.estimators_enabled ==
          std::set<std::string>{"secure", "open_loop"});
    CHECK(cfg.observer_gain[0] == 0.2);
    CHECK(cfg.output_dir == "out_test");
}

TEST_CASE("scenario config rejections") {
    CHECK_THROWS_AS(
        load_scenario_config(write_file("unk.cfg", "bogus.key = 1\n")),
        ConfigError);
    CHECK_THROWS_AS(
        load_scenario_config(write_file("corr.cfg", "corrector = magic\n")),
        ConfigError);
    CHECK_THROWS_AS(load_scenario_config(
                        write_file("gain.cfg", "observer.gain = 0.1, 0.1\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_scenario_config(
                        write_file("num.cfg", "charge.i_cc = fast\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_scenario_config(
                        write_file("est.cfg", "estimators = secure, turbo\n")),
                    ConfigError);
    CHECK_THROWS_AS(
        load_scenario_config(write_file("fb.cfg", "charge.feedback = maybe\n")),
        ConfigError);
    // gpr corrector with the secure estimator needs a model directory
    CHECK_THROWS_AS(
        load_scenario_config(write_file("gpr.cfg", "corrector = gpr\n")),
        ConfigError);
    CHECK_THROWS_AS(load_scenario_config(
                        write_file("ocv.cfg", "battery.ocv_table = 0-3.0\n")),
                    ConfigError);
}

TEST_CASE("trace csv header and round trip") {
    CHECK(std::string(kTraceCsvHeader) ==
          "t,current,soc_true,soc_cc,v_true,v_meas,v_pred,e1,v_hat,"
          "v_openloop,v_closedloop,region,attack_active");

    TimeSeriesTrace trace;
    trace.dt = 1.0;
    for (int k = 0; k < 5; ++k) {
        TraceRow row;
        row.t = k;
        row.current = 5.0 - 0.1 * k;
        row.soc_true = 0.35 + 1e-3 * k;
        row.soc_cc = row.soc_true + 1e-7;
        row.v_true = 3.7 + std::sqrt(2.0) * 1e-3 * k;  // not decimal-exact
        row.v_meas = row.v_true + 1e-4;
        if (k >= 2) {
            row.v_pred = row.v_true - 2e-4;
            row.e1 = 1.5e-4;
            row.v_hat = row.v_true + 3e-5;
        }
        row.v_openloop = row.v_true;
        row.region = 1 + k / 3;
        row.attack_active = k >= 3;
        trace.rows.push_back(row);
    }
    const auto path = (scratch() / "trace_rt.csv").string();
    write_trace_csv(trace, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == kTraceCsvHeader);

    const auto back = read_trace_csv(path);
    REQUIRE(back.size() == trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& a = trace.rows[k];
        const auto& b = back.rows[k];
        CHECK(a.t == b.t);
        CHECK(a.current == b.current);
        CHECK(a.soc_true == b.soc_true);
        CHECK(a.soc_cc == b.soc_cc);
        CHECK(a.v_true == b.v_true);
        CHECK(a.v_meas == b.v_meas);
        CHECK(a.v_pred == b.v_pred);
        CHECK(a.e1 == b.e1);
        CHECK(a.v_hat == b.v_hat);
        CHECK(a.v_openloop == b.v_openloop);
        CHECK(a.v_closedloop == b.v_closedloop);
        CHECK(a.region == b.region);
        CHECK(a.attack_active == b.attack_active);
    }
}

TEST_CASE("metrics match a hand-computed example") {
    TimeSeriesTrace trace;
    trace.dt = 1.0;
    for (int k = 0; k < 4; ++k) {
        TraceRow row;
        row.t = k;
        row.v_true = 4.0;
        row.soc_cc = 0.5 + 0.01 * k;
        row.region = k < 2 ? 2 : 3;
        trace.rows.push_back(row);
    }
    trace.rows[0].v_meas = 4.0;
    trace.rows[1].v_meas = 4.1;
    trace.rows[2].v_meas = 3.9;
    trace.rows[3].v_meas = 4.0;
    trace.rows[1].v_hat = 4.05;
    trace.rows[2].v_hat = 3.95;

    AttackSpec attack;
    attack.kind = AttackKind::fdi_bias;
    attack.t_start = 1.0;
    attack.t_end = 3.0;

    std::map<std::string, std::vector<std::optional<double>>> extra;
    extra["stage1_only"] = {std::nullopt, 4.02, 4.02, std::nullopt};

    const auto report = compute_metrics(trace, attack, extra);
    const auto& corrupt = report.estimators.at("corrupt_meas");
    CHECK(corrupt.rmse_all == doctest::Approx(std::sqrt(0.02 / 4)).epsilon(1e-12));
    CHECK(corrupt.maxabs_all == doctest::Approx(0.1).epsilon(1e-12));
    REQUIRE(corrupt.rmse_attack.has_value());
    CHECK(*corrupt.rmse_attack == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(*corrupt.mean_err_attack == doctest::Approx(0.0).epsilon(1e-12));

    const auto& secure = report.estimators.at("secure");
    CHECK(secure.rmse_all == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(*secure.rmse_attack == doctest::Approx(0.05).epsilon(1e-12));

    const auto& s1 = report.estimators.at("stage1_only");
    CHECK(s1.rmse_all == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(*s1.mean_err_attack == doctest::Approx(0.02).epsilon(1e-12));

    REQUIRE(report.soc_at_onset.has_value());
    CHECK(*report.soc_at_onset == doctest::Approx(0.51).epsilon(1e-12));
    REQUIRE(report.region_switches.size() == 1);
    CHECK(report.region_switches[0].first == 2.0);
    CHECK(report.region_switches[0].second == 3);

    CHECK(!format_report(report).empty());
}

TEST_CASE("matched open-loop observer reproduces the truth") {
    const auto params = default_battery_params();
    const auto trace = run_cccv(params, 5.0, 0.35, 1.0, 300.0);
    BatteryState init;
    init.soc = 0.35;
    const auto v = open_loop_observe(params, trace, init);
    REQUIRE(v.size() == trace.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        CHECK(std::abs(v[k] - trace.rows[k].v_true) < 1e-9);
}

TEST_CASE("closed-loop observer follows a biased measurement") {
    const auto params = default_battery_params();
    auto trace = run_cccv(params, 5.0, 0.35, 1.0, 600.0);
    AttackSpec attack;
    attack.kind = AttackKind::fdi_bias;
    attack.t_start = 50.0;
    attack.bias = -0.06;
    trace = apply_attack(trace, attack);

    BatteryState init;
    init.soc = 0.35;
    const std::array<double, 3> gain{0.1, 0.05, 0.05};
    validate_observer_gain(params, gain, 5.0, 0.35, 1.0);
    const auto v = closed_loop_observe(params, trace, init, gain);
    REQUIRE(v.size() == trace.size());
    // dragged toward the biased channel: steady error near the bias
    const double err_end = v.back() - trace.rows.back().v_true;
    CHECK(err_end < -0.02);
    CHECK(err_end > -0.08);
}

TEST_CASE("observer gain validation rejects a destabilizing gain") {
    const auto params = default_battery_params();
    CHECK_THROWS_AS(
        validate_observer_gain(params, {-50.0, 0.0, 0.0}, 5.0, 0.35, 1.0),
        ConfigError);
}

TEST_CASE("scenario harness end to end") {
    ScenarioConfig cfg;
    cfg.battery = default_battery_params();
    cfg.i_cc = 5.0;
    cfg.soc0 = 0.35;
    cfg.t_end = 300.0;
    cfg.attack.kind = AttackKind::dos_hold;
    cfg.attack.t_start = 100.0;
    cfg.koopman.ridge = 1e4;
    cfg.output_dir = (scratch() / "scenario_out").string();
    cfg.validate();

    const auto result = run_scenario(cfg);
    REQUIRE(result.trace.size() == 301);
    CHECK(result.report.estimators.count("secure") == 1);
    CHECK(result.report.estimators.count("open_loop") == 1);
    CHECK(result.report.estimators.count("closed_loop") == 1);
    CHECK(result.report.estimators.count("stage1_only") == 1);
    REQUIRE(result.report.soc_at_onset.has_value());
    CHECK(*result.report.soc_at_onset == doctest::Approx(0.35 + 100 * 5.0 / (3600 * 7.0))
                                             .epsilon(1e-6));

    const auto csv_path = emit_outputs(result, cfg, /*plot=*/true);
    CHECK(fs::exists(csv_path));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "report.txt"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "trace.svg"));
    const auto back = read_trace_csv(csv_path);
    CHECK(back.size() == result.trace.size());
    CHECK(back.rows[150].v_hat.has_value());
    CHECK(back.rows[50].attack_active == false);
    CHECK(back.rows[150].attack_active == true);
}
