#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "voltguard/battery.hpp"
#include "voltguard/correction.hpp"
#include "voltguard/gpr.hpp"
#include "voltguard/koopman.hpp"

using namespace voltguard;

namespace {

FeedbackStacks make_stacks(int n) {
    std::mt19937 rng(11);
    std::normal_distribution<double> gauss(0.0, 1e-3);
    FeedbackStacks stacks;
    for (int k = 0; k < n; ++k) {
        stacks.voltage_stack.push_back(3.7 + 2e-4 * k + gauss(rng));
        stacks.input_stack.push_back({5.0, 0.35 + 2e-4 * k});
    }
    return stacks;
}

void bm_fit_koopman(benchmark::State& state) {
    const auto stacks = make_stacks(40);
    WindowConfig cfg;
    cfg.ridge = 1e4;
    for (auto _ : state) benchmark::DoNotOptimize(fit_koopman(stacks, cfg));
}
BENCHMARK(bm_fit_koopman);

void bm_gpr_predict_mean(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) x(i, j) = gauss(rng);
        y(i) = std::sin(x(i, 0));
    }
    const auto model = gpr_fit(x, y, GprHyper::defaults(4));
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(4);
    for (auto _ : state) benchmark::DoNotOptimize(gpr_predict_mean(model, xs));
}
BENCHMARK(bm_gpr_predict_mean)->Arg(200)->Arg(1000);

void bm_run_cccv(benchmark::State& state) {
    const auto params = default_battery_params();
    for (auto _ : state)
        benchmark::DoNotOptimize(run_cccv(params, 5.0, 0.35, 1.0, 3600.0));
}
BENCHMARK(bm_run_cccv);

void bm_empirical_e2(benchmark::State& state) {
    double soc = 0.30;
    for (auto _ : state) {
        soc = soc < 0.99 ? soc + 1e-6 : 0.30;
        benchmark::DoNotOptimize(empirical_e2(1e-3, soc, 2e-4, 1e-5));
    }
}
BENCHMARK(bm_empirical_e2);

}  // namespace

BENCHMARK_MAIN();
