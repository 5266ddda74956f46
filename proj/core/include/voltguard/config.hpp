#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "voltguard/attack.hpp"
#include "voltguard/battery.hpp"
#include "voltguard/correction.hpp"
#include "voltguard/koopman.hpp"

namespace voltguard {

/// Everything a scenario run needs; parsed from a `key = value` config
/// file (see configs/ and the README for the schema).
struct ScenarioConfig {
    BatteryParams battery;       // base (fresh) parameters
    double aging_factor = 1.0;   // applied to the plant only
    bool aging_scales_rc = false;

    double i_cc = 5.0;     // amperes
    double soc0 = 0.35;    // fraction
    double dt = 1.0;       // seconds
    double t_end = 3600.0; // seconds
    // feedback source of the CCCV controller; "true" keeps the plant
    // trajectory independent of the attack and the estimators, "corrupt"
    // lets the controller react to the attacked measurement
    std::string charge_feedback = "true";  // true | corrupt

    AttackSpec attack;
    WindowConfig koopman;
    CorrectorMode corrector = CorrectorMode::empirical;
    std::optional<std::string> gpr_model_dir;

    std::set<std::string> estimators_enabled{"secure", "stage1_only",
                                             "open_loop", "closed_loop"};
    std::array<double, 3> observer_gain{0.1, 0.05, 0.05};
    bool observer_fresh_model = false;  // open/closed loop use fresh params

    unsigned long seed = 1;
    std::string output_dir = "out";

    void validate() const;
};

/// Parses a scenario config file. Unknown keys are rejected.
/// Throws ConfigError with the offending line on any problem.
ScenarioConfig load_scenario_config(const std::string& path);

/// Low-level `key = value` reader ('#' comments, blank lines ignored).
std::map<std::string, std::string> read_kv_file(const std::string& path);

}  // namespace voltguard
