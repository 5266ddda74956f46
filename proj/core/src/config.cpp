#include "voltguard/config.hpp"

#include <fstream>
#include <sstream>

#include "voltguard/errors.hpp"

namespace voltguard {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + value +
                          "'");
    }
    if (pos != value.size())
        throw ConfigError("key '" + key + "': trailing junk in '" + value +
                          "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value +
                      "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) parts.push_back(trim(part));
    return parts;
}

}  // namespace

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": empty key");
        if (kv.count(key))
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    auto kv = read_kv_file(path);
    ScenarioConfig cfg;
    cfg.battery = default_battery_params();

    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto take_double = [&](const char* key, double& dst) {
        if (auto v = take(key)) dst = to_double(key, *v);
    };
    auto take_bool = [&](const char* key, bool& dst) {
        if (auto v = take(key)) dst = to_bool(key, *v);
    };
    auto take_int = [&](const char* key, int& dst) {
        if (auto v = take(key)) {
            const double d = to_double(key, *v);
            dst = static_cast<int>(d);
            if (static_cast<double>(dst) != d)
                throw ConfigError(std::string("key '") + key +
                                  "': expected an integer");
        }
    };

    take_double("battery.capacity_ah", cfg.battery.capacity_ah);
    take_double("battery.r0", cfg.battery.r0);
    take_double("battery.r1", cfg.battery.r1);
    take_double("battery.c1", cfg.battery.c1);
    take_double("battery.r2", cfg.battery.r2);
    take_double("battery.c2", cfg.battery.c2);
    take_double("battery.v_max", cfg.battery.v_max);
    take_double("battery.i_cutoff", cfg.battery.i_cutoff);
    if (auto v = take("battery.ocv_table")) {
        std::vector<std::pair<double, double>> table;
        for (const auto& entry : split(*v, ',')) {
            const auto parts = split(entry, ':');
            if (parts.size() != 2)
                throw ConfigError(
                    "battery.ocv_table entries must be 'soc:ocv', got '" +
                    entry + "'");
            table.emplace_back(to_double("battery.ocv_table", parts[0]),
                               to_double("battery.ocv_table", parts[1]));
        }
        cfg.battery.ocv_table = table;
    }
    take_double("battery.aging_factor", cfg.aging_factor);
    take_bool("battery.aging_scales_rc", cfg.aging_scales_rc);

    take_double("charge.i_cc", cfg.i_cc);
    take_double("charge.soc0", cfg.soc0);
    take_double("charge.dt", cfg.dt);
    take_double("charge.t_end", cfg.t_end);
    if (auto v = take("charge.feedback")) cfg.charge_feedback = *v;

    if (auto v = take("attack.kind"))
        cfg.attack.kind = attack_kind_from_string(*v);
    take_double("attack.t_start", cfg.attack.t_start);
    if (auto v = take("attack.t_end"))
        cfg.attack.t_end = to_double("attack.t_end", *v);
    take_double("attack.bias", cfg.attack.bias);
    take_double("attack.detect_delay", cfg.attack.detect_delay);

    take_int("koopman.embed_depth", cfg.koopman.embed_depth);
    take_int("koopman.s_learn", cfg.koopman.s_learn);
    take_int("koopman.s_total", cfg.koopman.s_total);
    take_double("koopman.ridge", cfg.koopman.ridge);

    if (auto v = take("corrector")) {
        if (*v == "empirical")
            cfg.corrector = CorrectorMode::empirical;
        else if (*v == "gpr")
            cfg.corrector = CorrectorMode::gpr;
        else
            throw ConfigError("corrector must be 'empirical' or 'gpr', got '" +
                              *v + "'");
    }
    if (auto v = take("gpr.model_dir")) cfg.gpr_model_dir = *v;

    if (auto v = take("estimators")) {
        cfg.estimators_enabled.clear();
        for (const auto& name : split(*v, ','))
            if (!name.empty()) cfg.estimators_enabled.insert(name);
    }
    if (auto v = take("observer.gain")) {
        const auto parts = split(*v, ',');
        if (parts.size() != 3)
            throw ConfigError("observer.gain must have 3 components");
        for (int i = 0; i < 3; ++i)
            cfg.observer_gain[static_cast<std::size_t>(i)] =
                to_double("observer.gain", parts[static_cast<std::size_t>(i)]);
    }
    take_bool("observer.fresh_model", cfg.observer_fresh_model);

    if (auto v = take("seed")) cfg.seed = std::stoul(*v);
    if (auto v = take("output.dir")) cfg.output_dir = *v;

    if (!kv.empty())
        throw ConfigError("unknown config key '" + kv.begin()->first + "' in " +
                          path);
    cfg.validate();
    return cfg;
}

void ScenarioConfig::validate() const {
    battery.validate();
    attack.validate();
    koopman.validate();
    if (aging_factor < 1.0) throw ConfigError("battery.aging_factor must be >= 1");
    if (i_cc <= 0.0) throw ConfigError("charge.i_cc must be > 0");
    if (soc0 < 0.0 || soc0 > 1.0) throw ConfigError("charge.soc0 outside [0,1]");
    if (dt <= 0.0) throw ConfigError("charge.dt must be > 0");
    if (t_end <= 0.0) throw ConfigError("charge.t_end must be > 0");
    if (charge_feedback != "true" && charge_feedback != "corrupt")
        throw ConfigError("charge.feedback must be 'true' or 'corrupt'");
    for (const auto& name : estimators_enabled)
        if (name != "secure" && name != "stage1_only" && name != "open_loop" &&
            name != "closed_loop")
            throw ConfigError("unknown estimator '" + name + "'");
    if (corrector == CorrectorMode::gpr &&
        estimators_enabled.count("secure") && !gpr_model_dir)
        throw ConfigError("corrector=gpr requires gpr.model_dir");
}

}  // namespace voltguard
