#include "hvac/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace hvac {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown config field '" + section + "." + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void AppConfig::finalize() {
    if (sim_days < 1) throw std::invalid_argument("simulation.days must be >= 1");
    run.sim_hours = sim_days * 24;
    if (!boundaries.empty()) {
        run.calendar = boundaries;
    } else {
        const int day = start_day ? *start_day : (run.history / 24) % 365;
        run.calendar = month_calendar(day, run.sim_hours);
    }
    run.controller.scenarios = scenarios;
    bench.base = run;
}

AppConfig config_from_json(const json& j) {
    AppConfig c;
    check_keys(j, "config", {"plant", "forecast", "simulation", "calendar", "benchmark"});
    if (j.contains("plant")) c.plant = j.at("plant").get<PlantConfig>();
    if (j.contains("forecast")) {
        const auto& f = j.at("forecast");
        check_keys(f, "forecast",
                   {"horizon", "ar_order", "history_days", "refit_every", "scenarios", "zoh_divisor", "storage_noise"});
        read(f, "horizon", c.run.horizon);
        read(f, "ar_order", c.run.ar_order);
        if (f.contains("history_days")) c.run.history = 24 * f.at("history_days").get<int>();
        read(f, "refit_every", c.run.refit_every);
        read(f, "scenarios", c.scenarios);
        read(f, "zoh_divisor", c.run.zoh_divisor);
        read(f, "storage_noise", c.run.storage_noise);
    }
    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        check_keys(s, "simulation",
                   {"days", "initial_fill", "scenario_seed", "noise_seed", "backend", "explicit_nonanticipativity"});
        read(s, "days", c.sim_days);
        read(s, "initial_fill", c.run.initial_fill);
        read(s, "scenario_seed", c.run.scenario_seed);
        read(s, "noise_seed", c.run.noise_seed);
        if (s.contains("backend")) c.run.backend = lp::backend_from_name(s.at("backend").get<std::string>());
        read(s, "explicit_nonanticipativity", c.run.explicit_nonanticipativity);
    }
    if (j.contains("calendar")) {
        const auto& k = j.at("calendar");
        check_keys(k, "calendar", {"start_day", "boundaries"});
        if (k.contains("start_day")) c.start_day = k.at("start_day").get<int>();
        read(k, "boundaries", c.boundaries);
    }
    if (j.contains("benchmark")) {
        const auto& b = j.at("benchmark");
        check_keys(b, "benchmark", {"validation_count", "validation_seed", "amplitude", "phi", "cdf_points", "jobs"});
        read(b, "validation_count", c.bench.validation_count);
        read(b, "validation_seed", c.bench.validation_seed);
        read(b, "amplitude", c.bench.validation.amplitude);
        read(b, "phi", c.bench.validation.phi);
        read(b, "cdf_points", c.bench.cdf_points);
        read(b, "jobs", c.bench.jobs);
    }
    c.plant.validate();
    return c;
}

AppConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const AppConfig& c) {
    json j;
    j["plant"] = c.plant;
    j["forecast"] = {{"horizon", c.run.horizon},
                     {"ar_order", c.run.ar_order},
                     {"history_days", c.run.history / 24},
                     {"refit_every", c.run.refit_every},
                     {"scenarios", c.scenarios},
                     {"zoh_divisor", c.run.zoh_divisor},
                     {"storage_noise", c.run.storage_noise}};
    j["simulation"] = {{"days", c.sim_days},
                       {"initial_fill", c.run.initial_fill},
                       {"scenario_seed", c.run.scenario_seed},
                       {"noise_seed", c.run.noise_seed},
                       {"backend", lp::backend_name(c.run.backend)},
                       {"explicit_nonanticipativity", c.run.explicit_nonanticipativity}};
    j["calendar"] = json::object();
    if (!c.boundaries.empty()) j["calendar"]["boundaries"] = c.boundaries;
    if (c.start_day) j["calendar"]["start_day"] = *c.start_day;
    j["benchmark"] = {{"validation_count", c.bench.validation_count},
                      {"validation_seed", c.bench.validation_seed},
                      {"amplitude", c.bench.validation.amplitude},
                      {"phi", c.bench.validation.phi},
                      {"cdf_points", c.bench.cdf_points},
                      {"jobs", c.bench.jobs}};
    return j;
}

}  // namespace hvac
