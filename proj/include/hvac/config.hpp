#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvac/bench.hpp"
#include "hvac/plant_model.hpp"
#include "hvac/simulate.hpp"

namespace hvac {

// One JSON document:
//   {"plant": {...PlantConfig fields...},
//    "forecast": {"horizon", "ar_order", "history_days", "refit_every", "scenarios",
//                 "zoh_divisor", "storage_noise"},
//    "simulation": {"days", "initial_fill", "scenario_seed", "noise_seed", "backend",
//                   "explicit_nonanticipativity"},
//    "calendar": {"start_day"} or {"boundaries": [...]},
//    "benchmark": {"validation_count", "validation_seed", "amplitude", "phi", "cdf_points", "jobs"}}
// Every section and field is optional; defaults follow the full-size setup
// (N = q = 168, S = 100, 184 days of history, one simulated year).
struct AppConfig {
    PlantConfig plant;
    RunSpec run;  // controller left at its default
    int scenarios = 100;
    int sim_days = 365;
    std::optional<int> start_day;       // day of year of the first simulated hour
    std::vector<int> boundaries;        // explicit calendar, overrides start_day
    BenchmarkConfig bench;              // `base` is filled by finalize()

    // Builds run.calendar and bench.base. When start_day is unset the data is
    // taken to begin on January 1, so the run starts history_days later.
    void finalize();
};

AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::string& path);
nlohmann::json config_to_json(const AppConfig& c);

}  // namespace hvac
