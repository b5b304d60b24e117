#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvac/forecast.hpp"
#include "hvac/lp.hpp"
#include "hvac/mpc.hpp"
#include "hvac/plant_model.hpp"
#include "hvac/restoration.hpp"

namespace hvac {

enum class ControllerKind { Deterministic, Stochastic, Perfect };

struct ControllerSpec {
    ControllerKind kind = ControllerKind::Deterministic;
    double beta = 0.0;
    int scenarios = 1;  // stochastic only

    std::string label() const;
    // "det", "det:0.1", "sto", "sto:0.0", "perf"; scenario count comes from elsewhere.
    static ControllerSpec parse(const std::string& token, int scenarios);
};

struct RunSpec {
    ControllerSpec controller;
    int horizon = 168;
    int history = 184 * 24;  // hours of trailing data used for fitting
    int ar_order = 168;
    int refit_every = 24;
    int sim_hours = 8760;
    std::vector<int> calendar;  // month boundaries, hours from simulation start
    std::uint64_t scenario_seed = 1;
    std::uint64_t noise_seed = 2;
    bool storage_noise = true;   // false gives v = 0
    double zoh_divisor = 12.0;
    double initial_fill = 0.5;   // E_0 as a fraction of capacity
    lp::Backend backend = lp::Backend::InteriorPoint;
    bool explicit_nonanticipativity = false;

    void validate() const;
};

// Month boundaries (first hour of each following month) for a 365-day year,
// counted from a simulation start on day `first_day` (0 = Jan 1), covering
// at least `hours` hours.
std::vector<int> month_calendar(int first_day, int hours);

HorizonTiming month_timing(int t, const std::vector<int>& calendar, int n);

struct BoundsUpdate {
    double e = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double ul_increment = 0.0;
    double ol_increment = 0.0;
};

BoundsUpdate update_storage_bounds(double e_next, double cap, double beta);

enum Violation : unsigned {
    kOverflowCw = 1u,
    kDryupCw = 2u,
    kOverflowHw = 4u,
    kDryupHw = 8u,
    kFallback = 16u,
};
int violation_count(unsigned flags);

struct TraceRow {
    int t = 0;
    ControlAction committed;
    ControlAction applied;
    RestoreKind restore = RestoreKind::Unchanged;
    Disturbance realized;
    PlantState state;  // after the hour
    Residuals residuals;
    StageCost cost;
    unsigned violations = 0;
    StorageBounds bounds;  // bounds in force for the next solve
    double noise_cw = 0.0, noise_hw = 0.0;
    double mismatch_cw = 0.0, mismatch_hw = 0.0;
    lp::Status lp_status = lp::Status::Optimal;
    long lp_iterations = 0;
    double max_balance_residual = 0.0;  // planned step, realized with LP slacks
};

struct ClosedLoopTrace {
    std::string controller;
    std::vector<int> calendar;
    PlantState initial;
    std::vector<TraceRow> rows;
    std::vector<std::string> diagnostics;
};

// truth holds `spec.history` hours of warm-up followed by at least
// `spec.sim_hours` realized hours.
ClosedLoopTrace run_closed_loop(const PlantConfig& c, const RunSpec& spec, const Trajectory& truth);

void write_trace_csv(std::ostream& os, const ClosedLoopTrace& tr);
void write_trace_csv(const std::string& path, const ClosedLoopTrace& tr);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace hvac
