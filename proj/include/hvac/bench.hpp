#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvac/forecast.hpp"
#include "hvac/plant_model.hpp"
#include "hvac/simulate.hpp"

namespace hvac {

struct CostBreakdown {
    double electricity = 0.0;
    double water = 0.0;
    double gas = 0.0;
    double demand = 0.0;
    double total = 0.0;  // accumulated independently of the components

    double component_sum() const { return electricity + water + gas + demand; }
};

CostBreakdown operator-(const CostBreakdown& a, const CostBreakdown& b);

struct ValidationOptions {
    double amplitude = 0.05;  // relative std of the perturbation
    double phi = 0.9;         // AR(1) coefficient of the perturbation
};

// Each member is base * (1 + amplitude * e) on the three load channels, with e a
// unit-variance AR(1) sequence per channel; prices are left alone.
std::vector<Trajectory> make_validation_set(const Trajectory& base, int count, std::uint64_t seed,
                                            const ValidationOptions& opts = {});

// Month index of every hour in [0, hours); throws if the calendar falls short.
std::vector<int> month_of_hours(const std::vector<int>& calendar, int hours);

// Energy terms sum the realized stage costs; the demand term charges the monthly
// maximum of realized r_e (floored at 0).
CostBreakdown annual_cost(const PlantConfig& c, const ClosedLoopTrace& tr, const std::vector<int>& calendar);

// Campus electricity energy plus demand charge on the raw electrical load over
// the simulated slice of `truth` (hours [offset, offset + hours)).
CostBreakdown campus_only_cost(const PlantConfig& c, const Trajectory& truth, std::size_t offset, int hours,
                               const std::vector<int>& calendar);

CostBreakdown cost_of_central_plant(const CostBreakdown& controller, const CostBreakdown& campus_only);

inline double value_of_stochastic(double ccp_det, double ccp_sto) { return ccp_det - ccp_sto; }

// Violation flags (overflow, dry-up, fallback) per 100 hours.
double violation_rate(const ClosedLoopTrace& tr);

// max |E_{t+1} - (E_t - P_t + v_t - m_t)| over hours without a clamp flag, where
// m_t is the recorded balance mismatch.
double storage_identity_error(const ClosedLoopTrace& tr);

struct BenchmarkConfig {
    RunSpec base;  // controller field is replaced per run
    int validation_count = 200;
    std::uint64_t validation_seed = 1001;
    ValidationOptions validation;
    int jobs = 0;  // 0: hardware concurrency
    int cdf_points = 101;
};

struct RunResult {
    std::string controller;
    int scenario = 0;
    bool ok = false;
    std::string error;
    CostBreakdown cost;
    CostBreakdown ccp;
    double violation_rate = 0.0;
    int fallbacks = 0;
    int non_optimal = 0;
    double max_balance_residual = 0.0;
    double storage_identity_error = 0.0;
    double seconds = 0.0;
};

struct Estimate {
    int n = 0;
    double mean = 0.0;
    double se = 0.0;
};

Estimate estimate(const std::vector<double>& xs);

struct ControllerSummary {
    std::string controller;
    int runs = 0;
    int failed = 0;
    Estimate cost, ccp, violations;
    CostBreakdown mean_components;
};

struct CdfGrid {
    std::string series;
    std::vector<double> x;
    std::vector<double> p;
};

// Empirical CDF of xs evaluated on a uniform grid spanning [lo, hi].
CdfGrid empirical_cdf(const std::string& series, const std::vector<double>& xs, double lo, double hi, int points);

struct BenchmarkReport {
    std::vector<std::string> controllers;
    int validation_count = 0;
    CostBreakdown campus_mean;
    std::vector<RunResult> runs;  // controller-major
    std::vector<ControllerSummary> summaries;
    std::string vsmpc_det, vsmpc_sto;  // labels used for VSMPC, empty if absent
    std::vector<double> vsmpc;         // per validation scenario
    Estimate vsmpc_mean;
    std::vector<CdfGrid> cdfs;
    std::vector<std::string> warnings;
    double seconds = 0.0;

    const RunResult* find(const std::string& controller, int scenario) const;
    // Paired difference a - b of a run metric ("cost", "ccp", "violations") over
    // scenarios where both runs succeeded.
    Estimate paired(const std::string& a, const std::string& b, const std::string& metric) const;
};

BenchmarkReport run_benchmark(const PlantConfig& c, const BenchmarkConfig& cfg,
                              const std::vector<ControllerSpec>& controllers, const Trajectory& base_truth);

void to_json(nlohmann::json& j, const CostBreakdown& b);
void to_json(nlohmann::json& j, const Estimate& e);
void to_json(nlohmann::json& j, const BenchmarkReport& r);

void write_runs_csv(std::ostream& os, const BenchmarkReport& r);
void write_cdf_csv(std::ostream& os, const BenchmarkReport& r);

// Annual cost, CCP and violation figures of one trace.
nlohmann::json trace_summary(const PlantConfig& c, const ClosedLoopTrace& tr, const Trajectory& truth,
                             std::size_t offset);

}  // namespace hvac
