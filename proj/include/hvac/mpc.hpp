#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hvac/forecast.hpp"
#include "hvac/lp.hpp"
#include "hvac/plant_model.hpp"

namespace hvac {

// Interval k of a horizon starting at hour t is the hour served by the action
// applied at t+k; it belongs to the month ending at month_end iff t+k < month_end.
struct HorizonTiming {
    int t = 0;
    int n = 1;
    int month_end = 1;                  // first hour index of the next month
    std::optional<int> next_month_end;  // set when spans_two_months
    bool spans_two_months = false;

    // Number of horizon steps charged to the first peak variable.
    int first_month_steps() const { return spans_two_months ? month_end - t : n; }
    double discount() const { return demand_discount(month_end - t, n); }
};

struct StorageBounds {
    double lo_cw = 0.0;
    double hi_cw = 0.0;
    double lo_hw = 0.0;
    double hi_hw = 0.0;
};

StorageBounds full_bounds(const PlantConfig& c);

enum class Quantity { P, r_e, r_w, r_ng, E, ul, ol, S_un, S_ov, R1, R2 };

// Column lookup. `index` is the unit for P and the tank (0 = cw, 1 = hw) for
// E, ul, ol, S_un, S_ov; it is ignored otherwise. Storage-like quantities
// (E, ul, ol) run over k = 0..N, the rest over k = 0..N-1; peaks ignore k.
class VariableMap {
public:
    VariableMap() = default;
    VariableMap(int n, int scenarios, bool two_peaks);

    int horizon() const { return n_; }
    int scenarios() const { return s_; }
    bool two_peaks() const { return two_peaks_; }

    int col(Quantity q, int index, int k, int s = 0) const;
    int col(Unit u, int k, int s = 0) const { return col(Quantity::P, static_cast<int>(u), k, s); }
    void set(Quantity q, int index, int k, int s, int column);
    static int width(Quantity q);
    bool storage_like(Quantity q) const;

    PlantState initial;

private:
    int n_ = 0, s_ = 0;
    bool two_peaks_ = false;
    std::vector<std::vector<int>> cols_;
    std::size_t slot(Quantity q, int index, int k, int s) const;
};

struct BuiltLp {
    lp::LinearProgram lp;
    VariableMap map;
};

struct BuildOptions {
    // Replicate the first stage per scenario and tie it with equality rows
    // instead of sharing columns.
    bool explicit_nonanticipativity = false;
};

BuiltLp build_deterministic(const PlantConfig& c, const PlantState& state, const Trajectory& mean,
                            const HorizonTiming& timing, const StorageBounds& bounds);
BuiltLp build_stochastic(const PlantConfig& c, const PlantState& state, const ScenarioSet& scenarios,
                         const HorizonTiming& timing, const StorageBounds& bounds,
                         const BuildOptions& opts = {});
BuiltLp build_perfect(const PlantConfig& c, const PlantState& state, const Trajectory& truth,
                      const HorizonTiming& timing, const StorageBounds& bounds);

struct LpSize {
    long cols = 0;
    long rows = 0;
};

// Closed-form column/row counts of the builders above.
// Deterministic (S = 1): cols = 7N + 3N + 4N + 2(N+1) + 4(N+1) + P, rows = 13N,
// with P = 1 or 2 peak variables.
// Shared first stage: cols = 17 + S(20N - 11 + P), rows = 5 + S(13N - 5).
// Explicit nonanticipativity: cols = 6 + S(20N + P), rows = 13NS + 7(S - 1).
LpSize expected_size(int n, int scenarios, bool two_peaks, bool explicit_nonanticipativity = false);

class SolveError : public std::runtime_error {
public:
    SolveError(lp::Status s, const std::string& what) : std::runtime_error(what), status(s) {}
    lp::Status status;
};

struct ExtractedAction {
    ControlAction action;
    PlantState predicted;  // E = E_t - P_t; ul, ol, peaks read from scenario 0
    Slacks slacks;         // first-step slacks of scenario 0
};

// Throws SolveError unless the solution is Optimal.
ExtractedAction extract_action(const lp::LpSolution& sol, const VariableMap& map);
Slacks slacks_at(const lp::LpSolution& sol, const VariableMap& map, int k, int s = 0);
ControlAction action_at(const lp::LpSolution& sol, const VariableMap& map, int k, int s = 0);

}  // namespace hvac
