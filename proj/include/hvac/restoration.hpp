#pragma once

#include <array>
#include <string>

#include "hvac/plant_model.hpp"

namespace hvac {

enum class RestoreKind { Unchanged, Corrected, Fallback };
const char* restore_kind_name(RestoreKind k);

struct RestoreOutcome {
    RestoreKind kind = RestoreKind::Unchanged;
    ControlAction action;                     // zero action on Fallback
    std::array<double, kNumUnits> deltas{};   // corrected minus committed
    double total_correction = 0.0;            // sum of |deltas| from the LP
    std::string diagnostic;
};

// True when the action meets the realized chilled/hot-water loads, keeps both
// tanks inside [0, cap] after the hour and respects unit bounds.
bool action_feasible(const PlantConfig& c, const PlantState& s, const ControlAction& a,
                     const Disturbance& realized, double tol = 1e-7);

// Minimal-L1 correction of a committed action against realized loads.
// Storage after the hour is E - (P + dP); P_ct is recomputed from the
// condenser balance after solving.
RestoreOutcome restore(const PlantConfig& c, const PlantState& s, const ControlAction& a,
                       const Disturbance& realized);

}  // namespace hvac
