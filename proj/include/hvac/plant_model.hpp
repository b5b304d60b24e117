#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

namespace hvac {

// Conversion coefficients, capacities, rate limits, prices and penalties.
// Units: kW for rates, kWh for storage (hourly sampling, so they interconvert 1:1).
struct PlantConfig {
    double alpha_e_cs = 0.20;
    double alpha_e_hrc = 0.25;
    double alpha_e_hwg = 0.02;
    double alpha_e_ct = 0.03;
    double alpha_w_ct = 1.5;   // gal/kWh
    double alpha_ng_hwg = 1.25;
    double alpha_cond_cs = 1.2;
    double alpha_h_hrc = 1.0;

    double cap_cw = 24000.0;
    double cap_hw = 8000.0;

    double pmax_cs = 12000.0;
    double pmax_hrc = 2500.0;
    double pmax_hwg = 5000.0;
    double pmax_ct = 18000.0;
    double pmax_hx = 2500.0;
    double pmax_cw = 6000.0;
    double pmax_hw = 2500.0;

    double price_water = 0.009;  // $/gal
    double price_gas = 0.018;    // $/kWh
    double price_demand = 4.5;   // $/kW per month

    double rho_cw = 10.0;
    double rho_hw = 10.0;

    double buffer = 0.0;

    // Throws std::invalid_argument naming the first offending field.
    void validate() const;
};

void to_json(nlohmann::json& j, const PlantConfig& c);
void from_json(const nlohmann::json& j, PlantConfig& c);

struct Disturbance {
    double load_elec = 0.0;
    double load_cw = 0.0;
    double load_hw = 0.0;
    double price_elec = 0.0;
};

// p_cw, p_hw are signed: discharge > 0, charge < 0.
struct ControlAction {
    double p_cs = 0.0;
    double p_hrc = 0.0;
    double p_hwg = 0.0;
    double p_ct = 0.0;
    double p_hx = 0.0;
    double p_cw = 0.0;
    double p_hw = 0.0;
};

inline constexpr int kNumUnits = 7;
enum class Unit { cs = 0, hrc, hwg, ct, hx, cw, hw };
const char* unit_name(Unit u);

std::array<double, kNumUnits> as_array(const ControlAction& a);
ControlAction from_array(const std::array<double, kNumUnits>& v);
double unit_lower(const PlantConfig& c, Unit u);
double unit_upper(const PlantConfig& c, Unit u);
bool within_bounds(const PlantConfig& c, const ControlAction& a, double tol = 1e-9);

struct PlantState {
    double e_cw = 0.0;
    double e_hw = 0.0;
    double ul_cw = 0.0;
    double ul_hw = 0.0;
    double ol_cw = 0.0;
    double ol_hw = 0.0;
    double peak = 0.0;
    std::optional<double> peak_next;
};

struct Residuals {
    double r_e = 0.0;   // kW
    double r_w = 0.0;   // gal/h
    double r_ng = 0.0;  // kW
};

struct Slacks {
    double s_un_cw = 0.0;
    double s_ov_cw = 0.0;
    double s_un_hw = 0.0;
    double s_ov_hw = 0.0;
};

struct BalanceResiduals {
    double cw = 0.0;
    double hw = 0.0;
    double cond = 0.0;
};

struct StageCost {
    double electricity = 0.0;
    double water = 0.0;
    double gas = 0.0;
    double total() const { return electricity + water + gas; }
};

Residuals residual_demands(const PlantConfig& c, const ControlAction& a, double load_elec);
BalanceResiduals balance_residuals(const PlantConfig& c, const ControlAction& a,
                                   const Disturbance& d, const Slacks& s = {});
StageCost stage_cost_parts(const PlantConfig& c, const ControlAction& a, const Disturbance& d);
double stage_cost(const PlantConfig& c, const ControlAction& a, const Disturbance& d);

// max(min(hours/N, 1), 1/N). Throws on horizon_n == 0.
double demand_discount(double hours_to_month_end, int horizon_n);

// e' = e - p + v (no clamping), peak' = max(peak, realized r_e).
PlantState step_state(const PlantState& s, const ControlAction& a, const Disturbance& realized,
                      std::array<double, 2> noise, const PlantConfig& c);

}  // namespace hvac
