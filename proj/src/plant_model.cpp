#include "hvac/plant_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvac {

namespace {

#define HVAC_CONFIG_FIELDS(X)                                                                    \
    X(alpha_e_cs) X(alpha_e_hrc) X(alpha_e_hwg) X(alpha_e_ct) X(alpha_w_ct) X(alpha_ng_hwg)       \
    X(alpha_cond_cs) X(alpha_h_hrc) X(cap_cw) X(cap_hw) X(pmax_cs) X(pmax_hrc) X(pmax_hwg)       \
    X(pmax_ct) X(pmax_hx) X(pmax_cw) X(pmax_hw) X(price_water) X(price_gas) X(price_demand)       \
    X(rho_cw) X(rho_hw) X(buffer)

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid plant config: " + what);
}

}  // namespace

void PlantConfig::validate() const {
#define HVAC_CHECK_NONNEG(f) require(std::isfinite(f) && (f) >= 0.0, #f " must be finite and >= 0");
    HVAC_CONFIG_FIELDS(HVAC_CHECK_NONNEG)
#undef HVAC_CHECK_NONNEG
    require(buffer < 0.5, "buffer must be < 0.5");
    require(cap_cw > 0.0 && cap_hw > 0.0, "storage capacities must be > 0");
    require(pmax_cw <= cap_cw, "pmax_cw must not exceed cap_cw");
    require(pmax_hw <= cap_hw, "pmax_hw must not exceed cap_hw");
}

void to_json(nlohmann::json& j, const PlantConfig& c) {
    j = nlohmann::json::object();
#define HVAC_TO_JSON(f) j[#f] = c.f;
    HVAC_CONFIG_FIELDS(HVAC_TO_JSON)
#undef HVAC_TO_JSON
}

void from_json(const nlohmann::json& j, PlantConfig& c) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
#define HVAC_KNOWN(f) known = known || it.key() == #f;
        HVAC_CONFIG_FIELDS(HVAC_KNOWN)
#undef HVAC_KNOWN
        if (!known) throw std::invalid_argument("unknown plant config field: " + it.key());
    }
#define HVAC_FROM_JSON(f) \
    if (j.contains(#f)) j.at(#f).get_to(c.f);
    HVAC_CONFIG_FIELDS(HVAC_FROM_JSON)
#undef HVAC_FROM_JSON
}

const char* unit_name(Unit u) {
    static const char* names[kNumUnits] = {"cs", "hrc", "hwg", "ct", "hx", "cw", "hw"};
    return names[static_cast<int>(u)];
}

std::array<double, kNumUnits> as_array(const ControlAction& a) {
    return {a.p_cs, a.p_hrc, a.p_hwg, a.p_ct, a.p_hx, a.p_cw, a.p_hw};
}

ControlAction from_array(const std::array<double, kNumUnits>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double unit_upper(const PlantConfig& c, Unit u) {
    switch (u) {
        case Unit::cs: return c.pmax_cs;
        case Unit::hrc: return c.pmax_hrc;
        case Unit::hwg: return c.pmax_hwg;
        case Unit::ct: return c.pmax_ct;
        case Unit::hx: return c.pmax_hx;
        case Unit::cw: return c.pmax_cw;
        case Unit::hw: return c.pmax_hw;
    }
    return 0.0;
}

double unit_lower(const PlantConfig& c, Unit u) {
    if (u == Unit::cw || u == Unit::hw) return -unit_upper(c, u);
    return 0.0;
}

bool within_bounds(const PlantConfig& c, const ControlAction& a, double tol) {
    auto v = as_array(a);
    for (int i = 0; i < kNumUnits; ++i) {
        auto u = static_cast<Unit>(i);
        if (v[i] < unit_lower(c, u) - tol || v[i] > unit_upper(c, u) + tol) return false;
    }
    return true;
}

Residuals residual_demands(const PlantConfig& c, const ControlAction& a, double load_elec) {
    Residuals r;
    r.r_e = c.alpha_e_cs * a.p_cs + c.alpha_e_hrc * a.p_hrc + c.alpha_e_hwg * a.p_hwg +
            c.alpha_e_ct * a.p_ct + load_elec;
    r.r_w = c.alpha_w_ct * a.p_ct;
    r.r_ng = c.alpha_ng_hwg * a.p_hwg;
    return r;
}

BalanceResiduals balance_residuals(const PlantConfig& c, const ControlAction& a,
                                   const Disturbance& d, const Slacks& s) {
    BalanceResiduals b;
    b.cw = a.p_cs + a.p_hrc + a.p_cw + s.s_un_cw - s.s_ov_cw - d.load_cw;
    b.hw = c.alpha_h_hrc * a.p_hrc + a.p_hwg - a.p_hx + a.p_hw + s.s_un_hw - s.s_ov_hw - d.load_hw;
    b.cond = a.p_ct - c.alpha_cond_cs * a.p_cs - a.p_hx;
    return b;
}

StageCost stage_cost_parts(const PlantConfig& c, const ControlAction& a, const Disturbance& d) {
    auto r = residual_demands(c, a, d.load_elec);
    return {d.price_elec * r.r_e, c.price_water * r.r_w, c.price_gas * r.r_ng};
}

double stage_cost(const PlantConfig& c, const ControlAction& a, const Disturbance& d) {
    return stage_cost_parts(c, a, d).total();
}

double demand_discount(double hours_to_month_end, int horizon_n) {
    if (horizon_n < 1) throw std::invalid_argument("demand_discount: horizon must be >= 1");
    double n = static_cast<double>(horizon_n);
    return std::max(std::min(hours_to_month_end / n, 1.0), 1.0 / n);
}

PlantState step_state(const PlantState& s, const ControlAction& a, const Disturbance& realized,
                      std::array<double, 2> noise, const PlantConfig& c) {
    PlantState n = s;
    n.e_cw = s.e_cw - a.p_cw + noise[0];
    n.e_hw = s.e_hw - a.p_hw + noise[1];
    n.peak = std::max(s.peak, residual_demands(c, a, realized.load_elec).r_e);
    return n;
}

}  // namespace hvac
