#include "hvac/restoration.hpp"

#include <cmath>

#include "hvac/lp.hpp"

namespace hvac {

const char* restore_kind_name(RestoreKind k) {
    switch (k) {
        case RestoreKind::Unchanged: return "unchanged";
        case RestoreKind::Corrected: return "corrected";
        case RestoreKind::Fallback: return "fallback";
    }
    return "?";
}

bool action_feasible(const PlantConfig& c, const PlantState& s, const ControlAction& a,
                     const Disturbance& realized, double tol) {
    if (!within_bounds(c, a, tol)) return false;
    const auto b = balance_residuals(c, a, realized);
    if (std::abs(b.cw) > tol * (1.0 + realized.load_cw)) return false;
    if (std::abs(b.hw) > tol * (1.0 + realized.load_hw)) return false;
    const double ecw = s.e_cw - a.p_cw;
    const double ehw = s.e_hw - a.p_hw;
    return ecw >= -tol * (1.0 + c.cap_cw) && ecw <= c.cap_cw * (1.0 + tol) + tol &&
           ehw >= -tol * (1.0 + c.cap_hw) && ehw <= c.cap_hw * (1.0 + tol) + tol;
}

RestoreOutcome restore(const PlantConfig& c, const PlantState& s, const ControlAction& a,
                       const Disturbance& realized) {
    RestoreOutcome out;
    if (action_feasible(c, s, a, realized)) {
        out.kind = RestoreKind::Unchanged;
        out.action = a;
        return out;
    }
    using lp::Sense;
    const auto p = as_array(a);
    lp::LinearProgram prog;
    std::array<int, kNumUnits> d{};
    for (int u = 0; u < kNumUnits; ++u) {
        const auto unit = static_cast<Unit>(u);
        d[u] = prog.add_col(0.0, unit_lower(c, unit) - p[u], unit_upper(c, unit) - p[u]);
        lp::add_free_abs(prog, d[u]);
    }
    auto dp = [&](Unit u) { return d[static_cast<int>(u)]; };

    int r = prog.add_row(Sense::EQ, realized.load_cw - (a.p_cs + a.p_hrc + a.p_cw));
    prog.add_coef(r, dp(Unit::cs), 1.0);
    prog.add_coef(r, dp(Unit::hrc), 1.0);
    prog.add_coef(r, dp(Unit::cw), 1.0);

    r = prog.add_row(Sense::EQ,
                     realized.load_hw - (c.alpha_h_hrc * a.p_hrc + a.p_hwg - a.p_hx + a.p_hw));
    prog.add_coef(r, dp(Unit::hrc), c.alpha_h_hrc);
    prog.add_coef(r, dp(Unit::hwg), 1.0);
    prog.add_coef(r, dp(Unit::hx), -1.0);
    prog.add_coef(r, dp(Unit::hw), 1.0);

    // 0 <= E - P - dP <= cap  <=>  E - P - cap <= dP <= E - P
    const double lo_cw = s.e_cw - a.p_cw - c.cap_cw, hi_cw = s.e_cw - a.p_cw;
    const double lo_hw = s.e_hw - a.p_hw - c.cap_hw, hi_hw = s.e_hw - a.p_hw;
    auto tighten = [&](int col, double lo, double hi) {
        prog.lb[col] = std::max(prog.lb[col], lo);
        prog.ub[col] = std::min(prog.ub[col], hi);
    };
    tighten(dp(Unit::cw), lo_cw, hi_cw);
    tighten(dp(Unit::hw), lo_hw, hi_hw);
    for (int u : {dp(Unit::cw), dp(Unit::hw)})
        if (prog.lb[u] > prog.ub[u]) {
            out.kind = RestoreKind::Fallback;
            out.diagnostic = "storage window and rate limits do not intersect";
            return out;
        }

    const auto sol = lp::solve(prog);
    if (sol.status != lp::Status::Optimal) {
        out.kind = RestoreKind::Fallback;
        out.diagnostic = std::string("restoration LP ") + lp::status_name(sol.status);
        return out;
    }
    std::array<double, kNumUnits> v{};
    for (int u = 0; u < kNumUnits; ++u) {
        out.deltas[u] = sol.primal[d[u]];
        v[u] = p[u] + out.deltas[u];
    }
    v[static_cast<int>(Unit::ct)] = c.alpha_cond_cs * v[static_cast<int>(Unit::cs)] + v[static_cast<int>(Unit::hx)];
    out.deltas[static_cast<int>(Unit::ct)] = v[static_cast<int>(Unit::ct)] - p[static_cast<int>(Unit::ct)];
    out.total_correction = sol.objective;
    out.action = from_array(v);
    out.kind = RestoreKind::Corrected;
    return out;
}

}  // namespace hvac
