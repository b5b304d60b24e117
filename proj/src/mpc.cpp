#include "hvac/mpc.hpp"

#include <string>

namespace hvac {

using lp::kInf;
using lp::Sense;

StorageBounds full_bounds(const PlantConfig& c) { return {0.0, c.cap_cw, 0.0, c.cap_hw}; }

VariableMap::VariableMap(int n, int scenarios, bool two_peaks)
    : n_(n), s_(scenarios), two_peaks_(two_peaks), cols_(11) {
    for (int q = 0; q < 11; ++q) {
        const auto qq = static_cast<Quantity>(q);
        const std::size_t steps = qq == Quantity::R1 || qq == Quantity::R2 ? 1 : (storage_like(qq) ? n + 1 : n);
        cols_[q].assign(steps * width(qq) * scenarios, -1);
    }
}

int VariableMap::width(Quantity q) {
    switch (q) {
        case Quantity::P: return kNumUnits;
        case Quantity::E:
        case Quantity::ul:
        case Quantity::ol:
        case Quantity::S_un:
        case Quantity::S_ov: return 2;
        default: return 1;
    }
}

bool VariableMap::storage_like(Quantity q) const {
    return q == Quantity::E || q == Quantity::ul || q == Quantity::ol;
}

std::size_t VariableMap::slot(Quantity q, int index, int k, int s) const {
    const int w = width(q);
    const bool peak = q == Quantity::R1 || q == Quantity::R2;
    const int steps = peak ? 1 : (storage_like(q) ? n_ + 1 : n_);
    if (peak) k = 0;
    if (w == 1) index = 0;
    if (s < 0 || s >= s_ || k < 0 || k >= steps || index < 0 || index >= w)
        throw std::out_of_range("VariableMap: index out of range");
    return (static_cast<std::size_t>(s) * steps + k) * w + index;
}

int VariableMap::col(Quantity q, int index, int k, int s) const {
    const int c = cols_[static_cast<int>(q)][slot(q, index, k, s)];
    if (c < 0) throw std::out_of_range("VariableMap: quantity not allocated");
    return c;
}

void VariableMap::set(Quantity q, int index, int k, int s, int column) {
    cols_[static_cast<int>(q)][slot(q, index, k, s)] = column;
}

LpSize expected_size(int n, int s, bool two_peaks, bool explicit_nonanticipativity) {
    const long p = two_peaks ? 2 : 1;
    const long nn = n, ss = s;
    if (explicit_nonanticipativity) return {6 + ss * (20 * nn + p), 13 * nn * ss + 7 * (ss - 1)};
    return {17 + ss * (20 * nn - 11 + p), 5 + ss * (13 * nn - 5)};
}

namespace {

constexpr int kTanks = 2;

BuiltLp build_scenarios(const PlantConfig& c, const PlantState& state, const std::vector<const Trajectory*>& traj,
                        const HorizonTiming& timing, const StorageBounds& bounds, bool share) {
    const int n = timing.n;
    const int ns = static_cast<int>(traj.size());
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    if (ns < 1) throw std::invalid_argument("at least one scenario is required");
    for (const auto* t : traj)
        if (static_cast<int>(t->size()) < n) throw std::invalid_argument("disturbance trajectory shorter than horizon");
    const int split = timing.first_month_steps();
    if (split < 1 || split > n) throw std::invalid_argument("inconsistent horizon timing");
    const bool two = timing.spans_two_months;
    const double prob = 1.0 / ns;
    const double w_demand = c.price_demand / timing.discount();
    const double e0[kTanks] = {state.e_cw, state.e_hw};
    const double ul0[kTanks] = {state.ul_cw, state.ul_hw};
    const double ol0[kTanks] = {state.ol_cw, state.ol_hw};
    const double e_lo[kTanks] = {bounds.lo_cw, bounds.lo_hw};
    const double e_hi[kTanks] = {bounds.hi_cw, bounds.hi_hw};
    const double rho[kTanks] = {c.rho_cw, c.rho_hw};

    BuiltLp out;
    auto& lp = out.lp;
    auto& map = out.map;
    map = VariableMap(n, ns, two);
    map.initial = state;

    auto set_all = [&](Quantity q, int index, int k, int col) {
        for (int s = 0; s < ns; ++s) map.set(q, index, k, s, col);
    };

    for (int j = 0; j < kTanks; ++j) {
        set_all(Quantity::E, j, 0, lp.add_col(0.0, e0[j], e0[j]));
        set_all(Quantity::ul, j, 0, lp.add_col(0.0, ul0[j], ul0[j]));
        set_all(Quantity::ol, j, 0, lp.add_col(0.0, ol0[j], ol0[j]));
    }

    auto add_p = [&](int k, int s, bool shared) {
        for (int u = 0; u < kNumUnits; ++u) {
            const int col = lp.add_col(0.0, unit_lower(c, static_cast<Unit>(u)), unit_upper(c, static_cast<Unit>(u)));
            if (shared) set_all(Quantity::P, u, k, col);
            else map.set(Quantity::P, u, k, s, col);
        }
    };
    // r_w and r_ng carry fixed prices, so their cost weight is the scenario
    // probability (or 1 when shared across all scenarios).
    auto add_wng = [&](int k, int s, bool shared, double weight) {
        const int rw = lp.add_col(weight * c.price_water, -kInf, kInf);
        const int rng = lp.add_col(weight * c.price_gas, -kInf, kInf);
        if (shared) {
            set_all(Quantity::r_w, 0, k, rw);
            set_all(Quantity::r_ng, 0, k, rng);
        } else {
            map.set(Quantity::r_w, 0, k, s, rw);
            map.set(Quantity::r_ng, 0, k, s, rng);
        }
    };
    auto add_e = [&](int k, int s, bool shared) {
        for (int j = 0; j < kTanks; ++j) {
            const int col = lp.add_col(0.0, e_lo[j], e_hi[j]);
            if (shared) set_all(Quantity::E, j, k, col);
            else map.set(Quantity::E, j, k, s, col);
        }
    };
    // Rows that involve only first-stage columns of step k in scenario s.
    auto first_stage_rows = [&](int k, int s) {
        const int ct = map.col(Unit::ct, k, s);
        int r = lp.add_row(Sense::EQ, 0.0);
        lp.add_coef(r, map.col(Quantity::r_w, 0, k, s), 1.0);
        lp.add_coef(r, ct, -c.alpha_w_ct);
        r = lp.add_row(Sense::EQ, 0.0);
        lp.add_coef(r, map.col(Quantity::r_ng, 0, k, s), 1.0);
        lp.add_coef(r, map.col(Unit::hwg, k, s), -c.alpha_ng_hwg);
        r = lp.add_row(Sense::EQ, 0.0);
        lp.add_coef(r, ct, 1.0);
        lp.add_coef(r, map.col(Unit::cs, k, s), -c.alpha_cond_cs);
        lp.add_coef(r, map.col(Unit::hx, k, s), -1.0);
        for (int j = 0; j < kTanks; ++j) {
            r = lp.add_row(Sense::EQ, 0.0);
            lp.add_coef(r, map.col(Quantity::E, j, k + 1, s), 1.0);
            lp.add_coef(r, map.col(Quantity::E, j, k, s), -1.0);
            lp.add_coef(r, map.col(j == 0 ? Unit::cw : Unit::hw, k, s), 1.0);
        }
    };

    if (share) {
        add_p(0, 0, true);
        add_wng(0, 0, true, 1.0);
        add_e(1, 0, true);
        first_stage_rows(0, 0);
    }

    for (int s = 0; s < ns; ++s) {
        const Trajectory& d = *traj[s];
        const int r1 = lp.add_col(prob * w_demand, state.peak, kInf);
        map.set(Quantity::R1, 0, 0, s, r1);
        int r2 = -1;
        if (two) {
            r2 = lp.add_col(prob * w_demand, state.peak_next.value_or(0.0), kInf);
            map.set(Quantity::R2, 0, 0, s, r2);
        }
        for (int k = 0; k < n; ++k) {
            const bool first = share && k == 0;
            if (!first) {
                add_p(k, s, false);
                add_wng(k, s, false, prob);
                add_e(k + 1, s, false);
            }
            const int re = lp.add_col(prob * d[k].price_elec, -kInf, kInf);
            map.set(Quantity::r_e, 0, k, s, re);
            for (int j = 0; j < kTanks; ++j) {
                map.set(Quantity::S_un, j, k, s, lp.add_col(0.0, 0.0, kInf));
                map.set(Quantity::S_ov, j, k, s, lp.add_col(0.0, 0.0, kInf));
                map.set(Quantity::ul, j, k + 1, s, lp.add_col(prob * rho[j], 0.0, kInf));
                map.set(Quantity::ol, j, k + 1, s, lp.add_col(prob * rho[j], 0.0, kInf));
            }

            int r = lp.add_row(Sense::EQ, d[k].load_elec);
            lp.add_coef(r, re, 1.0);
            lp.add_coef(r, map.col(Unit::cs, k, s), -c.alpha_e_cs);
            lp.add_coef(r, map.col(Unit::hrc, k, s), -c.alpha_e_hrc);
            lp.add_coef(r, map.col(Unit::hwg, k, s), -c.alpha_e_hwg);
            lp.add_coef(r, map.col(Unit::ct, k, s), -c.alpha_e_ct);
            if (!first) first_stage_rows(k, s);

            r = lp.add_row(Sense::EQ, d[k].load_cw);
            lp.add_coef(r, map.col(Unit::cs, k, s), 1.0);
            lp.add_coef(r, map.col(Unit::hrc, k, s), 1.0);
            lp.add_coef(r, map.col(Unit::cw, k, s), 1.0);
            lp.add_coef(r, map.col(Quantity::S_un, 0, k, s), 1.0);
            lp.add_coef(r, map.col(Quantity::S_ov, 0, k, s), -1.0);

            r = lp.add_row(Sense::EQ, d[k].load_hw);
            lp.add_coef(r, map.col(Unit::hrc, k, s), c.alpha_h_hrc);
            lp.add_coef(r, map.col(Unit::hwg, k, s), 1.0);
            lp.add_coef(r, map.col(Unit::hx, k, s), -1.0);
            lp.add_coef(r, map.col(Unit::hw, k, s), 1.0);
            lp.add_coef(r, map.col(Quantity::S_un, 1, k, s), 1.0);
            lp.add_coef(r, map.col(Quantity::S_ov, 1, k, s), -1.0);

            for (int j = 0; j < kTanks; ++j) {
                for (auto [q, sq] : {std::pair{Quantity::ul, Quantity::S_un}, std::pair{Quantity::ol, Quantity::S_ov}}) {
                    r = lp.add_row(Sense::EQ, 0.0);
                    lp.add_coef(r, map.col(q, j, k + 1, s), 1.0);
                    lp.add_coef(r, map.col(q, j, k, s), -1.0);
                    lp.add_coef(r, map.col(sq, j, k, s), -1.0);
                }
            }

            r = lp.add_row(Sense::GE, 0.0);
            lp.add_coef(r, k < split ? r1 : r2, 1.0);
            lp.add_coef(r, re, -1.0);
        }
    }

    if (!share) {
        for (int s = 1; s < ns; ++s)
            for (int u = 0; u < kNumUnits; ++u) {
                const int r = lp.add_row(Sense::EQ, 0.0);
                lp.add_coef(r, map.col(static_cast<Unit>(u), 0, s), 1.0);
                lp.add_coef(r, map.col(static_cast<Unit>(u), 0, 0), -1.0);
            }
    }
    return out;
}

}  // namespace

BuiltLp build_deterministic(const PlantConfig& c, const PlantState& state, const Trajectory& mean,
                            const HorizonTiming& timing, const StorageBounds& bounds) {
    return build_scenarios(c, state, {&mean}, timing, bounds, true);
}

BuiltLp build_perfect(const PlantConfig& c, const PlantState& state, const Trajectory& truth,
                      const HorizonTiming& timing, const StorageBounds& bounds) {
    return build_deterministic(c, state, truth, timing, bounds);
}

BuiltLp build_stochastic(const PlantConfig& c, const PlantState& state, const ScenarioSet& scenarios,
                         const HorizonTiming& timing, const StorageBounds& bounds, const BuildOptions& opts) {
    if (scenarios.count() == 0) throw std::invalid_argument("build_stochastic: empty scenario set");
    std::vector<const Trajectory*> traj;
    for (const auto& t : scenarios.scenarios) traj.push_back(&t);
    if (opts.explicit_nonanticipativity && traj.size() > 1)
        return build_scenarios(c, state, traj, timing, bounds, false);
    return build_scenarios(c, state, traj, timing, bounds, true);
}

ControlAction action_at(const lp::LpSolution& sol, const VariableMap& map, int k, int s) {
    std::array<double, kNumUnits> v{};
    for (int u = 0; u < kNumUnits; ++u) v[u] = sol.primal.at(map.col(static_cast<Unit>(u), k, s));
    return from_array(v);
}

Slacks slacks_at(const lp::LpSolution& sol, const VariableMap& map, int k, int s) {
    Slacks out;
    out.s_un_cw = sol.primal.at(map.col(Quantity::S_un, 0, k, s));
    out.s_ov_cw = sol.primal.at(map.col(Quantity::S_ov, 0, k, s));
    out.s_un_hw = sol.primal.at(map.col(Quantity::S_un, 1, k, s));
    out.s_ov_hw = sol.primal.at(map.col(Quantity::S_ov, 1, k, s));
    return out;
}

ExtractedAction extract_action(const lp::LpSolution& sol, const VariableMap& map) {
    if (sol.status != lp::Status::Optimal)
        throw SolveError(sol.status, std::string("controller LP not solved: ") + lp::status_name(sol.status));
    ExtractedAction out;
    out.action = action_at(sol, map, 0, 0);
    out.slacks = slacks_at(sol, map, 0, 0);
    PlantState p = map.initial;
    p.e_cw -= out.action.p_cw;
    p.e_hw -= out.action.p_hw;
    p.ul_cw = sol.primal.at(map.col(Quantity::ul, 0, 1));
    p.ul_hw = sol.primal.at(map.col(Quantity::ul, 1, 1));
    p.ol_cw = sol.primal.at(map.col(Quantity::ol, 0, 1));
    p.ol_hw = sol.primal.at(map.col(Quantity::ol, 1, 1));
    p.peak = sol.primal.at(map.col(Quantity::R1, 0, 0));
    if (map.two_peaks()) p.peak_next = sol.primal.at(map.col(Quantity::R2, 0, 0));
    out.predicted = p;
    return out;
}

}  // namespace hvac
