// Scripted step-through of the receding-horizon loop for the perfect-information
// controller, written against the plant equations rather than simulate.cpp.
// Storage noise is taken from the trace under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hvac/mpc.hpp"
#include "hvac/restoration.hpp"
#include "hvac/simulate.hpp"

namespace test {

struct StepMismatch {
    int t = -1;
    std::string field;
    double expected = 0.0;
    double got = 0.0;
};

struct StepThroughResult {
    double max_abs_diff = 0.0;
    StepMismatch worst;
    int steps = 0;
};

inline StepThroughResult step_through_perfect(const hvac::PlantConfig& c, const hvac::RunSpec& spec,
                                              const hvac::Trajectory& truth, const hvac::ClosedLoopTrace& tr) {
    using namespace hvac;
    StepThroughResult res;
    auto cmp = [&](int t, const char* field, double want, double got) {
        const double d = std::abs(want - got);
        if (d > res.max_abs_diff || res.worst.t < 0) {
            res.worst = {t, field, want, got};
            res.max_abs_diff = d;
        }
    };
    const double beta = spec.controller.beta;
    const double cap[2] = {c.cap_cw, c.cap_hw};
    double e[2] = {spec.initial_fill * c.cap_cw, spec.initial_fill * c.cap_hw};
    double ul[2] = {0, 0}, ol[2] = {0, 0};
    double lo[2], hi[2];
    for (int j = 0; j < 2; ++j) {
        lo[j] = beta * cap[j];
        hi[j] = (1 - beta) * cap[j];
        if (e[j] < lo[j]) lo[j] = e[j];
        if (e[j] > hi[j]) hi[j] = e[j];
    }
    double peak = 0.0;

    for (int t = 0; t < static_cast<int>(tr.rows.size()); ++t) {
        const auto& row = tr.rows[t];
        const std::size_t g = static_cast<std::size_t>(spec.history) + t;

        HorizonTiming tm;
        tm.t = t;
        tm.n = spec.horizon;
        int mi = 0;
        while (spec.calendar[mi] <= t) ++mi;
        tm.month_end = spec.calendar[mi];
        tm.spans_two_months = t + spec.horizon - 1 > tm.month_end;
        if (tm.spans_two_months) tm.next_month_end = spec.calendar.at(mi + 1);

        PlantState s;
        s.e_cw = e[0], s.e_hw = e[1];
        s.ul_cw = ul[0], s.ul_hw = ul[1];
        s.ol_cw = ol[0], s.ol_hw = ol[1];
        s.peak = peak;
        if (tm.spans_two_months) s.peak_next = 0.0;

        Trajectory window(truth.begin() + g, truth.begin() + g + spec.horizon);
        const auto built = build_perfect(c, s, window, tm, {lo[0], hi[0], lo[1], hi[1]});
        const auto sol = lp::solve_with(built.lp, spec.backend);
        ControlAction committed;
        if (sol.status == lp::Status::Optimal) committed = action_at(sol, built.map, 0, 0);
        const auto ca = as_array(committed), cb = as_array(row.committed);
        for (int u = 0; u < kNumUnits; ++u) cmp(t, "committed", ca[u], cb[u]);

        const Disturbance& d = truth[g];
        const auto rest = restore(c, s, committed, d);
        const ControlAction a = rest.action;
        const auto aa = as_array(a), ab = as_array(row.applied);
        for (int u = 0; u < kNumUnits; ++u) cmp(t, "applied", aa[u], ab[u]);

        const double supply[2] = {a.p_cs + a.p_hrc + a.p_cw, c.alpha_h_hrc * a.p_hrc + a.p_hwg - a.p_hx + a.p_hw};
        const double load[2] = {d.load_cw, d.load_hw};
        const double p[2] = {a.p_cw, a.p_hw};
        const double v[2] = {row.noise_cw, row.noise_hw};
        for (int j = 0; j < 2; ++j) {
            const double m = load[j] - supply[j];  // unmet by the plant, drawn from the tank
            double en = e[j] - p[j] + v[j] - m;
            ul[j] += std::max(m, 0.0);
            ol[j] += std::max(-m, 0.0);
            const double blo = beta * cap[j], bhi = (1 - beta) * cap[j];
            if (en > cap[j]) {
                ol[j] += en - cap[j];
                en = cap[j];
                lo[j] = blo, hi[j] = cap[j];
            } else if (en < 0.0) {
                ul[j] += -en;
                en = 0.0;
                lo[j] = 0.0, hi[j] = bhi;
            } else if (en > bhi) {
                lo[j] = blo, hi[j] = en;
            } else if (en < blo) {
                lo[j] = en, hi[j] = bhi;
            } else {
                lo[j] = blo, hi[j] = bhi;
            }
            e[j] = en;
        }
        const double r_e = c.alpha_e_cs * a.p_cs + c.alpha_e_hrc * a.p_hrc + c.alpha_e_hwg * a.p_hwg +
                           c.alpha_e_ct * a.p_ct + d.load_elec;
        peak = std::max(peak, r_e);

        cmp(t, "e_cw", e[0], row.state.e_cw);
        cmp(t, "e_hw", e[1], row.state.e_hw);
        cmp(t, "ul_cw", ul[0], row.state.ul_cw);
        cmp(t, "ul_hw", ul[1], row.state.ul_hw);
        cmp(t, "ol_cw", ol[0], row.state.ol_cw);
        cmp(t, "ol_hw", ol[1], row.state.ol_hw);
        cmp(t, "peak", peak, row.state.peak);
        cmp(t, "lo_cw", lo[0], row.bounds.lo_cw);
        cmp(t, "hi_cw", hi[0], row.bounds.hi_cw);
        cmp(t, "lo_hw", lo[1], row.bounds.lo_hw);
        cmp(t, "hi_hw", hi[1], row.bounds.hi_hw);
        cmp(t, "r_e", r_e, row.residuals.r_e);

        if (t + 1 == tm.month_end) peak = 0.0;
        ++res.steps;
    }
    return res;
}

}  // namespace test
