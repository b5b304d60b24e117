#include "hvac/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hvac {

std::string ControllerSpec::label() const {
    std::ostringstream os;
    switch (kind) {
        case ControllerKind::Deterministic: os << "det:" << beta; break;
        case ControllerKind::Stochastic: os << "sto:" << beta; break;
        case ControllerKind::Perfect: os << "perf"; break;
    }
    return os.str();
}

ControllerSpec ControllerSpec::parse(const std::string& token, int scenarios) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    ControllerSpec s;
    if (name == "det") {
        s.kind = ControllerKind::Deterministic;
        s.beta = 0.1;
    } else if (name == "sto") {
        s.kind = ControllerKind::Stochastic;
        s.beta = 0.0;
        s.scenarios = scenarios;
    } else if (name == "perf") {
        s.kind = ControllerKind::Perfect;
    } else {
        throw std::invalid_argument("unknown controller '" + token + "'");
    }
    if (colon != std::string::npos) {
        if (s.kind == ControllerKind::Perfect) throw std::invalid_argument("perf takes no buffer: '" + token + "'");
        const std::string b = token.substr(colon + 1);
        std::size_t pos = 0;
        try {
            s.beta = std::stod(b, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != b.size()) throw std::invalid_argument("bad buffer in controller '" + token + "'");
        if (s.beta < 0.0 || s.beta >= 0.5) throw std::invalid_argument("buffer must lie in [0, 0.5): '" + token + "'");
    }
    return s;
}

void RunSpec::validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (ar_order < 1) throw std::invalid_argument("ar_order must be >= 1");
    if (history < 2 * ar_order + 1) throw std::invalid_argument("history must be >= 2*ar_order+1");
    if (sim_hours < 1) throw std::invalid_argument("sim_hours must be >= 1");
    if (refit_every < 1) throw std::invalid_argument("refit_every must be >= 1");
    if (controller.beta < 0.0 || controller.beta >= 0.5) throw std::invalid_argument("buffer must lie in [0, 0.5)");
    if (controller.kind == ControllerKind::Stochastic && controller.scenarios < 1)
        throw std::invalid_argument("stochastic controller needs at least one scenario");
    if (calendar.empty() || calendar.back() < sim_hours) throw std::invalid_argument("calendar does not cover the run");
    if (!std::is_sorted(calendar.begin(), calendar.end())) throw std::invalid_argument("calendar must be ascending");
    if (initial_fill < 0.0 || initial_fill > 1.0) throw std::invalid_argument("initial_fill must lie in [0, 1]");
}

std::vector<int> month_calendar(int first_day, int hours) {
    static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (first_day < 0 || first_day >= 365) throw std::invalid_argument("first_day must lie in [0, 365)");
    int month = 0, start = 0;
    while (start + kDays[month] <= first_day) start += kDays[month++];
    std::vector<int> out;
    int end = (start + kDays[month] - first_day) * 24;
    out.push_back(end);
    while (end < hours) {
        month = (month + 1) % 12;
        end += kDays[month] * 24;
        out.push_back(end);
    }
    return out;
}

HorizonTiming month_timing(int t, const std::vector<int>& calendar, int n) {
    if (n < 1) throw std::invalid_argument("month_timing: horizon must be >= 1");
    const auto it = std::upper_bound(calendar.begin(), calendar.end(), t);
    if (it == calendar.end()) throw std::out_of_range("month_timing: t beyond calendar");
    HorizonTiming h;
    h.t = t;
    h.n = n;
    h.month_end = *it;
    h.spans_two_months = t + n - 1 > h.month_end;
    if (h.spans_two_months) h.next_month_end = std::next(it) != calendar.end() ? *std::next(it) : h.month_end + 31 * 24;
    return h;
}

BoundsUpdate update_storage_bounds(double e, double cap, double beta) {
    BoundsUpdate u;
    const double lo = beta * cap, hi = (1.0 - beta) * cap;
    u.e = e;
    if (e > cap) {
        u.e = cap;
        u.lower = lo;
        u.upper = cap;
        u.ol_increment = e - cap;
    } else if (e < 0.0) {
        u.e = 0.0;
        u.lower = 0.0;
        u.upper = hi;
        u.ul_increment = -e;
    } else if (e >= lo && e <= hi) {
        u.lower = lo;
        u.upper = hi;
    } else if (e > hi) {
        u.lower = lo;
        u.upper = e;
    } else {
        u.lower = e;
        u.upper = hi;
    }
    return u;
}

int violation_count(unsigned flags) { return __builtin_popcount(flags); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

Trajectory horizon_truth(const Trajectory& truth, std::size_t g, int n) {
    Trajectory out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        std::size_t i = g + k;
        // Past the end of the data: repeat the last available week.
        while (i >= truth.size()) i -= 168;
        out.push_back(truth[i]);
    }
    return out;
}

void clamp_loads(Trajectory& t) {
    for (auto& d : t) {
        d.load_elec = std::max(d.load_elec, 0.0);
        d.load_cw = std::max(d.load_cw, 0.0);
        d.load_hw = std::max(d.load_hw, 0.0);
    }
}

double max_balance_error(const PlantConfig& c, const lp::LpSolution& sol, const VariableMap& map,
                         const std::vector<const Trajectory*>& data) {
    double worst = 0.0;
    for (int s = 0; s < map.scenarios(); ++s)
        for (int k = 0; k < map.horizon(); ++k) {
            const auto b = balance_residuals(c, action_at(sol, map, k, s), (*data[s])[k], slacks_at(sol, map, k, s));
            worst = std::max({worst, std::abs(b.cw), std::abs(b.hw), std::abs(b.cond)});
        }
    return worst;
}

}  // namespace

ClosedLoopTrace run_closed_loop(const PlantConfig& c, const RunSpec& spec, const Trajectory& truth) {
    c.validate();
    spec.validate();
    const std::size_t need = static_cast<std::size_t>(spec.history) + spec.sim_hours;
    if (truth.size() < need)
        throw std::invalid_argument("truth has " + std::to_string(truth.size()) + " hours, run needs " +
                                    std::to_string(need));
    const int n = spec.horizon;
    const int q = spec.ar_order;
    const double beta = spec.controller.beta;
    const auto kind = spec.controller.kind;

    ClosedLoopTrace tr;
    tr.controller = spec.controller.label();
    tr.calendar = spec.calendar;

    PlantState state;
    state.e_cw = spec.initial_fill * c.cap_cw;
    state.e_hw = spec.initial_fill * c.cap_hw;
    tr.initial = state;
    StorageBounds bounds;
    {
        const auto ucw = update_storage_bounds(state.e_cw, c.cap_cw, beta);
        const auto uhw = update_storage_bounds(state.e_hw, c.cap_hw, beta);
        bounds = {ucw.lower, ucw.upper, uhw.lower, uhw.upper};
    }

    std::array<ArModel, kNumChannels> models;
    std::array<double, 2> var_int{};
    const bool need_forecast = kind != ControllerKind::Perfect;

    tr.rows.reserve(spec.sim_hours);
    for (int t = 0; t < spec.sim_hours; ++t) {
        const std::size_t g = static_cast<std::size_t>(spec.history) + t;
        if (t % spec.refit_every == 0) {
            for (int ch = 0; ch < kNumChannels; ++ch) {
                const auto channel = static_cast<Channel>(ch);
                const bool storage_channel = channel == Channel::load_cw || channel == Channel::load_hw;
                if (!need_forecast && !storage_channel) continue;
                const auto window = channel_series(truth, channel, g - spec.history, g);
                models[ch] = fit_ar(window, q);
                if (storage_channel) var_int[ch - 1] = integrated_load_variance(window, spec.zoh_divisor);
            }
        }

        HorizonTiming timing = month_timing(t, spec.calendar, n);
        state.peak_next.reset();
        if (timing.spans_two_months) state.peak_next = 0.0;

        // Controller data for this step.
        std::vector<Trajectory> data;
        if (kind == ControllerKind::Perfect) {
            data.push_back(horizon_truth(truth, g, n));
        } else {
            ForecastDistribution dist;
            for (int ch = 0; ch < kNumChannels; ++ch) {
                const auto recent = channel_series(truth, static_cast<Channel>(ch), g - q, g);
                dist.channels[ch] = forecast(models[ch], recent, n);
            }
            if (kind == ControllerKind::Deterministic) {
                data.push_back(dist.mean_trajectory());
                clamp_loads(data.back());
            } else {
                data = sample_scenarios(dist, spec.controller.scenarios, mix_seed(spec.scenario_seed, t)).scenarios;
            }
        }
        std::vector<const Trajectory*> ptrs;
        for (const auto& d : data) ptrs.push_back(&d);

        BuiltLp built;
        if (kind == ControllerKind::Stochastic) {
            ScenarioSet set;
            set.scenarios = data;
            BuildOptions bo;
            bo.explicit_nonanticipativity = spec.explicit_nonanticipativity;
            built = build_stochastic(c, state, set, timing, bounds, bo);
        } else if (kind == ControllerKind::Perfect) {
            built = build_perfect(c, state, data[0], timing, bounds);
        } else {
            built = build_deterministic(c, state, data[0], timing, bounds);
        }

        TraceRow row;
        row.t = t;
        const auto sol = lp::solve_with(built.lp, spec.backend);
        row.lp_status = sol.status;
        row.lp_iterations = sol.iterations;
        if (sol.status == lp::Status::Optimal) {
            row.committed = extract_action(sol, built.map).action;
            row.max_balance_residual = max_balance_error(c, sol, built.map, ptrs);
        } else {
            tr.diagnostics.push_back("t=" + std::to_string(t) + ": controller LP " + lp::status_name(sol.status) +
                                     ", committing zero action");
        }

        const Disturbance& real = truth[g];
        row.realized = real;
        const auto rest = restore(c, state, row.committed, real);
        row.restore = rest.kind;
        row.applied = rest.action;
        if (rest.kind == RestoreKind::Fallback) {
            row.violations |= kFallback;
            if (!rest.diagnostic.empty())
                tr.diagnostics.push_back("t=" + std::to_string(t) + ": fallback, " + rest.diagnostic);
        }

        if (spec.storage_noise) {
            const Disturbance& prev = truth[g - 1];
            row.noise_cw = zoh_noise(prev.load_cw, real.load_cw, models[1].noise_variance, var_int[0],
                                     mix_seed(spec.noise_seed, 2 * static_cast<std::uint64_t>(t)));
            row.noise_hw = zoh_noise(prev.load_hw, real.load_hw, models[2].noise_variance, var_int[1],
                                     mix_seed(spec.noise_seed, 2 * static_cast<std::uint64_t>(t) + 1));
        }

        const ControlAction& a = row.applied;
        PlantState next = step_state(state, a, real, {row.noise_cw, row.noise_hw}, c);
        const auto bal = balance_residuals(c, a, real);
        row.mismatch_cw = -bal.cw;
        row.mismatch_hw = -bal.hw;
        next.e_cw -= row.mismatch_cw;
        next.e_hw -= row.mismatch_hw;
        next.ul_cw += std::max(row.mismatch_cw, 0.0);
        next.ol_cw += std::max(-row.mismatch_cw, 0.0);
        next.ul_hw += std::max(row.mismatch_hw, 0.0);
        next.ol_hw += std::max(-row.mismatch_hw, 0.0);

        const auto ucw = update_storage_bounds(next.e_cw, c.cap_cw, beta);
        const auto uhw = update_storage_bounds(next.e_hw, c.cap_hw, beta);
        if (next.e_cw > c.cap_cw) row.violations |= kOverflowCw;
        if (next.e_cw < 0.0) row.violations |= kDryupCw;
        if (next.e_hw > c.cap_hw) row.violations |= kOverflowHw;
        if (next.e_hw < 0.0) row.violations |= kDryupHw;
        next.e_cw = ucw.e;
        next.e_hw = uhw.e;
        next.ul_cw += ucw.ul_increment;
        next.ol_cw += ucw.ol_increment;
        next.ul_hw += uhw.ul_increment;
        next.ol_hw += uhw.ol_increment;
        bounds = {ucw.lower, ucw.upper, uhw.lower, uhw.upper};
        next.peak_next.reset();

        row.residuals = residual_demands(c, a, real.load_elec);
        row.cost = stage_cost_parts(c, a, real);
        row.state = next;
        row.bounds = bounds;
        tr.rows.push_back(row);

        state = next;
        if (t + 1 == timing.month_end) state.peak = 0.0;
    }
    return tr;
}

void write_trace_csv(std::ostream& os, const ClosedLoopTrace& tr) {
    os << "hour";
    for (const char* prefix : {"committed_", "applied_"})
        for (int u = 0; u < kNumUnits; ++u) os << ',' << prefix << "p_" << unit_name(static_cast<Unit>(u));
    os << ",restore,load_elec,load_cw,load_hw,price_elec"
          ",e_cw,e_hw,ul_cw,ul_hw,ol_cw,ol_hw,peak"
          ",r_e,r_w,r_ng,cost_elec,cost_water,cost_gas,violations"
          ",lo_cw,hi_cw,lo_hw,hi_hw,v_cw,v_hw,mismatch_cw,mismatch_hw,lp_status,lp_iterations\n";
    os << std::setprecision(12);
    for (const auto& r : tr.rows) {
        os << r.t;
        for (double v : as_array(r.committed)) os << ',' << v;
        for (double v : as_array(r.applied)) os << ',' << v;
        os << ',' << restore_kind_name(r.restore) << ',' << r.realized.load_elec << ',' << r.realized.load_cw << ','
           << r.realized.load_hw << ',' << r.realized.price_elec << ',' << r.state.e_cw << ',' << r.state.e_hw << ','
           << r.state.ul_cw << ',' << r.state.ul_hw << ',' << r.state.ol_cw << ',' << r.state.ol_hw << ','
           << r.state.peak << ',' << r.residuals.r_e << ',' << r.residuals.r_w << ',' << r.residuals.r_ng << ','
           << r.cost.electricity << ',' << r.cost.water << ',' << r.cost.gas << ',' << r.violations << ','
           << r.bounds.lo_cw << ',' << r.bounds.hi_cw << ',' << r.bounds.lo_hw << ',' << r.bounds.hi_hw << ','
           << r.noise_cw << ',' << r.noise_hw << ',' << r.mismatch_cw << ',' << r.mismatch_hw << ','
           << lp::status_name(r.lp_status) << ',' << r.lp_iterations << '\n';
    }
}

void write_trace_csv(const std::string& path, const ClosedLoopTrace& tr) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    write_trace_csv(f, tr);
}

}  // namespace hvac
