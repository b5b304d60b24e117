#include "hvac/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace hvac {

CostBreakdown operator-(const CostBreakdown& a, const CostBreakdown& b) {
    return {a.electricity - b.electricity, a.water - b.water, a.gas - b.gas, a.demand - b.demand, a.total - b.total};
}

std::vector<Trajectory> make_validation_set(const Trajectory& base, int count, std::uint64_t seed,
                                            const ValidationOptions& opts) {
    if (count < 1) throw std::invalid_argument("validation count must be >= 1");
    if (opts.amplitude < 0.0) throw std::invalid_argument("validation amplitude must be >= 0");
    if (std::abs(opts.phi) >= 1.0) throw std::invalid_argument("validation phi must lie in (-1, 1)");
    // Tag keeps these streams apart from the forecast-scenario and noise seeds.
    constexpr std::uint64_t kTag = 0x76616c6964ULL;
    const double innov = std::sqrt(1.0 - opts.phi * opts.phi);
    std::vector<Trajectory> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(mix_seed(seed ^ kTag, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> nd(0.0, 1.0);
        Trajectory t = base;
        for (Channel ch : {Channel::load_elec, Channel::load_cw, Channel::load_hw}) {
            double e = nd(rng);
            for (auto& d : t) {
                double& v = channel_ref(d, ch);
                v = std::max(v * (1.0 + opts.amplitude * e), 0.0);
                e = opts.phi * e + innov * nd(rng);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<int> month_of_hours(const std::vector<int>& calendar, int hours) {
    if (hours > 0 && (calendar.empty() || calendar.back() < hours))
        throw std::invalid_argument("calendar covers " + std::to_string(calendar.empty() ? 0 : calendar.back()) +
                                    " hours, trace has " + std::to_string(hours));
    std::vector<int> m(hours);
    int idx = 0;
    for (int t = 0; t < hours; ++t) {
        while (t >= calendar[idx]) ++idx;
        m[t] = idx;
    }
    return m;
}

namespace {

double demand_charge(const std::vector<double>& r_e, const std::vector<int>& month, double price) {
    if (r_e.empty()) return 0.0;
    std::vector<double> peak(month.back() + 1, 0.0);
    for (std::size_t t = 0; t < r_e.size(); ++t) peak[month[t]] = std::max(peak[month[t]], r_e[t]);
    double s = 0.0;
    for (double p : peak) s += price * p;
    return s;
}

}  // namespace

CostBreakdown annual_cost(const PlantConfig& c, const ClosedLoopTrace& tr, const std::vector<int>& calendar) {
    const int hours = static_cast<int>(tr.rows.size());
    const auto month = month_of_hours(calendar, hours);
    CostBreakdown b;
    std::vector<double> r_e(hours);
    for (int t = 0; t < hours; ++t) {
        const auto& row = tr.rows[t];
        b.electricity += row.cost.electricity;
        b.water += row.cost.water;
        b.gas += row.cost.gas;
        b.total += stage_cost(c, row.applied, row.realized);
        r_e[t] = row.residuals.r_e;
    }
    b.demand = demand_charge(r_e, month, c.price_demand);
    b.total += b.demand;
    return b;
}

CostBreakdown campus_only_cost(const PlantConfig& c, const Trajectory& truth, std::size_t offset, int hours,
                               const std::vector<int>& calendar) {
    if (offset + hours > truth.size()) throw std::invalid_argument("campus_only_cost: truth too short");
    const auto month = month_of_hours(calendar, hours);
    CostBreakdown b;
    std::vector<double> load(hours);
    for (int t = 0; t < hours; ++t) {
        const auto& d = truth[offset + t];
        b.electricity += d.price_elec * d.load_elec;
        load[t] = d.load_elec;
    }
    b.demand = demand_charge(load, month, c.price_demand);
    b.total = b.electricity + b.demand;
    return b;
}

CostBreakdown cost_of_central_plant(const CostBreakdown& controller, const CostBreakdown& campus_only) {
    return controller - campus_only;
}

double violation_rate(const ClosedLoopTrace& tr) {
    if (tr.rows.empty()) return 0.0;
    long n = 0;
    for (const auto& r : tr.rows) n += violation_count(r.violations);
    return 100.0 * static_cast<double>(n) / static_cast<double>(tr.rows.size());
}

double storage_identity_error(const ClosedLoopTrace& tr) {
    double worst = 0.0;
    PlantState prev = tr.initial;
    for (const auto& r : tr.rows) {
        if (!(r.violations & (kOverflowCw | kDryupCw)))
            worst = std::max(worst, std::abs(r.state.e_cw - (prev.e_cw - r.applied.p_cw + r.noise_cw - r.mismatch_cw)));
        if (!(r.violations & (kOverflowHw | kDryupHw)))
            worst = std::max(worst, std::abs(r.state.e_hw - (prev.e_hw - r.applied.p_hw + r.noise_hw - r.mismatch_hw)));
        prev = r.state;
    }
    return worst;
}

Estimate estimate(const std::vector<double>& xs) {
    Estimate e;
    e.n = static_cast<int>(xs.size());
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / e.n;
    if (e.n > 1) {
        double v = 0.0;
        for (double x : xs) v += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(v / (e.n - 1) / e.n);
    }
    return e;
}

CdfGrid empirical_cdf(const std::string& series, const std::vector<double>& xs, double lo, double hi, int points) {
    if (points < 2) throw std::invalid_argument("cdf needs at least 2 grid points");
    CdfGrid g;
    g.series = series;
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < points; ++i) {
        const double x = i + 1 == points ? hi : lo + (hi - lo) * i / (points - 1);
        const auto cnt = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        g.x.push_back(x);
        g.p.push_back(sorted.empty() ? 0.0 : static_cast<double>(cnt) / sorted.size());
    }
    return g;
}

const RunResult* BenchmarkReport::find(const std::string& controller, int scenario) const {
    for (const auto& r : runs)
        if (r.controller == controller && r.scenario == scenario) return &r;
    return nullptr;
}

namespace {

double metric_of(const RunResult& r, const std::string& metric) {
    if (metric == "cost") return r.cost.total;
    if (metric == "ccp") return r.ccp.total;
    if (metric == "violations") return r.violation_rate;
    throw std::invalid_argument("unknown metric '" + metric + "'");
}

}  // namespace

Estimate BenchmarkReport::paired(const std::string& a, const std::string& b, const std::string& metric) const {
    std::vector<double> d;
    for (int s = 0; s < validation_count; ++s) {
        const auto* ra = find(a, s);
        const auto* rb = find(b, s);
        if (ra && rb && ra->ok && rb->ok) d.push_back(metric_of(*ra, metric) - metric_of(*rb, metric));
    }
    return estimate(d);
}

BenchmarkReport run_benchmark(const PlantConfig& c, const BenchmarkConfig& cfg,
                              const std::vector<ControllerSpec>& controllers, const Trajectory& base_truth) {
    if (controllers.empty()) throw std::invalid_argument("benchmark needs at least one controller");
    c.validate();
    cfg.base.validate();
    const auto t0 = std::chrono::steady_clock::now();

    BenchmarkReport rep;
    rep.validation_count = cfg.validation_count;
    for (const auto& spec : controllers) {
        const auto label = spec.label();
        if (std::find(rep.controllers.begin(), rep.controllers.end(), label) != rep.controllers.end())
            throw std::invalid_argument("duplicate controller '" + label + "'");
        rep.controllers.push_back(label);
    }

    const auto validation = make_validation_set(base_truth, cfg.validation_count, cfg.validation_seed, cfg.validation);
    const std::size_t offset = cfg.base.history;
    std::vector<CostBreakdown> campus(cfg.validation_count);
    for (int s = 0; s < cfg.validation_count; ++s)
        campus[s] = campus_only_cost(c, validation[s], offset, cfg.base.sim_hours, cfg.base.calendar);

    const int nc = static_cast<int>(controllers.size());
    const int tasks = nc * cfg.validation_count;
    rep.runs.resize(tasks);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < tasks; k = next++) {
            const int ci = k / cfg.validation_count, s = k % cfg.validation_count;
            RunResult& r = rep.runs[k];
            r.controller = rep.controllers[ci];
            r.scenario = s;
            const auto start = std::chrono::steady_clock::now();
            try {
                RunSpec spec = cfg.base;
                spec.controller = controllers[ci];
                // Common random numbers: seeds depend on the validation scenario only.
                spec.scenario_seed = mix_seed(cfg.base.scenario_seed, s);
                spec.noise_seed = mix_seed(cfg.base.noise_seed, s);
                const auto tr = run_closed_loop(c, spec, validation[s]);
                r.cost = annual_cost(c, tr, spec.calendar);
                r.ccp = cost_of_central_plant(r.cost, campus[s]);
                r.violation_rate = violation_rate(tr);
                r.storage_identity_error = storage_identity_error(tr);
                for (const auto& row : tr.rows) {
                    if (row.violations & kFallback) ++r.fallbacks;
                    if (row.lp_status != lp::Status::Optimal) ++r.non_optimal;
                    r.max_balance_residual = std::max(r.max_balance_residual, row.max_balance_residual);
                }
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min(jobs, tasks);
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const auto& r : rep.runs)
        if (!r.ok)
            rep.warnings.push_back("run " + r.controller + " scenario " + std::to_string(r.scenario) +
                                   " failed and is excluded: " + r.error);

    for (const auto& cb : campus) {
        rep.campus_mean.electricity += cb.electricity / cfg.validation_count;
        rep.campus_mean.demand += cb.demand / cfg.validation_count;
        rep.campus_mean.total += cb.total / cfg.validation_count;
    }

    std::vector<std::vector<double>> costs(nc), ccps(nc), viols(nc);
    for (int ci = 0; ci < nc; ++ci) {
        ControllerSummary sm;
        sm.controller = rep.controllers[ci];
        for (int s = 0; s < cfg.validation_count; ++s) {
            const auto& r = rep.runs[ci * cfg.validation_count + s];
            ++sm.runs;
            if (!r.ok) {
                ++sm.failed;
                continue;
            }
            costs[ci].push_back(r.cost.total);
            ccps[ci].push_back(r.ccp.total);
            viols[ci].push_back(r.violation_rate);
            sm.mean_components.electricity += r.cost.electricity;
            sm.mean_components.water += r.cost.water;
            sm.mean_components.gas += r.cost.gas;
            sm.mean_components.demand += r.cost.demand;
            sm.mean_components.total += r.cost.total;
        }
        const double ok = static_cast<double>(costs[ci].size());
        if (ok > 0) {
            sm.mean_components.electricity /= ok;
            sm.mean_components.water /= ok;
            sm.mean_components.gas /= ok;
            sm.mean_components.demand /= ok;
            sm.mean_components.total /= ok;
        }
        sm.cost = estimate(costs[ci]);
        sm.ccp = estimate(ccps[ci]);
        sm.violations = estimate(viols[ci]);
        rep.summaries.push_back(sm);
    }

    // VSMPC pairs the first deterministic and first stochastic controller listed.
    for (int ci = 0; ci < nc; ++ci) {
        if (controllers[ci].kind == ControllerKind::Deterministic && rep.vsmpc_det.empty())
            rep.vsmpc_det = rep.controllers[ci];
        if (controllers[ci].kind == ControllerKind::Stochastic && rep.vsmpc_sto.empty())
            rep.vsmpc_sto = rep.controllers[ci];
    }
    if (!rep.vsmpc_det.empty() && !rep.vsmpc_sto.empty()) {
        for (int s = 0; s < cfg.validation_count; ++s) {
            const auto* d = rep.find(rep.vsmpc_det, s);
            const auto* st = rep.find(rep.vsmpc_sto, s);
            if (d->ok && st->ok) rep.vsmpc.push_back(value_of_stochastic(d->ccp.total, st->ccp.total));
        }
        rep.vsmpc_mean = estimate(rep.vsmpc);
    }

    auto add_cdfs = [&](const std::string& metric, const std::vector<std::vector<double>>& xs) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& v : xs)
            for (double x : v) lo = std::min(lo, x), hi = std::max(hi, x);
        if (!std::isfinite(lo)) return;
        if (hi == lo) hi = lo + 1.0;
        for (int ci = 0; ci < nc; ++ci)
            rep.cdfs.push_back(empirical_cdf(metric + ":" + rep.controllers[ci], xs[ci], lo, hi, cfg.cdf_points));
    };
    add_cdfs("cost", costs);
    add_cdfs("ccp", ccps);
    add_cdfs("violations", viols);
    if (!rep.vsmpc.empty()) {
        const auto [lo, hi] = std::minmax_element(rep.vsmpc.begin(), rep.vsmpc.end());
        rep.cdfs.push_back(empirical_cdf("vsmpc", rep.vsmpc, *lo, *hi == *lo ? *lo + 1.0 : *hi, cfg.cdf_points));
    }

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

void to_json(nlohmann::json& j, const CostBreakdown& b) {
    j = {{"electricity", b.electricity}, {"water", b.water}, {"gas", b.gas}, {"demand", b.demand}, {"total", b.total}};
}

void to_json(nlohmann::json& j, const Estimate& e) { j = {{"n", e.n}, {"mean", e.mean}, {"se", e.se}}; }

void to_json(nlohmann::json& j, const BenchmarkReport& r) {
    j = nlohmann::json::object();
    j["controllers"] = r.controllers;
    j["validation_count"] = r.validation_count;
    j["seconds"] = r.seconds;
    j["campus_only_mean"] = r.campus_mean;
    auto& sums = j["summaries"] = nlohmann::json::array();
    for (const auto& s : r.summaries)
        sums.push_back({{"controller", s.controller},
                        {"runs", s.runs},
                        {"failed", s.failed},
                        {"cost", s.cost},
                        {"ccp", s.ccp},
                        {"violations_per_100h", s.violations},
                        {"mean_components", s.mean_components}});
    if (!r.vsmpc.empty())
        j["vsmpc"] = {{"deterministic", r.vsmpc_det},
                      {"stochastic", r.vsmpc_sto},
                      {"per_scenario", r.vsmpc},
                      {"expected", r.vsmpc_mean}};
    auto& runs = j["runs"] = nlohmann::json::array();
    for (const auto& x : r.runs) {
        nlohmann::json o = {{"controller", x.controller}, {"scenario", x.scenario}, {"ok", x.ok},
                            {"seconds", x.seconds}};
        if (x.ok) {
            o["cost"] = x.cost;
            o["ccp"] = x.ccp;
            o["violations_per_100h"] = x.violation_rate;
            o["fallbacks"] = x.fallbacks;
            o["non_optimal"] = x.non_optimal;
            o["max_balance_residual"] = x.max_balance_residual;
            o["storage_identity_error"] = x.storage_identity_error;
        } else {
            o["error"] = x.error;
        }
        runs.push_back(o);
    }
    auto& cdfs = j["cdfs"] = nlohmann::json::array();
    for (const auto& g : r.cdfs) cdfs.push_back({{"series", g.series}, {"x", g.x}, {"p", g.p}});
    j["warnings"] = r.warnings;
}

void write_runs_csv(std::ostream& os, const BenchmarkReport& r) {
    os << "controller,scenario,ok,total,electricity,water,gas,demand,ccp,violations_per_100h,fallbacks,"
          "non_optimal,max_balance_residual,storage_identity_error,seconds\n";
    os << std::setprecision(12);
    for (const auto& x : r.runs)
        os << x.controller << ',' << x.scenario << ',' << (x.ok ? 1 : 0) << ',' << x.cost.total << ','
           << x.cost.electricity << ',' << x.cost.water << ',' << x.cost.gas << ',' << x.cost.demand << ','
           << x.ccp.total << ',' << x.violation_rate << ',' << x.fallbacks << ',' << x.non_optimal << ','
           << x.max_balance_residual << ',' << x.storage_identity_error << ',' << x.seconds << '\n';
}

void write_cdf_csv(std::ostream& os, const BenchmarkReport& r) {
    os << "series,x,p\n" << std::setprecision(12);
    for (const auto& g : r.cdfs)
        for (std::size_t i = 0; i < g.x.size(); ++i) os << g.series << ',' << g.x[i] << ',' << g.p[i] << '\n';
}

nlohmann::json trace_summary(const PlantConfig& c, const ClosedLoopTrace& tr, const Trajectory& truth,
                             std::size_t offset) {
    const auto cost = annual_cost(c, tr, tr.calendar);
    const auto campus = campus_only_cost(c, truth, offset, static_cast<int>(tr.rows.size()), tr.calendar);
    int fallbacks = 0, non_optimal = 0;
    double bal = 0.0;
    for (const auto& r : tr.rows) {
        fallbacks += (r.violations & kFallback) ? 1 : 0;
        non_optimal += r.lp_status != lp::Status::Optimal;
        bal = std::max(bal, r.max_balance_residual);
    }
    return {{"controller", tr.controller},
            {"hours", tr.rows.size()},
            {"cost", cost},
            {"campus_only", campus},
            {"ccp", cost_of_central_plant(cost, campus)},
            {"violations_per_100h", violation_rate(tr)},
            {"fallbacks", fallbacks},
            {"non_optimal", non_optimal},
            {"max_balance_residual", bal},
            {"storage_identity_error", storage_identity_error(tr)},
            {"diagnostics", tr.diagnostics}};
}

}  // namespace hvac
