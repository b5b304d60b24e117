#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hvac/mpc.hpp"

using namespace hvac;

namespace {

// Only the chiller and the chilled-water tank can move.
PlantConfig chiller_only() {
    PlantConfig c;
    c.pmax_hrc = c.pmax_hwg = c.pmax_hx = c.pmax_hw = 0.0;
    c.cap_hw = 1.0;
    c.cap_cw = 100.0;
    c.pmax_cw = 100.0;
    c.pmax_cs = 55.0;
    c.pmax_ct = 1000.0;
    return c;
}

Trajectory make_traj(std::vector<double> elec, std::vector<double> cw, std::vector<double> price) {
    Trajectory t(elec.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = {elec[k], cw[k], 0.0, price[k]};
    return t;
}

// Cost of the chiller-only plan with tank rates pcw; the chiller covers what it can
// and slacks take the rest, which is optimal because rho dominates all prices.
// Returns +inf when a tank level leaves [0, cap].
double toy_cost(const PlantConfig& c, const Trajectory& d, const std::vector<double>& pcw, double e0,
                const std::vector<int>& peak_group, double demand_weight) {
    double e = e0, cost = 0.0, ul = 0.0, ol = 0.0;
    std::vector<double> peak(2, 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        e -= pcw[k];
        if (e < -1e-12 || e > c.cap_cw + 1e-12) return INFINITY;
        const double need = d[k].load_cw - pcw[k];
        const double pcs = std::clamp(need, 0.0, c.pmax_cs);
        ul += std::max(need - c.pmax_cs, 0.0);
        ol += std::max(-need, 0.0);
        const double pct = c.alpha_cond_cs * pcs;
        const double r_e = c.alpha_e_cs * pcs + c.alpha_e_ct * pct + d[k].load_elec;
        cost += d[k].price_elec * r_e + c.price_water * c.alpha_w_ct * pct;
        cost += c.rho_cw * (ul + ol);
        peak[peak_group[k]] = std::max(peak[peak_group[k]], r_e);
    }
    return cost + demand_weight * (peak[0] + peak[1]);
}

HorizonTiming timing(int t, int n, int month_end, bool spans) {
    HorizonTiming h;
    h.t = t;
    h.n = n;
    h.month_end = month_end;
    h.spans_two_months = spans;
    if (spans) h.next_month_end = month_end + 720;
    return h;
}

}  // namespace

TEST_CASE("deterministic N=2 toy matches grid search") {
    const auto c = chiller_only();
    const auto d = make_traj({100, 120}, {60, 40}, {0.05, 0.02});
    PlantState s;
    s.e_cw = 50.0;
    const auto built = build_deterministic(c, s, d, timing(0, 2, 744, false), full_bounds(c));
    const auto sol = lp::solve(built.lp);
    REQUIRE(sol.status == lp::Status::Optimal);

    double best = INFINITY;
    for (int a = -100; a <= 100; ++a)
        for (int b = -100; b <= 100; ++b)
            best = std::min(best, toy_cost(c, d, {double(a), double(b)}, 50.0, {0, 0}, c.price_demand));
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-9));

    const auto a = action_at(sol, built.map, 0);
    const double at_lp = toy_cost(c, d, {a.p_cw, action_at(sol, built.map, 1).p_cw}, 50.0, {0, 0}, c.price_demand);
    CHECK(at_lp == doctest::Approx(sol.objective).epsilon(1e-9));
    CHECK(solve_ipm(built.lp).objective == doctest::Approx(best).epsilon(1e-7));
}

TEST_CASE("two-month N=3 toy matches grid search") {
    const auto c = chiller_only();
    const auto d = make_traj({100, 120, 90}, {60, 40, 70}, {0.05, 0.02, 0.04});
    PlantState s;
    s.e_cw = 50.0;
    s.peak = 0.0;
    s.peak_next = 0.0;
    const auto tm = timing(0, 3, 1, true);
    REQUIRE(tm.first_month_steps() == 1);
    const double w = c.price_demand / tm.discount();
    CHECK(tm.discount() == doctest::Approx(1.0 / 3.0));
    const auto built = build_deterministic(c, s, d, tm, full_bounds(c));
    CHECK(built.map.two_peaks());
    const auto sol = lp::solve(built.lp);
    REQUIRE(sol.status == lp::Status::Optimal);

    double best = INFINITY;
    for (int a = -100; a <= 100; ++a)
        for (int b = -100; b <= 100; ++b) {
            if (50 - a < 0 || 50 - a > 100) continue;
            for (int e = -100; e <= 100; ++e)
                best = std::min(best, toy_cost(c, d, {double(a), double(b), double(e)}, 50.0, {0, 1, 1}, w));
        }
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("column and row counts follow the closed form") {
    const PlantConfig c;
    PlantState s;
    s.e_cw = 1000.0;
    s.e_hw = 1000.0;
    for (int n : {1, 2, 5, 9})
        for (int ns : {1, 2, 4})
            for (bool two : {false, true}) {
                if (two && n < 2) continue;
                ScenarioSet set;
                for (int i = 0; i < ns; ++i) set.scenarios.push_back(Trajectory(n, Disturbance{100, 50, 20, 0.04}));
                const auto tm = timing(0, n, two ? 1 : 1000, two);
                for (bool expl : {false, true}) {
                    BuildOptions bo;
                    bo.explicit_nonanticipativity = expl;
                    const auto b = build_stochastic(c, s, set, tm, full_bounds(c), bo);
                    const auto want = expected_size(n, ns, two, expl && ns > 1);
                    CHECK(b.lp.num_cols() == want.cols);
                    CHECK(b.lp.num_rows() == want.rows);
                    CHECK_NOTHROW(b.lp.validate());
                }
                if (ns == 1) {
                    const auto det = build_deterministic(c, s, set.scenarios[0], tm, full_bounds(c));
                    CHECK(det.lp.num_cols() == 20 * n + 7 + (two ? 1 : 0));
                    CHECK(det.lp.num_rows() == 13 * n);
                }
            }
}

TEST_CASE("full-size stochastic program stays within a factor 2 of the published size") {
    const auto sz = expected_size(168, 100, false);
    const double rc = sz.cols / 168450.0, rr = sz.rows / 143750.0;
    CHECK(rc > 0.5);
    CHECK(rc < 2.0);
    CHECK(rr > 0.5);
    CHECK(rr < 2.0);
}

namespace {

struct Instance {
    PlantConfig c;
    PlantState s;
    ScenarioSet set;
    HorizonTiming tm;
};

Instance random_instance(unsigned seed, int n, int ns) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance in;
    in.c.cap_cw = 3000.0;
    in.c.cap_hw = 1500.0;
    in.c.pmax_cw = 1500.0;
    in.c.pmax_hw = 800.0;
    in.c.pmax_cs = 4000.0;
    in.c.pmax_hrc = 800.0;
    in.c.pmax_hwg = 1500.0;
    in.c.pmax_hx = 800.0;
    in.c.pmax_ct = 6000.0;
    in.s.e_cw = 3000.0 * u(rng);
    in.s.e_hw = 1500.0 * u(rng);
    in.s.peak = 2000.0 * u(rng);
    for (int i = 0; i < ns; ++i) {
        Trajectory t(n);
        for (auto& d : t) d = {2000 + 1000 * u(rng), 2500 + 2500 * u(rng), 500 + 1000 * u(rng), 0.02 + 0.05 * u(rng)};
        in.set.scenarios.push_back(t);
    }
    in.tm = timing(0, n, 1000, false);
    return in;
}

double solve_obj(const BuiltLp& b) {
    const auto s = lp::solve(b.lp);
    REQUIRE(s.status == lp::Status::Optimal);
    return s.objective;
}

}  // namespace

TEST_CASE("single scenario stochastic program equals the deterministic one") {
    for (unsigned seed = 1; seed <= 4; ++seed) {
        auto in = random_instance(seed, 4, 1);
        const double det = solve_obj(build_deterministic(in.c, in.s, in.set.scenarios[0], in.tm, full_bounds(in.c)));
        const double sto = solve_obj(build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c)));
        CHECK(sto == doctest::Approx(det).epsilon(1e-9));
    }
}

TEST_CASE("shared and explicit nonanticipativity agree") {
    for (unsigned seed = 10; seed < 13; ++seed) {
        auto in = random_instance(seed, 3, 3);
        BuildOptions bo;
        bo.explicit_nonanticipativity = true;
        const auto shared = build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c));
        const auto expl = build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c), bo);
        CHECK(solve_obj(shared) == doctest::Approx(solve_obj(expl)).epsilon(1e-8));
        const auto s2 = lp::solve(expl.lp);
        const auto a0 = as_array(action_at(s2, expl.map, 0, 0));
        for (int s = 1; s < 3; ++s) {
            const auto as = as_array(action_at(s2, expl.map, 0, s));
            for (int u = 0; u < kNumUnits; ++u) CHECK(as[u] == doctest::Approx(a0[u]).epsilon(1e-9));
        }
    }
}

TEST_CASE("objective does not depend on scenario order") {
    auto in = random_instance(21, 3, 4);
    const double base = solve_obj(build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c)));
    std::reverse(in.set.scenarios.begin(), in.set.scenarios.end());
    const double rev = solve_obj(build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c)));
    CHECK(rev == doctest::Approx(base).epsilon(1e-9));
    std::rotate(in.set.scenarios.begin(), in.set.scenarios.begin() + 1, in.set.scenarios.end());
    CHECK(solve_obj(build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c))) ==
          doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("larger penalties never increase total slack") {
    auto in = random_instance(31, 4, 2);
    // Loads beyond what the plant can produce force slack.
    for (auto& t : in.set.scenarios)
        for (auto& d : t) d.load_cw += 3000.0;
    double prev = INFINITY;
    for (double rho : {0.5, 2.0, 10.0, 100.0}) {
        in.c.rho_cw = in.c.rho_hw = rho;
        const auto b = build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c));
        const auto sol = lp::solve(b.lp);
        REQUIRE(sol.status == lp::Status::Optimal);
        double total = 0.0;
        for (int s = 0; s < 2; ++s)
            for (int k = 0; k < 4; ++k) {
                const auto sl = slacks_at(sol, b.map, k, s);
                total += sl.s_un_cw + sl.s_ov_cw + sl.s_un_hw + sl.s_ov_hw;
            }
        CHECK(total <= prev + 1e-6);
        prev = total;
    }
}

TEST_CASE("LP solutions satisfy the plant balances") {
    auto in = random_instance(41, 6, 3);
    const auto b = build_stochastic(in.c, in.s, in.set, in.tm, full_bounds(in.c));
    for (auto backend : {lp::Backend::Simplex, lp::Backend::InteriorPoint}) {
        const auto sol = lp::solve_with(b.lp, backend);
        REQUIRE(sol.status == lp::Status::Optimal);
        for (int s = 0; s < 3; ++s)
            for (int k = 0; k < 6; ++k) {
                const auto r = balance_residuals(in.c, action_at(sol, b.map, k, s), in.set.scenarios[s][k],
                                                 slacks_at(sol, b.map, k, s));
                CHECK(std::abs(r.cw) < 1e-6);
                CHECK(std::abs(r.hw) < 1e-6);
                CHECK(std::abs(r.cond) < 1e-6);
            }
    }
}

TEST_CASE("extracted action and predicted state") {
    auto in = random_instance(51, 3, 1);
    const auto b = build_deterministic(in.c, in.s, in.set.scenarios[0], in.tm, full_bounds(in.c));
    const auto sol = lp::solve(b.lp);
    const auto ex = extract_action(sol, b.map);
    CHECK(ex.predicted.e_cw == doctest::Approx(in.s.e_cw - ex.action.p_cw));
    CHECK(ex.predicted.e_hw == doctest::Approx(in.s.e_hw - ex.action.p_hw));
    CHECK(ex.predicted.peak >= in.s.peak - 1e-9);
    CHECK(within_bounds(in.c, ex.action, 1e-7));

    lp::LpSolution bad;
    bad.status = lp::Status::Infeasible;
    CHECK_THROWS_AS(extract_action(bad, b.map), SolveError);
}

TEST_CASE("storage bounds are enforced along the horizon") {
    auto in = random_instance(61, 5, 2);
    StorageBounds bd{300.0, 2700.0, 150.0, 1350.0};
    in.s.e_cw = std::clamp(in.s.e_cw, 300.0, 2700.0);
    in.s.e_hw = std::clamp(in.s.e_hw, 150.0, 1350.0);
    const auto b = build_stochastic(in.c, in.s, in.set, in.tm, bd);
    const auto sol = lp::solve(b.lp);
    REQUIRE(sol.status == lp::Status::Optimal);
    for (int s = 0; s < 2; ++s)
        for (int k = 1; k <= 5; ++k) {
            const double ecw = sol.primal[b.map.col(Quantity::E, 0, k, s)];
            const double ehw = sol.primal[b.map.col(Quantity::E, 1, k, s)];
            CHECK(ecw >= 300.0 - 1e-7);
            CHECK(ecw <= 2700.0 + 1e-7);
            CHECK(ehw >= 150.0 - 1e-7);
            CHECK(ehw <= 1350.0 + 1e-7);
        }
}
