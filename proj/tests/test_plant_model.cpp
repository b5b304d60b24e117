#include <doctest.h>

#include <random>

#include "hvac/plant_model.hpp"

using namespace hvac;

TEST_CASE("residual demands pass load through for a zero action") {
    PlantConfig c;
    auto r = residual_demands(c, {}, 100.0);
    CHECK(r.r_e == doctest::Approx(100.0));
    CHECK(r.r_w == 0.0);
    CHECK(r.r_ng == 0.0);
}

TEST_CASE("residual demands evaluate each utility") {
    PlantConfig c;
    c.alpha_e_cs = 0.2;
    ControlAction a;
    a.p_cs = 50.0;
    CHECK(residual_demands(c, a, 100.0).r_e == doctest::Approx(110.0));
    ControlAction g;
    g.p_hwg = 40.0;
    c.alpha_ng_hwg = 1.25;
    CHECK(residual_demands(c, g, 0.0).r_ng == doctest::Approx(50.0));
}

TEST_CASE("balance residuals") {
    PlantConfig c;
    CHECK(balance_residuals(c, {}, {}).cw == 0.0);
    ControlAction a;
    a.p_cs = 30;
    a.p_hrc = 20;
    a.p_cw = 10;
    Disturbance d;
    d.load_cw = 60;
    CHECK(balance_residuals(c, a, d).cw == doctest::Approx(0.0));

    ControlAction b;
    c.alpha_cond_cs = 1.2;
    b.p_cs = 50;
    b.p_hx = 5;
    b.p_ct = 65;
    CHECK(balance_residuals(c, b, {}).cond == doctest::Approx(0.0));

    ControlAction h;
    h.p_hrc = 10;
    h.p_hwg = 30;
    h.p_hx = 5;
    h.p_hw = -5;
    Disturbance dh;
    dh.load_hw = 40;
    Slacks s;
    s.s_un_hw = 12;
    s.s_ov_hw = 2;
    CHECK(balance_residuals(c, h, dh, s).hw == doctest::Approx(10 + 30 - 5 - 5 + 12 - 2 - 40));
}

TEST_CASE("stage cost terms") {
    PlantConfig c;
    Disturbance d;
    d.load_elec = 100;
    d.price_elec = 0.05;
    CHECK(stage_cost(c, {}, d) == doctest::Approx(5.0));

    ControlAction ct;
    ct.p_ct = 1000.0 / c.alpha_w_ct;
    CHECK(stage_cost_parts(c, ct, {}).water == doctest::Approx(9.0));

    ControlAction g;
    g.p_hwg = 100.0 / c.alpha_ng_hwg;
    CHECK(stage_cost_parts(c, g, {}).gas == doctest::Approx(1.8));
}

TEST_CASE("stage cost is linear in the action when loads are zero") {
    PlantConfig c;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int k = 0; k < 50; ++k) {
        ControlAction a{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng) - 50, u(rng) - 50};
        Disturbance d;
        d.price_elec = u(rng) / 1000.0;
        const double lam = u(rng) / 10.0;
        auto arr = as_array(a);
        for (auto& v : arr) v *= lam;
        CHECK(stage_cost(c, from_array(arr), d) == doctest::Approx(lam * stage_cost(c, a, d)).epsilon(1e-12));
    }
}

TEST_CASE("demand discount") {
    CHECK(demand_discount(336, 168) == doctest::Approx(1.0));
    CHECK(demand_discount(84, 168) == doctest::Approx(0.5));
    CHECK(demand_discount(0, 168) == doctest::Approx(1.0 / 168));
    CHECK_THROWS_AS(demand_discount(10, 0), std::invalid_argument);
    double prev = 2.0;
    for (int h = 400; h >= 0; --h) {
        const double s = demand_discount(h, 168);
        CHECK(s <= prev);
        CHECK(s >= 1.0 / 168);
        CHECK(s <= 1.0);
        prev = s;
    }
}

TEST_CASE("step state") {
    PlantConfig c;
    PlantState s;
    s.e_cw = 500;
    ControlAction a;
    a.p_cw = 100;
    CHECK(step_state(s, a, {}, {0, 0}, c).e_cw == doctest::Approx(400));

    PlantState p;
    p.peak = 900;
    Disturbance d;
    d.load_elec = 950;
    CHECK(step_state(p, {}, d, {0, 0}, c).peak == doctest::Approx(950));
    d.load_elec = 850;
    CHECK(step_state(p, {}, d, {0, 0}, c).peak == doctest::Approx(900));

    PlantState q;
    q.e_cw = 123;
    q.e_hw = 45;
    auto n = step_state(q, {}, {}, {0, 0}, c);
    CHECK(n.e_cw == 123);
    CHECK(n.e_hw == 45);
}

TEST_CASE("config json round trip and validation") {
    PlantConfig c;
    c.buffer = 0.1;
    c.cap_cw = 12340;
    nlohmann::json j = c;
    auto d = j.get<PlantConfig>();
    CHECK(d.cap_cw == 12340);
    CHECK(d.buffer == 0.1);
    CHECK(j.size() == 23);
    CHECK_NOTHROW(d.validate());

    d.buffer = 0.5;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.buffer = 0.0;
    d.pmax_cw = d.cap_cw + 1;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = c;
    d.rho_cw = -1;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);

    nlohmann::json bad = {{"alpha_e_cs", 0.1}, {"not_a_field", 2}};
    CHECK_THROWS_AS(bad.get<PlantConfig>(), std::invalid_argument);
}
