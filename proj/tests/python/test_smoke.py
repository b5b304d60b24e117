import math

import pytest

hvacmpc = pytest.importorskip("hvacmpc")

SMALL = {
    "forecast": {"horizon": 6, "ar_order": 6, "history_days": 14, "scenarios": 3},
    "simulation": {"days": 1},
    "calendar": {"start_day": 100},
    "benchmark": {"validation_count": 2, "jobs": 1},
}


def test_plant_functions():
    c = hvacmpc.PlantConfig()
    a = hvacmpc.ControlAction()
    a.p_cs = 50.0
    c.alpha_e_cs = 0.2
    r_e, r_w, r_ng = hvacmpc.residual_demands(c, a, 100.0)
    assert r_e == pytest.approx(110.0)
    assert r_w == 0.0 and r_ng == 0.0
    zero = hvacmpc.ControlAction()
    assert hvacmpc.stage_cost(c, zero, hvacmpc.Disturbance(100.0, 0, 0, 0.05)) == pytest.approx(5.0)
    assert hvacmpc.demand_discount(84, 168) == pytest.approx(0.5)
    assert c.to_dict()["price_demand"] == 4.5


def test_invalid_config_raises():
    c = hvacmpc.PlantConfig()
    c.buffer = 0.7
    with pytest.raises(ValueError):
        c.validate()


def test_solve_lp_both_backends():
    rows = [(">=", 2.0, {0: 1.0, 1: 1.0}), ("<=", 3.0, {0: 1.0, 1: -1.0})]
    for backend in ("simplex", "ipm"):
        res = hvacmpc.solve_lp([1.0, 2.0], [0.0, 0.0], [10.0, 10.0], rows, backend)
        assert res["status"] == "optimal"
        assert res["objective"] == pytest.approx(2.0, abs=1e-7)


def test_generated_data():
    t = hvacmpc.generate_data(3, 2)
    assert len(t) == 48
    assert all(d.load_cw >= 0 for d in t)


def test_closed_loop_run():
    truth = hvacmpc.generate_data(5, 20)
    s = hvacmpc.run("det:0.1", truth, SMALL)
    assert s["hours"] == 24
    cost = s["cost"]
    parts = cost["electricity"] + cost["water"] + cost["gas"] + cost["demand"]
    assert math.isclose(parts, cost["total"], rel_tol=1e-6)


def test_benchmark_report():
    truth = hvacmpc.generate_data(5, 20)
    rep = hvacmpc.benchmark(["det:0.1", "perf"], truth, SMALL)
    assert rep["validation_count"] == 2
    assert len(rep["runs"]) == 4
    for cdf in rep["cdfs"]:
        assert cdf["p"][-1] == 1.0
