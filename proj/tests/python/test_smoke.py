import json

import numpy as np
import pytest

import nltraffic

MERGE = """
[network]
e1 = V1 -> V0, 1.0
e2 = V2 -> V0, 1.0
e3 = V0 -> V3, 1.0, terminal
[grid]
T = 1.25
dx = 0.02
[lights]
junction = V0
edges = e1, e2
radius = 0.125
u0 = 0
durations = 0.227, 0.251, 0.259, 0.3, 0.21
T_G = 0.15
T_R = 0.3
[initial]
e1 = [0.1, 0.15] + [0.4, 0.45]
e2 = [0.1, 0.15] + [0.6, 0.65]
"""


@pytest.fixture
def merge():
    return nltraffic.Scenario.from_text(MERGE)


def test_bundled_scenario_loads():
    scn = nltraffic.Scenario.load("fig6")
    assert scn.edges == ["e1", "e2", "e3"]
    assert scn.horizon == 1.25
    assert scn.durations == pytest.approx([0.227, 0.251, 0.259, 0.3, 0.21])


def test_simulate_conserves_mass(merge):
    out = nltraffic.simulate(merge)
    density = out["density"]
    assert density.shape == (len(out["times"]), 150)
    assert density.min() >= 0.0
    assert out["balance_residual"] < 1e-8
    dx = out["edges"]["e1"]["dx"]
    assert density[0].sum() * dx == pytest.approx(0.2)
    assert 0.0 < out["cost"]["vbar"] <= 1.0


def test_adjoint_vanishes_at_the_horizon(merge):
    out = nltraffic.simulate(merge, adjoint=True)
    assert np.all(out["adjoint"][-1] == 0.0)


def test_gradient_matches_small_differences(merge):
    ev = nltraffic.evaluate(merge)
    assert len(ev["gradient"]) == 5
    rows = nltraffic.gradient_check(merge, delta_steps=0.01)
    for _, analytic, fd, rel in rows:
        assert rel <= 0.05 or abs(analytic - fd) <= 1e-4


def test_sweep_and_optimize(merge):
    rows = nltraffic.sweep(merge, samples=5)
    assert [round(r[0], 12) for r in rows] == pytest.approx([1.25 * k / 6 for k in range(1, 6)])
    res = nltraffic.optimize(merge, starts=2, seed=3, max_iter=5)
    costs = [it[1] for it in res["best"]["iterates"]]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    assert all(0.15 <= d <= 0.3 for d in res["best"]["durations"])


def test_errors_are_typed(merge):
    with pytest.raises(nltraffic.ValidationError):
        nltraffic.evaluate(merge, durations=[0.2, -0.1])
    with pytest.raises(nltraffic.IoError):
        nltraffic.Scenario.load("/nonexistent/scenario.ini")
    with pytest.raises(nltraffic.Error):
        nltraffic.Scenario.from_text("[grid]\nT = 1\n")


def test_coupled_fleet():
    out = nltraffic.simulate_coupled(nltraffic.Scenario.load("fleet_demo"))
    initial, final, outflow = out["fleet_mass"]
    assert final + outflow == pytest.approx(initial, rel=1e-10)
    assert out["fleet"].shape == out["density"].shape


def test_cli_round_trip(tmp_path, merge):
    path = tmp_path / "merge.ini"
    path.write_text(merge.to_text())
    code = nltraffic.run_cli(["simulate", "--scenario", str(path), "--out-dir", str(tmp_path / "out")])
    assert code == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert "field.csv" in manifest["outputs"]
    assert nltraffic.run_cli(["nonsense"]) == 2
