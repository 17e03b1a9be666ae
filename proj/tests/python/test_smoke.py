"""Smoke tests for the python bindings."""

import json
import math

import numpy as np
import pytest

import markovsa as ms


def test_l1_lmo_and_projection():
    ball = ms.FeasibleSet.l1_ball(2.0, 3)
    v = ball.lmo(np.array([3.0, -5.0, 1.0]))
    assert np.allclose(v, [0.0, 2.0, 0.0])
    p = ms.FeasibleSet.l1_ball(1.0, 2).project(np.array([1.0, 1.0]))
    assert np.allclose(p, [0.5, 0.5])
    assert ball.contains(v, 1e-9)
    assert ball.diameter() == 4.0


def test_nuclear_lmo_is_rank_one():
    ball = ms.FeasibleSet.nuclear_ball(1.0, 2, 2)
    v = ball.lmo(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert v.shape == (2, 2)
    assert abs(v[0, 0] + 1.0) < 1e-8
    s = np.linalg.svd(v, compute_uv=False)
    assert abs(s.sum() - 1.0) < 1e-8
    assert s[1] < 1e-9


def test_icg_approaches_the_exact_solve():
    ball = ms.FeasibleSet.l1_ball(1.0, 4)
    rng = np.random.default_rng(0)
    theta = ball.project(rng.normal(size=4))
    z = rng.normal(size=4)
    exact = ms.solve_exact(ball, z, theta, beta=1.0)
    w = ms.icg_solve(ball, z, theta, beta=1.0, omega=1.0, iterations=100)
    bound = 4.0 * ball.diameter() ** 2 * 2.0 / 102.0
    assert np.sum((w - exact) ** 2) <= bound


def test_schedules():
    sd = ms.Schedule.state_dependent(0.6, 100)
    assert math.isclose(ms.eta_of(sd, 1), 101.0 ** -0.6, rel_tol=1e-12)
    si = ms.Schedule.state_independent(100)
    assert ms.eta_of(si, 5) == pytest.approx(0.1)
    assert ms.t_of(si, 9) == 3


def test_metrics():
    box = ms.FeasibleSet.box(np.full(2, -10.0), np.full(2, 10.0))
    g = ms.gradient_mapping(box, np.zeros(2), np.array([2.0, 0.0]), beta=2.0)
    assert np.allclose(g, [2.0, 0.0])
    ball = ms.FeasibleSet.l1_ball(1.0, 2)
    assert ms.fw_gap(ball, np.zeros(2), np.array([2.0, 0.0])) == pytest.approx(2.0)
    v = ms.suboptimality_v(box, np.zeros(2), np.array([1.0, 0.0]), np.zeros(2))
    assert v == pytest.approx(2.0)


def test_oracle_round_trip():
    env = {"type": "single_index", "d1": 3, "d2": 4, "v": 0.1,
           "spectral_radius": 0.5}
    oracle = ms.Oracle(json.dumps(env))
    oracle.reset(7)
    theta = np.zeros((3, 4))
    x, y = oracle.step(theta)
    assert x.shape == (3, 4)
    assert y is not None
    g = oracle.stoch_grad(theta, x, y)
    assert g.shape == (3, 4)
    assert oracle.loss(theta, x, y) >= 0.0
    # determinism across fresh oracles
    other = ms.Oracle(json.dumps(env))
    other.reset(7)
    x2, y2 = other.step(theta)
    assert np.array_equal(x, x2) and y == y2


def test_run_single_and_experiment(tmp_path):
    config = {
        "environment": {"type": "ar_chain", "dim": 3, "rho": 0.5,
                        "noise_mean": 0.2},
        "feasible_set": {"type": "l1_ball", "radius": 1.0},
        "run": {"N": 30, "mode": "icg",
                "schedule": {"kind": "state_dependent", "a": 0.6}},
        "probe": {"cadence": 10, "burn_in": 5, "n": 10,
                  "final_burn_in": 5, "final_n": 10},
        "repetitions": 2,
        "master_seed": 99,
        "output_dir": str(tmp_path / "out"),
    }
    rec = ms.run_single(json.dumps(config), repetition=0)
    assert rec["sfo_calls"] == 30
    assert rec["lmo_calls"] == sum(math.ceil((30 + k) ** 1.2)
                                   for k in range(1, 31))
    assert not rec["aborted"]

    summary = json.loads(ms.run_experiment(json.dumps(config)))
    assert summary["tool"]["name"] == "markovsa"
    assert len(summary["repetitions"]) == 2
    assert (tmp_path / "out" / "aggregate.csv").exists()
    header = (tmp_path / "out" / "rep_000.csv").read_text().splitlines()[0]
    assert header == "k,eta,t_k,loss,V_hat,fw_gap,sfo_calls,lmo_calls"


def test_unknown_config_key_is_rejected():
    config = {
        "environment": {"type": "ar_chain", "dim": 2, "rho": 0.5},
        "feasible_set": {"type": "l1_ball", "radius": 1.0},
        "run": {"N": 5, "mode": "projection"},
        "repetitionz": 1,
    }
    with pytest.raises(Exception, match="repetitionz"):
        ms.run_single(json.dumps(config))
