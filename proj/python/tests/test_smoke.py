import math

import numpy as np
import pytest

import cvaod


def test_model_roundtrip_and_validation():
    m = cvaod.simulation_differenced_model()
    assert (m.n, m.s) == (2, 2)
    np.testing.assert_allclose(m.closed_loop(), np.eye(2))
    with pytest.raises(ValueError):
        cvaod.StateSpaceModel(np.eye(2) * 1.2, np.eye(2), np.eye(2), np.eye(2))


def test_differenced_white_noise_oracle():
    ex1 = cvaod.differenced_white_noise_model(np.eye(1))
    gammas = cvaod.covariance_sequence(ex1, 2)
    assert [g[0, 0] for g in gammas] == [2.0, -1.0, 0.0]
    assert cvaod.lambda_min_gamma(ex1, 3) == pytest.approx(2 * (1 - math.cos(math.pi / 4)), rel=1e-12)
    lim = cvaod.population_limits(ex1, 4)
    assert lim["A"][0, 0] == pytest.approx(-1 / 20)
    assert lim["B"][0, 0] == pytest.approx(-1 + 1 / 5)
    assert lim["delta_var"][0, 0] == pytest.approx(1 / 5)


def test_simulate_is_deterministic():
    m = cvaod.simulation_differenced_model()
    a = cvaod.simulate(m, 300, seed=5)
    b = cvaod.simulate(m, 300, seed=5)
    assert a.shape == (300, 2)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, cvaod.simulate(m, 300, seed=6))


def test_cva_and_optimizer():
    m = cvaod.simulation_differenced_model()
    y = cvaod.simulate(m, 2000, seed=11)
    k, f, p = cvaod.select_order(y, 2)
    assert f == p == max(2 * k, 2)
    est = cvaod.cva_fit(y, f, p, 2)
    assert est["A"].shape == (2, 2)
    sv = est["singular_values"]
    assert np.all(np.diff(sv) <= 0)
    k1 = cvaod.impulse_responses(m, 1)[0]
    np.testing.assert_allclose(est["B"] @ np.zeros((2, 2)) + est["C"] @ est["B"], k1, atol=0.2)

    res = cvaod.optimize(y, est["A"], est["B"], est["C"], kind="qmle")
    assert res["final_objective"] <= res["initial_objective"]
    assert cvaod.spectral_radius(res["A"] - res["B"] @ res["C"]) < 0.99


def test_errors_are_translated():
    y = cvaod.simulate(cvaod.simulation_differenced_model(), 100, seed=1)
    with pytest.raises(ValueError):
        cvaod.cva_fit(y, 2, 2, 5)
    with pytest.raises(cvaod.NumericalError):
        cvaod.cva_fit(np.zeros((100, 2)), 2, 2, 2)
    with pytest.raises(ValueError):
        cvaod.optimize(y, np.zeros((1, 1)), np.zeros((1, 2)), np.zeros((2, 1)), kind="ml")


def test_run_experiment():
    base = cvaod.simulation_base_model()
    cfg = {
        "dgp": {"base": {"n": 2, "s": 2, "A": base.A.tolist(), "B": base.B.tolist(),
                         "C": base.C.tolist(), "omega": base.omega.tolist()},
                "m_c": np.eye(2).tolist()},
        "t_values": [200],
        "m_reps": 3,
        "base_seed": 9,
    }
    rows = cvaod.run_experiment(cfg)
    assert len(rows) == 1
    assert rows[0]["estimator"] == "cva"
    assert rows[0]["n_ok"] + rows[0]["n_fail"] == 3
    assert rows == cvaod.run_experiment(cfg)
    with pytest.raises(ValueError):
        cvaod.run_experiment("{not json")
