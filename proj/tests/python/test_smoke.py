import json

import numpy as np
import pytest

import moma


def test_example_one_is_exact():
    rw = moma.simple_rw(20)
    rep = moma.evaluate(rw, axes=[[0, 20]])
    assert rep["n_meta"] == 2
    assert rep["gaps"]["max_abs"] <= 1e-8
    # V solves (I - alpha P) V = c
    p = rw.transition_matrix()
    v = np.linalg.solve(np.eye(21) - 0.9 * p, rw.cost)
    assert np.max(np.abs(v - rep["V_moma"])) <= 1e-8


def test_dense_construction_and_exact_value():
    p = np.array([[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]])
    c = np.array([1.0, 2.0, 3.0])
    mrp = moma.Mrp([0], [2], p, c, 0.8)
    np.testing.assert_allclose(moma.exact_value(mrp), np.linalg.solve(np.eye(3) - 0.8 * p, c), rtol=1e-12)
    with pytest.raises(ValueError):
        moma.Mrp([0], [2], p[:2], c, 0.8)
    with pytest.raises(ValueError):
        moma.Mrp([0], [2], p, c, 1.0)


def test_grid_and_bound():
    axes = moma.grid_axes([0, 0], [40, 40], 0.45)
    assert axes[0] == axes[1]
    assert axes[0][0] == 0 and axes[0][-1] == 40
    assert len(axes[0]) ** 2 <= moma.meta_count_bound([0, 0], [40, 40], 0.45)


def test_first_moment_and_mstep():
    rw = moma.reflecting_rw(60, seed=3)
    assert moma.first_moment_gap(rw, 0.45) <= 1e-9
    assert moma.verify_mstep_identity(rw, 2) <= 1e-8


def test_run_round_trip(tmp_path):
    code, summary = moma.run(problem={"name": "simple_rw"}, solver={"mode": "evaluate"}, output={"dir": tmp_path})
    assert code == 0
    assert summary["status"] == "ok"
    assert summary["evaluation"]["gaps"]["max_abs_gap"] <= 1e-8
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk["n_meta"] == summary["n_meta"]
    assert (tmp_path / "states.csv").read_text().splitlines()[0].startswith("state_index,x0,V_exact")


def test_run_config_error():
    with pytest.raises(moma.ConfigError):
        moma.run({"solver.spacing": "1.5"})


def test_format_double():
    assert moma.format_double(0.1) == "0.10000000000000001"
