import math

import pytest

import mfnet


def test_catalog_round_trip():
    assert "default" in mfnet.catalog_names()
    model = mfnet.catalog_model("default")
    assert mfnet.validate(model) == []


def test_validation_issue_codes():
    model = mfnet.catalog_model("default")
    model["mu0"] = [0.5, 0.5, 0.5]
    codes = [code for code, _ in mfnet.validate(model)]
    assert "mu0_simplex" in codes


def test_simulate_shapes_and_determinism():
    model = mfnet.catalog_model("default")
    a = mfnet.simulate(model, 30, seed=4, grid=10)
    b = mfnet.simulate(model, 30, seed=4, grid=10)
    assert len(a["t"]) == 11
    assert all(abs(sum(p) - 1.0) < 1e-12 for p in a["mu"])
    assert a["paths"] == b["paths"]
    assert a["beta"] == 30.0


def test_forward_equation_conserves_mass():
    out = mfnet.forward_equation_accel(mfnet.catalog_model("default"), intervals=10)
    for p in out["p"]:
        assert sum(p) == pytest.approx(1.0, abs=1e-10)


def test_dbl_and_fit():
    assert mfnet.dbl_distance([1, 0], [0, 1], [0, 1]) == pytest.approx(1.0, abs=1e-9)
    xs = [50, 100, 200, 400]
    fit = mfnet.fit_rate(xs, [1 / math.sqrt(x) for x in xs])
    assert fit["slope"] == pytest.approx(-0.5, abs=1e-12)


def test_philox_known_answer():
    assert mfnet.philox([0, 0, 0, 0], [0, 0]) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]


def test_errors_map_to_python(tmp_path):
    bad = mfnet.catalog_model("default")
    bad["T"] = -1.0
    with pytest.raises(ValueError):
        mfnet.simulate(bad, 10)
    with pytest.raises(mfnet.BudgetError):
        mfnet.run_experiment({"experiment": "simulate", "event_budget": 10, "out": str(tmp_path)})


def test_dry_run_experiment(tmp_path):
    report = mfnet.run_experiment(
        {"experiment": "lln_rate_accel", "dry_run": {"c": 2.0}, "out": str(tmp_path)}
    )
    assert report["slope"] == pytest.approx(-0.5, abs=1e-12)
    assert (tmp_path / "manifest.json").exists()
