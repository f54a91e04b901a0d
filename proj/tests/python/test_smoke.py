import json
import os
import pathlib

import numpy as np
import pytest

import cfgflow

CONFIGS = pathlib.Path(os.environ.get("CFG_SOURCE_DIR", pathlib.Path(__file__).parents[2])) / "configs"


def tiny_ring(**extra):
    cfg = json.loads((CONFIGS / "ring.json").read_text())
    cfg.update({"N": 80, "L": 20, "L_inner": 2, "f_hidden": 16, "snapshot_every": 10, "seed": 3})
    cfg.update(extra)
    return cfg


def test_domain_values():
    ring = cfgflow.make_domain("ring")
    assert ring.contains(np.array([1.5, 0.0]))
    assert not ring.contains(np.array([0.0, 0.0]))
    block = cfgflow.make_domain("block")
    assert block.g(np.array([3.0, 0.0])) == pytest.approx(1.0)
    np.testing.assert_allclose(block.grad_g(np.array([3.0, 0.5])), [1.0, 0.0])


def test_quadrature_reference():
    assert cfgflow.boundary_quadrature(2, 1, 400) == pytest.approx(0.226259, abs=1e-3)


def test_metrics():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 2))
    assert cfgflow.energy_distance(x, x) == pytest.approx(0.0, abs=1e-12)
    assert cfgflow.sinkhorn_w2(x[:1], x[1:2]) == pytest.approx(np.linalg.norm(x[0] - x[1]))
    y = rng.normal(size=(8, 2)) + 0.5
    exact = cfgflow.exact_w2(x[:8], y)
    assert abs(cfgflow.sinkhorn_w2(x[:8], y) - exact) <= 0.05 * exact


def test_run_is_deterministic_and_contained():
    a = cfgflow.run(tiny_ring())
    b = cfgflow.run(json.dumps(tiny_ring()))
    assert a["final"].shape == (80, 2)
    np.testing.assert_array_equal(a["final"], b["final"])
    assert [s[0] for s in a["snapshots"]] == [0, 10, 20]
    assert len(a["inside_fraction"]) == 21


def test_oracle_sample():
    x = cfgflow.oracle_sample(tiny_ring(), 500, seed=1)
    r2 = (x ** 2).sum(axis=1)
    assert x.shape == (500, 2)
    assert np.all((r2 >= 1.0) & (r2 <= 4.0))


def test_config_errors():
    cfg = tiny_ring()
    del cfg["alpha"]
    with pytest.raises(cfgflow.ConfigError, match="alpha"):
        cfgflow.run(cfg)
