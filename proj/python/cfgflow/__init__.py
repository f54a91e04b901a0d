"""Constrained functional gradient sampler (bindings to the C++ library)."""

import json

from ._cfgflow import (
    ConfigError,
    Domain,
    NumericalError,
    adaptive_bandwidth,
    boundary_quadrature,
    energy_distance,
    exact_w2,
    make_domain,
    sinkhorn_w2,
)
from . import _cfgflow


def _as_json(config):
    return config if isinstance(config, str) else json.dumps(config)


def run(config):
    """Run the sampler. `config` is a dict or JSON string with the CLI schema."""
    return _cfgflow.run(_as_json(config))


def oracle_sample(config, n, seed=0):
    """Rejection samples (n, d) from the config's target."""
    return _cfgflow.oracle_sample(_as_json(config), n, seed)


__all__ = [
    "ConfigError",
    "Domain",
    "NumericalError",
    "adaptive_bandwidth",
    "boundary_quadrature",
    "energy_distance",
    "exact_w2",
    "make_domain",
    "oracle_sample",
    "run",
    "sinkhorn_w2",
]
