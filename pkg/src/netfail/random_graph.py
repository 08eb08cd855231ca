"""Erdos-Renyi graphs and the connectivity-threshold experiment."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from netfail._parallel import ordered_map
from netfail.graph_core import Graph, is_connected


@lru_cache(maxsize=8)
def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def gnp(n: int, p: float, rng_seed=0) -> Graph:
    """G(n, p) with one counter-based draw per vertex pair.

    Pair ``(i, j)``, ``i < j``, takes the uniform at its row-major position
    in a Philox stream keyed by the seed, so the graph does not depend on
    the order edges are inspected in.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))
    iu, ju = _pairs(n)
    keep = rng.random(iu.size) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def critical_p(n: int, c: float) -> float:
    """``min(1, c ln n / n)``; warns outside the ``c > 3`` regime."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if c <= 0:
        raise ValueError("c must be positive")
    if c <= 3:
        warnings.warn(f"c={c} <= 3 is below the guaranteed-connectivity regime", stacklevel=2)
    return min(1.0, c * math.log(n) / n)


@dataclass(frozen=True)
class ThresholdReport:
    n: int
    c: float
    p: float
    trials: int
    connected_count: int
    empirical_probability: float
    bound: float
    slack: float
    passed: bool

    def to_json(self) -> dict:
        return asdict(self)


def threshold_experiment(n: int, c: float, trials: int, rng_seed: int = 0, workers: int = 1) -> ThresholdReport:
    """Fraction of ``G(n, c ln n / n)`` samples that are connected.

    Passes when the fraction reaches ``1 - 1/n`` minus three binomial
    standard errors of that bound. Trial ``i`` uses seed ``(rng_seed, i)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = critical_p(n, c)
    flags = ordered_map(lambda i: is_connected(gnp(n, p, [rng_seed, i])), range(trials), workers)
    count = int(sum(flags))
    bound = 1.0 - 1.0 / n
    slack = 3.0 * math.sqrt((1.0 / n) * (1.0 - 1.0 / n) / trials)
    empirical = count / trials
    return ThresholdReport(n, float(c), p, trials, count, empirical, bound, slack, empirical >= bound - slack)


def threshold_sweep(n: int, cs, trials: int, rng_seed: int = 0, workers: int = 1) -> list[ThresholdReport]:
    return [threshold_experiment(n, c, trials, rng_seed, workers) for c in cs]
