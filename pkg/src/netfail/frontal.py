"""Random frontal layer between two input sets.

Each of the ``N`` frontal elements is wired to each element of ``X`` (size
``r``) and ``Y`` (size ``k``) independently with probability ``p``. An
element is *active* when it touches both sides, so the active set realises
``X AND Y`` and its size is ``Binomial(N, p_c)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from netfail._parallel import ordered_map


def _check_sizes(p: float, r: int, k: int) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if r < 1 or k < 1:
        raise ValueError("input sets need at least one element")


def _hit(p: float, size: int) -> float:
    # 1 - (1-p)**size without cancellation for tiny p
    if p == 1.0:
        return 1.0
    return -math.expm1(size * math.log1p(-p))


def connection_probability(p: float, r: int, k: int) -> float:
    """Probability that a frontal element links to both X and Y."""
    _check_sizes(p, r, k)
    return _hit(p, r) * _hit(p, k)


def connection_probability_approx(p: float, r: int, k: int) -> float:
    """Small-``p`` leading term ``r k p**2`` (error is ``O(p**3)``)."""
    return r * k * p * p


def default_p(n_frontal: int, r: int) -> float:
    """``(N r)**-1/2``, which makes the expected active count close to ``k``."""
    if n_frontal < 1 or r < 1:
        raise ValueError("sizes must be positive")
    return min(1.0, (n_frontal * r) ** -0.5)


@dataclass(frozen=True)
class ActivationStats:
    p_c: float
    expected_active: float
    variance: float
    empirical_mean: float | None = None
    empirical_variance: float | None = None
    mean_stderr: float | None = None
    trials: int | None = None

    def to_json(self) -> dict:
        return asdict(self)


def activation_stats(n_frontal: int, p: float, r: int, k: int) -> ActivationStats:
    pc = connection_probability(p, r, k)
    return ActivationStats(pc, n_frontal * pc, n_frontal * pc * (1.0 - pc))


@dataclass(frozen=True)
class FrontalSystem:
    r: int
    k: int
    n_frontal: int
    p: float
    x_links: np.ndarray = field(repr=False)  # bool (N, r)
    y_links: np.ndarray = field(repr=False)  # bool (N, k)


def generate(n_frontal: int, r: int, k: int, p: float, rng_seed=0) -> FrontalSystem:
    _check_sizes(p, r, k)
    if n_frontal < 1:
        raise ValueError("frontal layer needs at least one element")
    rng = np.random.default_rng(rng_seed)
    x = rng.random((n_frontal, r)) < p
    y = rng.random((n_frontal, k)) < p
    return FrontalSystem(r, k, n_frontal, p, x, y)


def active_mask(sys: FrontalSystem) -> np.ndarray:
    return sys.x_links.any(axis=1) & sys.y_links.any(axis=1)


def active_set(sys: FrontalSystem) -> frozenset[int]:
    """Frontal elements on some path ``X -> A -> Y``."""
    return frozenset(np.flatnonzero(active_mask(sys)).tolist())


def regenerate_after_damage(sys: FrontalSystem, damaged, rng_seed=0) -> FrontalSystem:
    """Redraw the incidence rows of ``damaged`` elements at the same ``p``.

    Every other row is copied unchanged.
    """
    rows = np.array(sorted({int(v) for v in damaged}), dtype=np.int64)
    if rows.size and (rows[0] < 0 or rows[-1] >= sys.n_frontal):
        raise IndexError("damaged element out of range")
    x = sys.x_links.copy()
    y = sys.y_links.copy()
    if rows.size:
        rng = np.random.default_rng(rng_seed)
        x[rows] = rng.random((rows.size, sys.r)) < sys.p
        y[rows] = rng.random((rows.size, sys.k)) < sys.p
    return FrontalSystem(sys.r, sys.k, sys.n_frontal, sys.p, x, y)


def _summary(values: np.ndarray) -> tuple[float, float, float]:
    mean = float(values.mean())
    var = float(values.var(ddof=1))
    return mean, var, math.sqrt(var / values.size)


def active_counts(n_frontal, r, k, p, trials, rng_seed=0, workers=1) -> np.ndarray:
    """``|active set|`` of ``trials`` independent systems (trial ``i`` seeded ``(seed, i)``)."""
    def one(i):
        return int(active_mask(generate(n_frontal, r, k, p, [rng_seed, i])).sum())

    return np.array(ordered_map(one, range(trials), workers), dtype=float)


def monte_carlo_stats(n_frontal, r, k, p, trials, rng_seed=0, workers=1) -> ActivationStats:
    """Exact activation statistics with sample mean/variance attached."""
    if trials < 2:
        raise ValueError("need at least two trials for a variance")
    exact = activation_stats(n_frontal, p, r, k)
    mean, var, se = _summary(active_counts(n_frontal, r, k, p, trials, rng_seed, workers))
    return ActivationStats(exact.p_c, exact.expected_active, exact.variance, mean, var, se, trials)


def variance_interval(sigma2: float, trials: int, level: float = 0.99) -> tuple[float, float]:
    """Acceptance band for a sample variance of ``trials`` normal draws."""
    dof = trials - 1
    lo, hi = stats.chi2.ppf([(1 - level) / 2, (1 + level) / 2], dof)
    return sigma2 * lo / dof, sigma2 * hi / dof


def overlap_estimate(n_frontal: int, r: int, k: int, p: float) -> float:
    """Expected shared elements of two independent active sets, ``N p_c**2``.

    A derived quantity: two independent layers overlap on an element with
    probability ``p_c**2``.
    """
    return n_frontal * connection_probability(p, r, k) ** 2


def overlap_counts(n_frontal, r, k, p, trials, rng_seed=0, workers=1) -> np.ndarray:
    def one(i):
        a = active_mask(generate(n_frontal, r, k, p, [rng_seed, i, 0]))
        b = active_mask(generate(n_frontal, r, k, p, [rng_seed, i, 1]))
        return int((a & b).sum())

    return np.array(ordered_map(one, range(trials), workers), dtype=float)


@dataclass(frozen=True)
class RegenerationReport:
    trials: int
    damage_fraction: float
    expected_active: float
    mean_before: float
    mean_damaged: float
    mean_after: float
    after_stderr: float

    def to_json(self) -> dict:
        return asdict(self)


def regeneration_cycle(n_frontal, r, k, p, trials, damage_fraction=1.0, rng_seed=0, workers=1) -> RegenerationReport:
    """Damage a random fraction of the layer, regenerate it, recount.

    Damaged elements are a uniform sample of ``round(fraction * N)``
    elements of the layer. With ``damage_fraction=1`` every row is redrawn
    and the recovered count is again ``Binomial(N, p_c)``.
    """
    if not 0.0 <= damage_fraction <= 1.0:
        raise ValueError("damage fraction must lie in [0, 1]")
    n_damaged = round(damage_fraction * n_frontal)

    def one(i):
        sys = generate(n_frontal, r, k, p, [rng_seed, i, 0])
        rng = np.random.default_rng([rng_seed, i, 1])
        damaged = rng.choice(n_frontal, size=n_damaged, replace=False)
        after = regenerate_after_damage(sys, damaged, [rng_seed, i, 2])
        return int(active_mask(sys).sum()), n_damaged, int(active_mask(after).sum())

    rows = np.array(ordered_map(one, range(trials), workers), dtype=float).reshape(trials, 3)
    after_mean = float(rows[:, 2].mean())
    se = float(rows[:, 2].std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RegenerationReport(
        trials, damage_fraction, activation_stats(n_frontal, p, r, k).expected_active,
        float(rows[:, 0].mean()), float(rows[:, 1].mean()), after_mean, se,
    )


def active_set_regeneration(n_frontal, r, k, p, trials, rng_seed=0, workers=1) -> np.ndarray:
    """Per trial: damage exactly the active set, regenerate, return ``(before, after)`` counts."""
    def one(i):
        sys = generate(n_frontal, r, k, p, [rng_seed, i, 0])
        active = np.flatnonzero(active_mask(sys))
        after = regenerate_after_damage(sys, active, [rng_seed, i, 2])
        return active.size, int(active_mask(after).sum())

    return np.array(ordered_map(one, range(trials), workers), dtype=float).reshape(trials, 2)
