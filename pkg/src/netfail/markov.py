"""Probabilistic damage as Markov processes.

Two readings of ``d pi/dt = pi A`` share the same exponential kernel:

* an exact chain whose states are damage configurations (subsets of damaged
  vertices) and whose generator is built by :func:`exact_state_chain`;
* a general user-supplied matrix, e.g. per-vertex mean-field marginals, where
  no generator structure is checked.

:func:`simulate_epidemic` is the Monte-Carlo counterpart of the exact chain.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from netfail._parallel import ordered_map
from netfail.graph_core import Graph, UNREACHABLE, _check_vertex, adjacency_matrix
from netfail.spectral import dominant_eigenvalue, matrix_exponential

log = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9
CLAMP_SILENT = 1e-12
CLAMP_HARD = 1e-9
DEFAULT_STATE_LIMIT = 14


@dataclass(frozen=True)
class StateVector:
    probabilities: np.ndarray
    kind: str = "distribution"  # or "marginal"

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1:
            raise ValueError("state vector must be one-dimensional")
        if self.kind not in ("distribution", "marginal"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "distribution":
            p = _clamp(p)
            if abs(p.sum() - 1.0) > ROW_SUM_TOL:
                raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True)
class RateMatrix:
    entries: np.ndarray
    kind: str = "generator"  # or "general"

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"rate matrix must be square, got {a.shape}")
        if self.kind == "generator":
            off = a - np.diag(np.diag(a))
            if np.any(off < 0):
                raise ValueError("generator has a negative off-diagonal rate")
            if a.size and np.max(np.abs(a.sum(axis=1))) > ROW_SUM_TOL:
                raise ValueError("generator rows must sum to zero")
        elif self.kind != "general":
            raise ValueError(f"unknown rate-matrix kind {self.kind!r}")
        object.__setattr__(self, "entries", a)


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.entries, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"transition matrix must be square, got {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if p.size and np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError("transition matrix is not row-stochastic")
        object.__setattr__(self, "entries", p)


def _clamp(p: np.ndarray) -> np.ndarray:
    low = p.min() if p.size else 0.0
    if low < -CLAMP_HARD:
        raise ValueError(f"negative probability {low!r}")
    if low < -CLAMP_SILENT:
        log.warning("clamping negative probability %.3g to zero", low)
    return np.where(p < 0, 0.0, p)


def evolve_continuous(pi0: StateVector, a: RateMatrix, t: float) -> StateVector:
    """``pi(t) = pi(0) exp(A t)`` (row-vector convention)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    p = pi0.probabilities
    if a.entries.shape[0] != p.shape[0]:
        raise ValueError("dimension mismatch between state and rate matrix")
    out = p @ matrix_exponential(a.entries, t)
    if a.kind == "generator" and pi0.kind == "distribution":
        out = _clamp(out)
        return StateVector(out, "distribution")
    return StateVector(out, "marginal")


def evolve_discrete(pi0: StateVector, p: TransitionMatrix, steps: int) -> StateVector:
    if p.entries.shape[0] != pi0.probabilities.shape[0]:
        raise ValueError("dimension mismatch between state and transition matrix")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    x = pi0.probabilities
    for _ in range(steps):
        x = x @ p.entries
    return StateVector(x, pi0.kind)


@dataclass(frozen=True)
class ErgodicPartition:
    recurrent: tuple[frozenset[int], ...]
    transient: frozenset[int]


def ergodic_classes(p: TransitionMatrix) -> ErgodicPartition:
    """Closed communicating classes of the positive-entry digraph.

    Strongly connected components without an edge leaving them are the
    recurrent (ergodic) classes; every other state is transient. Classes
    are ordered by their smallest state.
    """
    adj = csr_matrix(p.entries > 0)
    _, labels = connected_components(adj, directed=True, connection="strong")
    n = len(labels)
    leaves = set(labels.tolist())
    rows, cols = adj.nonzero()
    for i, j in zip(rows, cols):
        if labels[i] != labels[j]:
            leaves.discard(labels[i])
    classes: dict[int, set[int]] = {}
    transient = set()
    for s in range(n):
        if labels[s] in leaves:
            classes.setdefault(labels[s], set()).add(s)
        else:
            transient.add(s)
    recurrent = sorted((frozenset(c) for c in classes.values()), key=min)
    return ErgodicPartition(tuple(recurrent), frozenset(transient))


def damage_rate(a) -> float:
    """Dominant eigenvalue of a rate matrix, adjacency matrix or graph.

    For an adjacency matrix this is the early-phase spreading rate: the
    leading term of ``C**t`` grows like ``lambda_max**t``.
    """
    if isinstance(a, Graph):
        m = adjacency_matrix(a, dtype=float)
    elif isinstance(a, RateMatrix):
        m = a.entries
    else:
        m = np.asarray(a, dtype=float)
    return dominant_eigenvalue(m)


# --- exact configuration-space chain ----------------------------------------

@dataclass(frozen=True)
class ExactChain:
    """SI chain over damage configurations that contain the seeds.

    ``states[i]`` is a bitmask of damaged vertices; states are in increasing
    mask order, so every transition goes to a later index.
    """

    n: int
    states: np.ndarray
    generator: RateMatrix
    initial: StateVector

    def vertex_probabilities(self, pi: StateVector) -> np.ndarray:
        bits = (self.states[:, None] >> np.arange(self.n)) & 1
        return pi.probabilities @ bits

    def evolve(self, t: float) -> StateVector:
        return evolve_continuous(self.initial, self.generator, t)


def exact_state_chain(
    g: Graph, rate: float, seeds, limit: int = DEFAULT_STATE_LIMIT
) -> ExactChain:
    """Generator over damage configurations ``S`` containing the seeds.

    ``S -> S + {v}`` happens at ``rate * |edges between v and S|``.
    """
    if g.n > limit:
        raise ValueError(f"exact chain limited to {limit} vertices, graph has {g.n}")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    seed_set = sorted({_check_vertex(g, s) for s in seeds})
    if not seed_set and g.n:
        raise ValueError("seed set must be non-empty")
    seed_mask = sum(1 << s for s in seed_set)
    free = [v for v in range(g.n) if not seed_mask >> v & 1]
    states = []
    for bits in range(1 << len(free)):
        mask = seed_mask
        for i, v in enumerate(free):
            if bits >> i & 1:
                mask |= 1 << v
        states.append(mask)
    states.sort()
    index = {s: i for i, s in enumerate(states)}
    nbr_masks = [sum(1 << w for w in g.neighbors(v)) for v in range(g.n)]
    q = np.zeros((len(states), len(states)))
    for i, s in enumerate(states):
        for v in free:
            if s >> v & 1:
                continue
            links = bin(nbr_masks[v] & s).count("1")
            if links:
                q[i, index[s | 1 << v]] = rate * links
        q[i, i] = -q[i].sum()
    pi0 = np.zeros(len(states))
    pi0[index[seed_mask]] = 1.0
    return ExactChain(g.n, np.array(states, dtype=np.int64), RateMatrix(q), StateVector(pi0))


# --- stochastic simulation ---------------------------------------------------

@dataclass(frozen=True)
class EpidemicOutcome:
    trials: int
    times: tuple[float, ...]
    vertex_probabilities: np.ndarray  # (len(times), n)
    standard_errors: np.ndarray
    intact_edges: np.ndarray | None = None  # mean count of edges with no damaged end

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "times": list(self.times),
            "vertex_probabilities": self.vertex_probabilities.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "intact_edges": None if self.intact_edges is None else self.intact_edges.tolist(),
        }

    def csv_rows(self) -> list[tuple[float, int, float, float]]:
        rows = []
        for ti, t in enumerate(self.times):
            for v in range(self.vertex_probabilities.shape[1]):
                rows.append((t, v, float(self.vertex_probabilities[ti, v]),
                             float(self.standard_errors[ti, v])))
        return rows


def _edge_rates(g: Graph, rate) -> np.ndarray:
    if isinstance(rate, Mapping):
        out = np.empty(g.m)
        for i, (u, v) in enumerate(g.edges):
            r = rate.get((u, v), rate.get((v, u)))
            if r is None:
                raise ValueError(f"no rate given for edge ({u}, {v})")
            out[i] = r
    else:
        out = np.full(g.m, float(rate))
    if np.any(~np.isfinite(out)) or np.any(out < 0):
        raise ValueError("rates must be finite and non-negative")
    return out


def _adjacent_edges(g: Graph) -> list[list[tuple[int, int]]]:
    inc: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for i, (u, v) in enumerate(g.edges):
        inc[u].append((v, i))
        inc[v].append((u, i))
    return inc


def si_damage_times(
    g: Graph, rates: np.ndarray, seeds: Sequence[int], horizon: float, rng
) -> np.ndarray:
    """One event-driven SI trajectory; returns each vertex's damage time.

    Every edge carries one exponential clock, started when its first
    endpoint is damaged. The clock is drawn up front (one standard
    exponential per edge, scaled by ``1/rate``) so draws do not depend on
    event order. Vertices undamaged by ``horizon`` get ``inf``.
    """
    with np.errstate(divide="ignore"):
        delays = rng.standard_exponential(g.m) / rates
    inc = _adjacent_edges(g)
    times = np.full(g.n, UNREACHABLE)
    queue = [(0.0, s) for s in seeds]
    while queue:
        t, u = heapq.heappop(queue)
        if times[u] != UNREACHABLE:
            continue
        times[u] = t
        for w, e in inc[u]:
            if times[w] == UNREACHABLE:
                tw = t + delays[e]
                if tw <= horizon:
                    heapq.heappush(queue, (tw, w))
    return times


def simulate_epidemic(
    g: Graph,
    rate,
    seeds,
    horizon: float,
    sample_times: Sequence[float],
    trials: int,
    rng_seed: int = 0,
    workers: int = 1,
) -> EpidemicOutcome:
    """Monte-Carlo SI damage probabilities per vertex at ``sample_times``.

    Trial ``i`` draws from its own stream seeded ``(rng_seed, i)``, so any
    single trial is the same whatever ``trials`` or ``workers`` are.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed_list = sorted({_check_vertex(g, s) for s in seeds})
    if not seed_list:
        raise ValueError("seed set must be non-empty")
    times = tuple(float(t) for t in sample_times)
    if any(t < 0 or t > horizon for t in times):
        raise ValueError("sample times must lie in [0, horizon]")
    rates = _edge_rates(g, rate)

    def run(i: int) -> np.ndarray:
        rng = np.random.default_rng([rng_seed, i])
        return si_damage_times(g, rates, seed_list, horizon, rng)

    damage = np.array(ordered_map(run, range(trials), workers)).reshape(trials, g.n)
    probs = np.array([(damage <= t).mean(axis=0) for t in times]).reshape(len(times), g.n)
    stderr = np.sqrt(probs * (1.0 - probs) / trials)
    intact = np.zeros(len(times))
    if g.m:
        ends = np.array(g.edges)
        first_hit = np.minimum(damage[:, ends[:, 0]], damage[:, ends[:, 1]])
        intact = np.array([(first_hit > t).sum(axis=1).mean() for t in times])
    return EpidemicOutcome(trials, times, probs, stderr, intact)


def exact_vertex_probabilities(g: Graph, rate: float, seeds, sample_times) -> np.ndarray:
    """Per-vertex damage probabilities from the exact chain, ``(len(times), n)``."""
    chain = exact_state_chain(g, rate, seeds)
    probs = np.array([chain.vertex_probabilities(chain.evolve(t)) for t in sample_times])
    return np.clip(probs, 0.0, 1.0).reshape(len(sample_times), g.n)


def exact_intact_edges(g: Graph, rate: float, seeds, sample_times) -> np.ndarray:
    """Expected number of edges with neither end damaged, from the exact chain."""
    chain = exact_state_chain(g, rate, seeds)
    intact = np.zeros(len(chain.states))
    for u, v in g.edges:
        intact += ((chain.states >> u) & 1 | (chain.states >> v) & 1) == 0
    return np.array([float(chain.evolve(t).probabilities @ intact) for t in sample_times])
