"""Deterministic cascade damage.

Damage spreads one hop per step. Entry ``(i, j)`` of ``C**t`` counts walks
of length ``t``, so the nonzero pattern of ``I + C + ... + C**t`` is the set
of vertices damaged by step ``t`` from each start vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from netfail.graph_core import (
    UNREACHABLE,
    Graph,
    _check_vertex,
    adjacency_matrix,
    is_connected,
    multi_source_distances,
)


class DisconnectedGraphError(ValueError):
    """The operation needs a connected graph."""


@dataclass(frozen=True)
class ReachabilityMatrix:
    t: int
    reach: np.ndarray  # bool, reach[i, j] iff dist(i, j) <= t


@dataclass(frozen=True)
class DamageTimeline:
    seeds: frozenset[int]
    waves: tuple[frozenset[int], ...]
    total_time: float  # UNREACHABLE if some vertex is never damaged

    @property
    def damaged(self) -> frozenset[int]:
        return frozenset().union(*self.waves)

    def csv_rows(self) -> list[tuple[int, int, int, str]]:
        """Rows of ``(step, newly_damaged_count, cumulative_count, vertex_list)``."""
        rows = []
        total = 0
        for step, wave in enumerate(self.waves):
            total += len(wave)
            rows.append((step, len(wave), total, " ".join(map(str, sorted(wave)))))
        return rows


def walk_count_matrix(g: Graph, t: int) -> np.ndarray:
    """Exact walk counts ``C**t`` as an object array of Python ints.

    Counts grow like ``lambda_max**t``; products run in int64 while the
    maximum-degree bound ``d**t`` fits and fall back to arbitrary precision
    otherwise.
    """
    t = int(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    n = g.n
    dmax = max((g.degree(v) for v in range(n)), default=0)
    if dmax <= 1 or t * math.log2(dmax) < 62:
        c = adjacency_matrix(g, dtype=np.int64)
        return np.linalg.matrix_power(c, t).astype(object)
    c = adjacency_matrix(g, dtype=np.int64).astype(object)
    result = np.eye(n, dtype=np.int64).astype(object)
    base = c
    while t:
        if t & 1:
            result = result.dot(base)
        t >>= 1
        if t:
            base = base.dot(base)
    return result


def iter_cumulative(g: Graph):
    """Yield ``ReachabilityMatrix`` for t = 0, 1, 2, ... until saturation.

    The final matrix repeats forever once no new pair is reached, so the
    generator stops after yielding the first fixed point.
    """
    c = adjacency_matrix(g, dtype=bool)
    reach = np.eye(g.n, dtype=bool)
    t = 0
    while True:
        yield ReachabilityMatrix(t, reach)
        nxt = reach | (reach @ c)
        if np.array_equal(nxt, reach):
            return
        reach = nxt
        t += 1


def cumulative_matrix(g: Graph, t: int) -> ReachabilityMatrix:
    """Nonzero pattern of ``T(t) = I + C + ... + C**t`` in the boolean semiring."""
    t = int(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    last = None
    for rm in iter_cumulative(g):
        last = rm
        if rm.t == t:
            return rm
    return ReachabilityMatrix(t, last.reach)


def row_fill_times(g: Graph) -> list[float]:
    """Step at which each row of ``T(t)`` first becomes entirely nonzero."""
    fill: list[float] = [UNREACHABLE] * g.n
    for rm in iter_cumulative(g):
        full = rm.reach.all(axis=1)
        for i in np.flatnonzero(full):
            if fill[i] == UNREACHABLE:
                fill[i] = rm.t
    return fill


def damage_time(g: Graph, source: int) -> float:
    """Steps until every vertex is damaged from ``source``.

    Propagates the single row of ``T(t)`` belonging to ``source``; returns
    ``UNREACHABLE`` when part of the graph is cut off from it.
    """
    source = _check_vertex(g, source)
    c = adjacency_matrix(g, dtype=bool)
    row = np.zeros(g.n, dtype=bool)
    row[source] = True
    t = 0
    while not row.all():
        nxt = row | (row @ c)
        if np.array_equal(nxt, row):
            return UNREACHABLE
        row = nxt
        t += 1
    return t


def _extreme_fill(g: Graph, pick) -> tuple[int, int]:
    if not is_connected(g):
        raise DisconnectedGraphError("final damage time is undefined for a disconnected graph")
    if g.n == 0:
        raise ValueError("empty graph")
    fill = row_fill_times(g)
    value = pick(fill)
    return int(value), fill.index(value)


def min_damage_time(g: Graph) -> tuple[int, int]:
    """``(t_min, vertex)``: the row of ``T(t)`` that fills first.

    Equals the graph radius; ties go to the lowest vertex index.
    """
    return _extreme_fill(g, min)


def max_damage_time(g: Graph) -> tuple[int, int]:
    """``(t_max, vertex)``: the row of ``T(t)`` that fills last (the diameter)."""
    return _extreme_fill(g, max)


def simulate_cascade(g: Graph, seeds) -> DamageTimeline:
    seed_set = frozenset(_check_vertex(g, s) for s in seeds)
    if not seed_set:
        raise ValueError("seed set must be non-empty")
    dist = multi_source_distances(g, seed_set)
    finite = [d for d in dist if d != UNREACHABLE]
    depth = int(max(finite))
    waves: list[set[int]] = [set() for _ in range(depth + 1)]
    for v, d in enumerate(dist):
        if d != UNREACHABLE:
            waves[int(d)].add(v)
    total = UNREACHABLE if len(finite) < g.n else depth
    return DamageTimeline(seed_set, tuple(frozenset(w) for w in waves), total)
