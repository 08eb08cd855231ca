"""Protection planning on spanning trees.

Under threat the network falls back to a spanning tree. Each tree ``k`` has a
centre minimising the worst-case damage time ``t^k = min_i max_j t_ij^k``; the
plan picks the tree with the largest ``t^k`` and protects its centre.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from netfail._parallel import ordered_map
from netfail.cascade import DisconnectedGraphError, max_damage_time, min_damage_time
from netfail.graph_core import (
    UNREACHABLE,
    Graph,
    _check_vertex,
    bfs_distances,
    connected_components,
    induced_subgraph,
    is_connected,
)

DEFAULT_TREE_CAP = 100_000


class TreeCapExceeded(RuntimeError):
    """More spanning trees than the enumeration cap allows."""


@dataclass(frozen=True)
class SpanningTree:
    tree: Graph
    index: int
    pairwise_times: np.ndarray = field(repr=False)
    radius: int
    center: int

    @classmethod
    def from_edges(cls, n: int, edges, index: int = 0) -> "SpanningTree":
        tree = Graph(n, edges)
        times = np.array([bfs_distances(tree, v) for v in range(n)], dtype=float)
        if tree.m != n - 1 or not np.all(np.isfinite(times)):
            raise ValueError("edges do not form a spanning tree")
        times = times.astype(np.int64)
        ecc = times.max(axis=1)
        center = int(np.argmin(ecc))
        return cls(tree, index, times, int(ecc[center]), center)


@dataclass(frozen=True)
class ProtectionPlan:
    chosen_tree: SpanningTree
    t_tilde: int
    protected_vertex: int
    mode: str
    trees_examined: int

    @property
    def lower_bound(self) -> bool:
        """Sampled plans only bound the true maximum from below."""
        return self.mode == "sampled"

    def to_json(self) -> dict:
        return {
            "t_tilde": self.t_tilde,
            "center": self.protected_vertex,
            "tree_edges": [[u, v] for u, v in self.chosen_tree.tree.edges],
            "mode": self.mode,
            "trees_examined": self.trees_examined,
            "lower_bound": self.lower_bound,
        }


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise DisconnectedGraphError("graph is disconnected and has no spanning tree")


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x


def _connects(n: int, edges) -> bool:
    dsu = _DSU(n)
    parts = n
    for u, v in edges:
        ru, rv = dsu.find(u), dsu.find(v)
        if ru != rv:
            dsu.parent[ru] = rv
            parts -= 1
    return parts <= 1


def iter_spanning_tree_edges(g: Graph) -> Iterator[tuple[tuple[int, int], ...]]:
    """Spanning-tree edge sets in lexicographic order of their sorted edges.

    Backtracks over ``g.edges`` trying inclusion before exclusion; an
    exclusion branch is cut as soon as the remaining edges cannot span.
    """
    n, edges = g.n, g.edges
    if n <= 1:
        yield ()
        return
    chosen: list[tuple[int, int]] = []

    def rec(i: int, comp: list[int]) -> Iterator[tuple[tuple[int, int], ...]]:
        if len(chosen) == n - 1:
            yield tuple(chosen)
            return
        if len(chosen) + (len(edges) - i) < n - 1:
            return
        if not _connects(n, chosen + list(edges[i:])):
            return
        u, v = edges[i]
        cu, cv = comp[u], comp[v]
        if cu != cv:
            merged = [cu if c == cv else c for c in comp]
            chosen.append(edges[i])
            yield from rec(i + 1, merged)
            chosen.pop()
        yield from rec(i + 1, comp)

    yield from rec(0, list(range(n)))


def enumerate_spanning_trees(g: Graph, cap: int = DEFAULT_TREE_CAP) -> list[SpanningTree]:
    _require_connected(g)
    trees = []
    for k, edges in enumerate(iter_spanning_tree_edges(g)):
        if k >= cap:
            raise TreeCapExceeded(f"more than {cap} spanning trees")
        trees.append(SpanningTree.from_edges(g.n, edges, k))
    return trees


def _bareiss_det(m: list[list[int]]) -> int:
    a = [row[:] for row in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def count_spanning_trees(g: Graph) -> int:
    """Kirchhoff count: determinant of the Laplacian with row/column 0 removed.

    The float determinant is rounded when it is small enough to be exact
    and its rounding residual is below 1e-6 relative; otherwise the count
    is recomputed exactly with fraction-free elimination.
    """
    _require_connected(g)
    if g.n < 2:
        return 1
    lap = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.edges:
        lap[u, v] = lap[v, u] = -1
        lap[u, u] += 1
        lap[v, v] += 1
    minor = lap[1:, 1:]
    det = float(np.linalg.det(minor.astype(float)))
    rounded = round(det)
    if abs(det) < 2.0**50 and abs(det - rounded) <= 1e-6 * max(1.0, abs(det)):
        return int(rounded)
    return _bareiss_det(minor.tolist())


def random_spanning_tree(g: Graph, rng_seed: int = 0, index: int = 0) -> SpanningTree:
    """Uniform spanning tree by Wilson's loop-erased random walks, rooted at 0."""
    _require_connected(g)
    n = g.n
    rng = np.random.default_rng(rng_seed)
    in_tree = [False] * n
    nxt = [-1] * n
    if n:
        in_tree[0] = True
    for start in range(n):
        u = start
        while not in_tree[u]:
            nbrs = g.neighbors(u)
            nxt[u] = nbrs[int(rng.integers(len(nbrs)))]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    edges = [(v, nxt[v]) for v in range(1, n)]
    return SpanningTree.from_edges(n, edges, index)


def tree_minimax_time(tree: SpanningTree) -> tuple[int, int]:
    """``(t_k, centre)`` for a tree: its radius and lowest-index centre."""
    ecc = tree.pairwise_times.max(axis=1)
    center = int(np.argmin(ecc))
    return int(ecc[center]), center


def _best(trees: list[SpanningTree]) -> SpanningTree:
    # highest radius, earliest index on ties
    return min(trees, key=lambda tr: (-tr.radius, tr.index))


def select_protection_tree(
    g: Graph,
    mode: str = "exact",
    budget: int = DEFAULT_TREE_CAP,
    rng_seed: int = 0,
    workers: int = 1,
) -> ProtectionPlan:
    """Pick the spanning tree with the largest radius and its centre.

    ``exact`` scans every spanning tree and fails beyond ``budget``;
    ``sampled`` draws ``budget`` uniform trees (tree ``i`` from seed
    ``(rng_seed, i)``) and the resulting ``t_tilde`` is a lower bound.
    """
    _require_connected(g)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if mode == "exact":
        trees = enumerate_spanning_trees(g, cap=budget)
    elif mode == "sampled":
        trees = ordered_map(
            lambda i: random_spanning_tree(g, [rng_seed, i], index=i), range(budget), workers
        )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    best = _best(trees)
    return ProtectionPlan(best, best.radius, best.center, mode, len(trees))


def protect_vertex(g: Graph, v: int) -> tuple[Graph, list[int]]:
    """Remove ``v`` and its edges; returns the graph and new->old index map."""
    v = _check_vertex(g, v)
    return induced_subgraph(g, [u for u in range(g.n) if u != v])


@dataclass(frozen=True)
class ComponentDamage:
    vertices: tuple[int, ...]  # original ids
    t_min: int
    argmin: int  # original id
    t_max: int
    argmax: int


@dataclass(frozen=True)
class ProtectionImpact:
    protected: int
    t_min_before: float
    t_max_before: float
    t_min_after: float  # UNREACHABLE when the remainder is disconnected
    t_max_after: float
    disconnected_after: bool
    components: tuple[ComponentDamage, ...]

    def to_json(self) -> dict:
        def num(x):
            return None if x == UNREACHABLE else int(x)

        return {
            "protected": self.protected,
            "t_min_before": num(self.t_min_before),
            "t_max_before": num(self.t_max_before),
            "t_min_after": num(self.t_min_after),
            "t_max_after": num(self.t_max_after),
            "disconnected_after": self.disconnected_after,
            "components": [
                {
                    "vertices": list(c.vertices),
                    "t_min": c.t_min,
                    "argmin": c.argmin,
                    "t_max": c.t_max,
                    "argmax": c.argmax,
                }
                for c in self.components
            ],
        }


def _extremes(g: Graph) -> tuple[float, float]:
    if g.n == 0 or not is_connected(g):
        return UNREACHABLE, UNREACHABLE
    return min_damage_time(g)[0], max_damage_time(g)[0]


def protection_impact(g: Graph, v: int) -> ProtectionImpact:
    """Cascade metrics before and after taking ``v`` out of the network."""
    rest, mapping = protect_vertex(g, v)
    before = _extremes(g)
    after = _extremes(rest)
    comps = []
    for comp in connected_components(rest):
        sub, keep = induced_subgraph(rest, comp)
        tmin, amin = min_damage_time(sub)
        tmax, amax = max_damage_time(sub)
        comps.append(
            ComponentDamage(
                tuple(mapping[keep[i]] for i in range(len(keep))),
                tmin, mapping[keep[amin]], tmax, mapping[keep[amax]],
            )
        )
    disconnected = rest.n > 1 and len(comps) > 1
    return ProtectionImpact(v, before[0], before[1], after[0], after[1], disconnected, tuple(comps))
