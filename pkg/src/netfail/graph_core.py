"""Undirected simple graphs, traversal oracles and graph transformations."""

from __future__ import annotations

import json
import math
from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

#: Distance/time sentinel for vertices that are never reached.
UNREACHABLE = math.inf


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed."""


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    The sorted edge tuple is the source of truth; the adjacency matrix is
    materialised on demand.
    """

    __slots__ = ("_n", "_edges", "_neighbors")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            seen.add((u, v) if u < v else (v, u))
        self._n = n
        self._edges = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self._edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self._neighbors = tuple(tuple(sorted(x)) for x in nbrs)

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(u, v)`` with ``u < v``, sorted lexicographically."""
        return self._edges

    @property
    def m(self) -> int:
        return len(self._edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._neighbors[v]

    def degree(self, v: int) -> int:
        return len(self._neighbors[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbors[u]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={list(self._edges)})"


def from_edge_list(n: int, pairs: Iterable[tuple[int, int]]) -> Graph:
    """Build a graph, collapsing duplicate and reversed pairs."""
    return Graph(n, pairs)


def empty_graph(n: int) -> Graph:
    return Graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(leaves: int) -> Graph:
    """Star with centre 0 and ``leaves`` leaves."""
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def wheel_graph(rim: int) -> Graph:
    """Hub 0 joined to every vertex of a ``rim``-cycle on ``1..rim``."""
    if rim < 3:
        raise ValueError("a wheel needs a rim of at least 3 vertices")
    ring = [(1 + i, 1 + (i + 1) % rim) for i in range(rim)]
    spokes = [(0, i) for i in range(1, rim + 1)]
    return Graph(rim + 1, ring + spokes)


def adjacency_matrix(g: Graph, dtype=np.int64) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=dtype)
    if g.m:
        e = np.asarray(g.edges)
        a[e[:, 0], e[:, 1]] = 1
        a[e[:, 1], e[:, 0]] = 1
    return a


def _check_vertex(g: Graph, v: int) -> int:
    v = int(v)
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for n={g.n}")
    return v


def bfs_distances(g: Graph, source: int) -> list[float]:
    """Hop distances from ``source``; unreachable vertices get ``UNREACHABLE``."""
    return multi_source_distances(g, [source])


def multi_source_distances(g: Graph, sources: Iterable[int]) -> list[float]:
    dist: list[float] = [UNREACHABLE] * g.n
    queue: deque[int] = deque()
    for s in sources:
        s = _check_vertex(g, s)
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in g._neighbors[u]:
            if dist[w] == UNREACHABLE:
                dist[w] = du
                queue.append(w)
    return dist


def eccentricity(g: Graph, v: int) -> float:
    return max(bfs_distances(g, v))


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted vertex lists, ordered by smallest member."""
    label = [-1] * g.n
    comps: list[list[int]] = []
    for s in range(g.n):
        if label[s] >= 0:
            continue
        label[s] = len(comps)
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g._neighbors[u]:
                if label[w] < 0:
                    label[w] = label[s]
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_connected(g: Graph) -> bool:
    """True iff a single component covers every vertex.

    By convention the graphs with zero or one vertex are connected.
    """
    if g.n <= 1:
        return True
    return len(connected_components(g)) == 1


def add_super_source(g: Graph, seeds: Iterable[int]) -> tuple[Graph, int]:
    """Attach a new vertex ``n`` adjacent to exactly the seed vertices."""
    seeds = sorted({_check_vertex(g, s) for s in seeds})
    if not seeds:
        raise ValueError("seed set must be non-empty")
    new = g.n
    return Graph(g.n + 1, list(g.edges) + [(s, new) for s in seeds]), new


def line_graph(g: Graph) -> Graph:
    """Vertex ``i`` of the result is ``g.edges[i]``; adjacency = shared endpoint."""
    incident: list[list[int]] = [[] for _ in range(g.n)]
    for idx, (u, v) in enumerate(g.edges):
        incident[u].append(idx)
        incident[v].append(idx)
    pairs = []
    for inc in incident:
        for a in range(len(inc)):
            for b in range(a + 1, len(inc)):
                pairs.append((inc[a], inc[b]))
    return Graph(g.m, pairs)


def induced_subgraph(g: Graph, vertices: Sequence[int]) -> tuple[Graph, list[int]]:
    """Subgraph on ``vertices`` relabelled ``0..k-1`` in the given order.

    Returns the subgraph and the list mapping new index -> original vertex.
    """
    keep = [int(v) for v in vertices]
    index = {v: i for i, v in enumerate(keep)}
    pairs = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return Graph(len(keep), pairs), keep


# --- file formats -----------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """Parse ``n <count>`` followed by ``u v`` lines; ``#`` starts a comment."""
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise GraphFormatError(f"line {lineno}: expected 'n <count>' header")
            n = _parse_int(parts[1], lineno)
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v'")
        pairs.append((_parse_int(parts[0], lineno), _parse_int(parts[1], lineno)))
    if n is None:
        raise GraphFormatError("missing 'n <count>' header")
    try:
        return Graph(n, pairs)
    except (IndexError, ValueError) as exc:
        raise GraphFormatError(str(exc)) from exc


def _parse_int(token: str, lineno: int) -> int:
    try:
        value = int(token, 10)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: not an integer: {token!r}") from None
    if value < 0:
        raise GraphFormatError(f"line {lineno}: negative index {value}")
    return value


def parse_json_graph(text: str) -> Graph:
    try:
        doc = json.loads(text)
        n = doc["n"]
        edges = doc["edges"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphFormatError(f"invalid JSON graph: {exc}") from exc
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphFormatError("'n' must be an integer")
    try:
        return Graph(n, [(int(u), int(v)) for u, v in edges])
    except (IndexError, ValueError, TypeError) as exc:
        raise GraphFormatError(str(exc)) from exc


def read_graph(path: str | Path) -> Graph:
    """Read a graph in edge-list or JSON format (JSON detected by content)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return parse_json_graph(text)
    return parse_edge_list(text)


def to_edge_list_text(g: Graph) -> str:
    lines = [f"n {g.n}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def to_json_dict(g: Graph) -> dict:
    return {"n": g.n, "edges": [[u, v] for u, v in g.edges]}
