"""Destruction scenarios for large networks.

Deterministic cascades through adjacency-matrix powers, probabilistic
damage through Markov chains, random-graph connectivity experiments and a
random frontal layer for reliability reinforcement.
"""

from netfail.graph_core import Graph, UNREACHABLE

__version__ = "0.1.0"

__all__ = ["Graph", "UNREACHABLE", "__version__"]
