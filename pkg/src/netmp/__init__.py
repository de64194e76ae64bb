"""Message passing (cavity method) computations on sparse undirected networks.

Percolation, the zero-field Ising model, adjacency spectral density, and
stochastic-block-model community detection, all driven by per-directed-edge
message fixed points; phase-transition locations via the non-backtracking
matrix; a loopy extension built on primitive-cycle neighborhoods; and
independent brute-force oracles used to verify everything.
"""

__version__ = "0.1.0"

from netmp.engine import FixedPointConfig, IterationReport, MessageField
from netmp.graph import Graph, components, edge_list_text, load_edge_list
from netmp.halfedge import HalfEdgeIndex, nb_apply, nb_leading_eigenvalue

__all__ = [
    "__version__",
    "FixedPointConfig",
    "IterationReport",
    "MessageField",
    "Graph",
    "HalfEdgeIndex",
    "components",
    "edge_list_text",
    "load_edge_list",
    "nb_apply",
    "nb_leading_eigenvalue",
]
