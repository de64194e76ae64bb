"""Giant-component and edge-percolation message passing.

The message on directed edge (i <- j) is the probability that j is not in
the giant cluster once i is removed; node i's probability multiplies the
incoming messages.  The occupation-probability update is

    mu[i<-j] = prod over k in N(j), k != i of (1 - p + p * mu[j<-k])

and the all-ones field is always an exact fixed point.  Starting from zeros
the update is monotone, so iteration converges to the smallest fixed point,
which is the physical giant-cluster solution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netmp import kernels
from netmp.engine import BaseRule, FixedPointConfig, IterationReport, iterate
from netmp.graph import Graph
from netmp.halfedge import HalfEdgeIndex, nb_leading_eigenvalue
from netmp.results import SweepResult


@dataclass(frozen=True)
class PercolationResult:
    """Converged percolation state at one occupation probability."""

    p: float
    node_probabilities: np.ndarray  # per-node probability of NOT being in the giant cluster
    giant_cluster_fraction: float
    report: IterationReport


@dataclass(frozen=True)
class ThresholdResult:
    """Percolation threshold p_c = 1 / lambda from the non-backtracking matrix."""

    leading_eigenvalue: float
    p_c: float

    @property
    def has_transition(self) -> bool:
        return np.isfinite(self.p_c)


class PercolationRule(BaseRule):
    kind = "scalar"

    def __init__(self, index: HalfEdgeIndex, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"occupation probability must be in [0, 1], got {p}")
        self.index = index
        self.p = float(p)

    def sweep(self, values: np.ndarray) -> np.ndarray:
        return kernels.percolation_sweep(
            self.index.offsets, self.index.rev, values, self.p
        )

    def update_edge(self, values: np.ndarray, e: int) -> float:
        succ = self.index.successors(e)
        return float(np.prod(1.0 - self.p + self.p * values[succ]))


def _initial_scalar(index: HalfEdgeIndex, config: FixedPointConfig, default: str) -> np.ndarray:
    init = config.init or default
    if init == "zeros":
        return np.zeros(index.n_edges)
    if init == "ones":
        return np.ones(index.n_edges)
    if init == "random":
        return config.rng().random(index.n_edges)
    raise ValueError(f"unsupported init {init!r} for scalar messages")


def percolation_messages(
    graph: Graph,
    p: float,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, IterationReport]:
    """Solve the edge-percolation messages at occupation probability p.

    Default init is all-zeros; pass init="random" in the config for the
    random start used in the giant-component variant, or `initial` for a
    warm start.
    """
    config = config or FixedPointConfig()
    index = index or HalfEdgeIndex(graph)
    rule = PercolationRule(index, p)
    if initial is None:
        initial = _initial_scalar(index, config, "zeros")
    return iterate(rule, initial, config)


def giant_component_messages(
    graph: Graph,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
) -> tuple[np.ndarray, IterationReport]:
    """0/1 giant-component messages (percolation at p = 1, random init).

    On a component whose 2-core is a single cycle the update permutes
    messages and does not contract; the report then comes back unconverged.
    `netmp.graph.components` is the exact alternative.
    """
    config = config or FixedPointConfig()
    index = index or HalfEdgeIndex(graph)
    rule = PercolationRule(index, 1.0)
    initial = _initial_scalar(index, config, "random")
    return iterate(rule, initial, config)


def percolation_node_probabilities(
    graph: Graph, messages: np.ndarray, p: float,
    index: HalfEdgeIndex | None = None,
) -> np.ndarray:
    """Per-node probability of not being in the giant cluster (isolated: 1)."""
    index = index or HalfEdgeIndex(graph)
    vals = 1.0 - p + p * np.asarray(messages)
    return kernels.seg_prod(index.offsets, vals)


def giant_component_membership(
    graph: Graph,
    config: FixedPointConfig | None = None,
) -> tuple[np.ndarray, np.ndarray, IterationReport]:
    """Flag nodes in the giant component via the 0/1 message fixed point.

    Returns (in_giant, node_values, report); a node is flagged when its
    converged probability of being outside drops below 0.5 (exact values are
    0 or 1, floats need a cut).
    """
    index = HalfEdgeIndex(graph)
    messages, report = giant_component_messages(graph, config, index=index)
    node = percolation_node_probabilities(graph, messages, 1.0, index=index)
    return node < 0.5, node, report


def giant_cluster_size(node_probabilities: np.ndarray) -> float:
    """Expected giant-cluster fraction S = 1 - mean(mu_i)."""
    node_probabilities = np.asarray(node_probabilities)
    if node_probabilities.shape[0] == 0:
        raise ValueError("graph has no nodes")
    return float(1.0 - node_probabilities.mean())


def solve_percolation(
    graph: Graph,
    p: float,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> PercolationResult:
    """Messages, node probabilities, and S in one call."""
    index = index or HalfEdgeIndex(graph)
    messages, report = percolation_messages(graph, p, config, index=index, initial=initial)
    node = percolation_node_probabilities(graph, messages, p, index=index)
    return PercolationResult(p, node, giant_cluster_size(node), report)


def percolation_threshold(
    graph: Graph, tol: float = 1e-10, max_iter: int = 100_000
) -> ThresholdResult:
    """p_c = 1 / lambda; trees (lambda = 0) get the no-transition marker inf."""
    lam = nb_leading_eigenvalue(HalfEdgeIndex(graph), tol=tol, max_iter=max_iter)
    return ThresholdResult(lam, 1.0 / lam if lam > 0 else np.inf)


#: Warm starts shrink the previous fixed point by this factor.  Reusing it
#: verbatim would pin the sweep to the trivial all-ones fixed point forever
#: once a subcritical point has converged (ones is exactly fixed at every p,
#: so the residual check fires immediately); the kick is large enough for
#: growth away from an unstable fixed point to register against tol.
WARM_START_KICK = 1e-6


def sweep_percolation(
    graph: Graph,
    p_grid: np.ndarray,
    config: FixedPointConfig | None = None,
    warm_start: bool = True,
) -> SweepResult:
    """S(p) over an ascending grid of occupation probabilities."""
    p_grid = np.asarray(p_grid, dtype=np.float64)
    if (np.diff(p_grid) < 0).any():
        raise ValueError("p grid must be ascending")
    if p_grid.shape[0] and (p_grid.min() < 0 or p_grid.max() > 1):
        raise ValueError("grid values must lie in [0, 1]")
    config = config or FixedPointConfig()
    index = HalfEdgeIndex(graph)
    values = []
    reports = []
    prev_messages: np.ndarray | None = None
    for p in p_grid:
        initial = None
        if warm_start and prev_messages is not None:
            initial = prev_messages * (1.0 - WARM_START_KICK)
        messages, report = percolation_messages(
            graph, float(p), config, index=index, initial=initial
        )
        node = percolation_node_probabilities(graph, messages, float(p), index=index)
        values.append(giant_cluster_size(node))
        reports.append(report)
        prev_messages = messages
    return SweepResult(
        parameter="p",
        grid=p_grid,
        values=np.asarray(values),
        reports=reports,
        value_name="S",
    )
