"""Belief propagation for the zero-field Ising model (coupling J = 1).

Messages are normalized pairs (P[up], P[down]) per directed edge.  The
update multiplies, over the sender's other incident edges, the terms

    t_r = e^(beta r) mu_up + e^(-beta r) mu_down,   r = +-1.

Products run in the linear domain while exp(beta * max_degree) is safely
representable and switch to a log-domain evaluation otherwise, so large
beta (up to several hundred) cannot overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netmp import kernels
from netmp.engine import BaseRule, FixedPointConfig, IterationReport, iterate
from netmp.graph import Graph
from netmp.halfedge import HalfEdgeIndex, nb_leading_eigenvalue
from netmp.results import SweepResult

# switch to log-domain products once exp could overflow along a node block
_LINEAR_DOMAIN_LIMIT = 600.0


@dataclass(frozen=True)
class IsingParams:
    beta: float  # inverse temperature, >= 0

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


@dataclass(frozen=True)
class IsingPartition:
    """Partition-function readouts from a converged message field.

    `log_z` is the per-node/per-edge (Bethe) combination of the node and
    pair normalizers; it is exact on trees.  `log_z_anchored` is the local
    single-node product form, kept as a diagnostic; on graphs with more than
    one node it is generally only an approximation.
    """

    log_z: float
    log_z_anchored: float
    free_energy: float | None          # -log_z / beta; None at beta = 0
    free_energy_per_node: float | None


@dataclass(frozen=True)
class IsingResult:
    messages: np.ndarray               # (2m, 2) converged message pairs
    marginals: np.ndarray              # (n, 2): P[s=+1], P[s=-1]
    magnetization_per_node: np.ndarray
    magnetization: float
    node_norms: np.ndarray             # (n,)
    edge_norms: np.ndarray             # (2m,)
    partition: IsingPartition
    report: IterationReport

    @property
    def log_z(self) -> float:
        return self.partition.log_z

    @property
    def free_energy(self) -> float | None:
        return self.partition.free_energy


class IsingRule(BaseRule):
    kind = "pair"

    def __init__(self, index: HalfEdgeIndex, beta: float):
        self.index = index
        self.beta = float(beta)
        max_deg = int(np.diff(index.offsets).max()) if index.graph.n else 0
        self.log_domain = beta * max(max_deg, 1) > _LINEAR_DOMAIN_LIMIT

    def sweep(self, values: np.ndarray) -> np.ndarray:
        return kernels.ising_sweep(
            self.index.offsets, self.index.rev, values, self.beta, self.log_domain
        )

    def update_edge(self, values: np.ndarray, e: int) -> np.ndarray:
        succ = self.index.successors(e)
        eb, emb = np.exp(self.beta), np.exp(-self.beta)
        up = np.prod(eb * values[succ, 0] + emb * values[succ, 1])
        down = np.prod(emb * values[succ, 0] + eb * values[succ, 1])
        return np.array([up, down]) / (up + down)


def _initial_pairs(index: HalfEdgeIndex, config: FixedPointConfig) -> np.ndarray:
    init = config.init or "random"
    if init == "random":
        up = config.rng().random(index.n_edges)
        return np.column_stack([up, 1.0 - up])
    if init in ("uniform-simplex", "half"):
        return np.full((index.n_edges, 2), 0.5)
    if init == "tilt":
        # deterministic symmetry breaking toward all-up; reproducible branch
        # selection for magnetization sweeps
        return np.tile([0.51, 0.49], (index.n_edges, 1))
    raise ValueError(f"unsupported init {init!r} for pair messages")


def ising_messages(
    graph: Graph,
    params: IsingParams,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, IterationReport]:
    """Iterate the spin messages to a fixed point.

    Default init is seeded-random pairs so that below the critical
    temperature the iteration can break the up-down symmetry.
    """
    config = config or FixedPointConfig()
    index = index or HalfEdgeIndex(graph)
    rule = IsingRule(index, params.beta)
    if initial is None:
        initial = _initial_pairs(index, config)
    return iterate(rule, initial, config)


def _log_terms(messages: np.ndarray, beta: float) -> np.ndarray:
    """log t_r per directed edge, stable for any beta."""
    with np.errstate(divide="ignore"):
        lm = np.log(messages)
    out = np.empty_like(messages)
    out[:, 0] = np.logaddexp(beta + lm[:, 0], -beta + lm[:, 1])
    out[:, 1] = np.logaddexp(-beta + lm[:, 0], beta + lm[:, 1])
    return out


def ising_marginals(
    graph: Graph,
    messages: np.ndarray,
    params: IsingParams,
    index: HalfEdgeIndex | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Node marginals and node normalizers Z_i from converged messages."""
    index = index or HalfEdgeIndex(graph)
    lt = _log_terms(messages, params.beta)
    node_log = kernels.seg_sum(index.offsets, lt)              # (n, 2)
    top = node_log.max(axis=1, keepdims=True)
    w = np.exp(node_log - top)
    z_node_log = np.log(w.sum(axis=1)) + top[:, 0]
    marginals = w / w.sum(axis=1, keepdims=True)
    with np.errstate(over="ignore"):  # raw Z_i may overflow to inf at extreme beta
        z_node = np.exp(z_node_log)
    return marginals, z_node


def _log_node_edge_norms(
    index: HalfEdgeIndex, messages: np.ndarray, beta: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(log Z_i, log Z_{i<-j}, log W_ij per directed edge)."""
    lt = _log_terms(messages, beta)
    node_log = kernels.seg_sum(index.offsets, lt)
    log_zi = np.logaddexp(node_log[:, 0], node_log[:, 1])
    counts = np.diff(index.offsets)
    excl = (np.repeat(node_log, counts, axis=0) - lt)[index.rev]
    log_z_edge = np.logaddexp(excl[:, 0], excl[:, 1])
    a, b = messages, messages[index.rev]
    with np.errstate(divide="ignore"):
        same = np.log(a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1])
        cross = np.log(a[:, 0] * b[:, 1] + a[:, 1] * b[:, 0])
    log_w = np.logaddexp(beta + same, -beta + cross)
    return log_zi, log_z_edge, log_w


def ising_partition_function(
    graph: Graph,
    messages: np.ndarray,
    node_norms: np.ndarray,
    params: IsingParams,
    index: HalfEdgeIndex | None = None,
) -> IsingPartition:
    """Partition function and free energy from converged messages.

    log_z combines one node normalizer per node with one pair normalizer per
    undirected edge (subtracted); on trees that reproduces the exact log Z.
    The single-anchor product Z_0 * prod Z_{0<-j} is also reported.
    """
    del node_norms  # recomputed in log form for stability
    index = index or HalfEdgeIndex(graph)
    beta = params.beta
    log_zi, log_z_edge, log_w = _log_node_edge_norms(index, messages, beta)
    first = np.arange(index.n_edges) < index.rev
    log_z = float(log_zi.sum() - log_w[first].sum())
    anchor_block = slice(index.offsets[0], index.offsets[1]) if graph.n else slice(0, 0)
    log_z_anchored = float(log_zi[0] + log_z_edge[anchor_block].sum()) if graph.n else 0.0
    if beta > 0:
        f = -log_z / beta
        return IsingPartition(log_z, log_z_anchored, f, f / graph.n if graph.n else None)
    return IsingPartition(log_z, log_z_anchored, None, None)


def solve_ising(
    graph: Graph,
    params: IsingParams,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> IsingResult:
    """Messages, marginals, magnetization, and partition function in one call."""
    index = index or HalfEdgeIndex(graph)
    messages, report = ising_messages(graph, params, config, index=index, initial=initial)
    marginals, z_node = ising_marginals(graph, messages, params, index=index)
    _, log_z_edge, _ = _log_node_edge_norms(index, messages, params.beta)
    partition = ising_partition_function(graph, messages, z_node, params, index=index)
    with np.errstate(over="ignore"):
        edge_norms = np.exp(log_z_edge)
    m_node = marginals[:, 0] - marginals[:, 1]
    return IsingResult(
        messages=messages,
        marginals=marginals,
        magnetization_per_node=m_node,
        magnetization=float(m_node.mean()) if graph.n else 0.0,
        node_norms=z_node,
        edge_norms=edge_norms,
        partition=partition,
        report=report,
    )


@dataclass(frozen=True)
class CriticalTemperature:
    """Ferromagnetic transition point from lambda * tanh(beta_c) = 1."""

    leading_eigenvalue: float
    beta_c: float  # inf marks "no transition" (lambda <= 1)
    t_c: float     # 0 when there is no finite transition

    @property
    def has_transition(self) -> bool:
        return np.isfinite(self.beta_c)


def ising_critical_temperature(
    graph: Graph, tol: float = 1e-10, max_iter: int = 100_000
) -> CriticalTemperature:
    """beta_c = arctanh(1 / lambda); lambda <= 1 has no finite transition."""
    lam = nb_leading_eigenvalue(HalfEdgeIndex(graph), tol=tol, max_iter=max_iter)
    if lam <= 1.0:
        return CriticalTemperature(lam, np.inf, 0.0)
    beta_c = float(np.arctanh(1.0 / lam))
    return CriticalTemperature(lam, beta_c, 1.0 / beta_c)


def sweep_magnetization(
    graph: Graph,
    t_grid: np.ndarray,
    config: FixedPointConfig | None = None,
) -> SweepResult:
    """|m|(T) over an ascending temperature grid, tracking the broken branch.

    The first (coldest) point starts from the deterministic all-up tilt;
    subsequent points warm-start from the previous fixed point so the sweep
    follows one symmetry-broken branch up to the transition.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if (t_grid <= 0).any():
        raise ValueError("temperatures must be positive")
    if (np.diff(t_grid) < 0).any():
        raise ValueError("temperature grid must be ascending (sweep low T upward)")
    config = config or FixedPointConfig(init="tilt")
    index = HalfEdgeIndex(graph)
    values = []
    reports = []
    prev: np.ndarray | None = None
    for t in t_grid:
        params = IsingParams(1.0 / float(t))
        res = solve_ising(graph, params, config, index=index, initial=prev)
        prev = res.messages
        values.append(abs(res.magnetization))
        reports.append(res.report)
    return SweepResult(
        parameter="T",
        grid=t_grid,
        values=np.asarray(values),
        reports=reports,
        value_name="abs_m",
    )
