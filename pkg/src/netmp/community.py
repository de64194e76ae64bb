"""Stochastic-block-model belief propagation with known parameters.

Messages and marginals are length-q simplices.  The update for directed
edge (i <- j) multiplies, over the sender's other incident edges, the
mixing terms sum_s omega[r, s] mu_s, times the prior and a "non-edge"
field

    prod over non-neighbors k of j (k != i, j) of (1 - sum_s q_k^s omega[r, s]),

evaluated in log space once per sweep from the current marginals.  The
field runs over non-neighbors so that every other node contributes exactly
one likelihood factor (edge term or non-edge term, never both); with the
marginals standing in for cavity quantities it remains an O(omega)
approximation of the exact posterior on finite graphs, vanishing in the
sparse regime where omega ~ c / n.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from netmp import kernels
from netmp.engine import FixedPointConfig, IterationReport, iterate
from netmp.errors import UpdateDomainError
from netmp.graph import Graph
from netmp.halfedge import HalfEdgeIndex
from netmp.results import SweepResult


@dataclass(frozen=True)
class SBMParams:
    q: int
    priors: np.ndarray   # length-q simplex
    omega: np.ndarray    # symmetric q x q edge probabilities

    def __post_init__(self) -> None:
        priors = np.asarray(self.priors, dtype=np.float64)
        omega = np.asarray(self.omega, dtype=np.float64)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "omega", omega)
        if priors.shape != (self.q,) or (priors < 0).any() or abs(priors.sum() - 1) > 1e-9:
            raise ValueError("priors must be a length-q probability vector")
        if omega.shape != (self.q, self.q) or not np.allclose(omega, omega.T):
            raise ValueError("omega must be symmetric q x q")
        if (omega < 0).any() or (omega > 1).any():
            raise ValueError("omega entries must be probabilities")

    @classmethod
    def planted(cls, n: int, c_in: float, c_out: float, q: int = 2) -> "SBMParams":
        """Sparse planted-partition parameters: omega = c / n, uniform priors."""
        omega = np.full((q, q), c_out / n)
        np.fill_diagonal(omega, c_in / n)
        return cls(q, np.full(q, 1.0 / q), omega)


@dataclass(frozen=True)
class CommunityResult:
    marginals: np.ndarray    # (n, q) simplices
    hard_labels: np.ndarray  # argmax with ties to the lowest group index
    report: IterationReport


class SBMRule:
    """Message update with the per-sweep global field state.

    The field depends on the current node marginals, which are recomputed at
    the start of every sweep from the message values of that sweep; given
    the same initial field the evolution is fully deterministic.
    """

    kind = "simplex"

    def __init__(self, index: HalfEdgeIndex, params: SBMParams):
        self.index = index
        self.params = params
        self.marginals = np.tile(params.priors, (index.graph.n, 1))
        self._log_field = None    # (n, q) log non-edge terms per node
        self._field_total = None  # (q,) sum over all nodes
        self._nbr_sum = None      # (n, q) sum of terms over each node's neighbors

    def _refresh_field(self) -> None:
        t = 1.0 - self.marginals @ self.params.omega
        if (t <= 0.0).any():
            node = int(np.flatnonzero((t <= 0.0).any(axis=1))[0])
            raise UpdateDomainError(node, "non-edge field term vanished (omega too dense)")
        self._log_field = np.log(t)
        self._field_total = self._log_field.sum(axis=0)
        self._nbr_sum = kernels.seg_sum(self.index.offsets, self._log_field[self.index.sender])

    def begin_sweep(self, values: np.ndarray) -> None:
        self._refresh_field()
        self.marginals = self.node_marginals(values)

    def _mixed(self, values: np.ndarray) -> np.ndarray:
        t = values @ self.params.omega
        top = t.max(axis=1)
        if (top <= 0.0).any():
            raise UpdateDomainError(
                int(np.flatnonzero(top <= 0.0)[0]), "all-zero unnormalized message"
            )
        return t / top[:, None]

    def sweep(self, values: np.ndarray) -> np.ndarray:
        idx = self.index
        mixed = self._mixed(values)
        edge_part = kernels.excl_prod(idx.offsets, mixed)[idx.rev]
        # field over non-neighbors of the sender j, excluding j itself; the
        # receiver is one of j's neighbors, so it drops out with them
        fl = (
            self._field_total[None, :]
            - self._log_field[idx.sender]
            - self._nbr_sum[idx.sender]
        )
        unnorm = self.params.priors[None, :] * np.exp(fl - fl.max(axis=1, keepdims=True))
        unnorm = unnorm * edge_part
        total = unnorm.sum(axis=1)
        if (total <= 0.0).any():
            raise UpdateDomainError(
                int(np.flatnonzero(total <= 0.0)[0]), "all-zero unnormalized message"
            )
        return unnorm / total[:, None]

    def update_edge(self, values: np.ndarray, e: int) -> np.ndarray:
        idx = self.index
        succ = idx.successors(e)
        mix = values[succ] @ self.params.omega
        fl = (
            self._field_total
            - self._log_field[idx.sender[e]]
            - self._nbr_sum[idx.sender[e]]
        )
        unnorm = self.params.priors * np.exp(fl - fl.max()) * np.prod(mix, axis=0)
        if unnorm.sum() <= 0.0:
            raise UpdateDomainError(e, "all-zero unnormalized message")
        return unnorm / unnorm.sum()

    def node_marginals(self, values: np.ndarray) -> np.ndarray:
        idx = self.index
        mixed = self._mixed(values) if values.shape[0] else values.reshape(0, self.params.q)
        prod = kernels.seg_prod(idx.offsets, mixed)
        fl = self._field_total[None, :] - self._log_field - self._nbr_sum
        unnorm = self.params.priors[None, :] * np.exp(fl - fl.max(axis=1, keepdims=True)) * prod
        total = unnorm.sum(axis=1)
        if (total <= 0.0).any():
            raise UpdateDomainError(
                int(np.flatnonzero(total <= 0.0)[0]), "all-zero unnormalized marginal"
            )
        return unnorm / total[:, None]


def _initial_simplices(index: HalfEdgeIndex, q: int, config: FixedPointConfig) -> np.ndarray:
    init = config.init or "random"
    if init == "random":
        vals = config.rng().random((index.n_edges, q))
        return vals / vals.sum(axis=1, keepdims=True)
    if init == "uniform-simplex":
        return np.full((index.n_edges, q), 1.0 / q)
    raise ValueError(f"unsupported init {init!r} for simplex messages")


def sbm_bp(
    graph: Graph,
    params: SBMParams,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, CommunityResult]:
    """Run SBM belief propagation; returns (messages, result).

    Default init is seeded-random simplices so the group symmetry can break
    when the structure is detectable.
    """
    if graph.n < 1:
        raise ValueError("graph has no nodes")
    config = config or FixedPointConfig()
    index = index or HalfEdgeIndex(graph)
    rule = SBMRule(index, params)
    if initial is None:
        initial = _initial_simplices(index, params.q, config)
    messages, report = iterate(rule, initial, config)
    rule._refresh_field()
    marginals = rule.node_marginals(messages)
    hard = np.argmax(marginals, axis=1)  # argmax takes the lowest index on ties
    return messages, CommunityResult(marginals, hard, report)


def overlap(hard_labels: np.ndarray, truth_labels: np.ndarray, q: int) -> float:
    """Permutation-maximized, chance-corrected label agreement in [0, 1]."""
    hard_labels = np.asarray(hard_labels)
    truth_labels = np.asarray(truth_labels)
    if hard_labels.shape != truth_labels.shape:
        raise ValueError("label arrays must have equal length")
    if q > 8:
        raise ValueError("overlap scans q! permutations; q > 8 rejected")
    n = hard_labels.shape[0]
    best = 0.0
    for perm in itertools.permutations(range(q)):
        mapped = np.asarray(perm)[hard_labels]
        best = max(best, float((mapped == truth_labels).mean()))
    return max((best - 1.0 / q) / (1.0 - 1.0 / q), 0.0)


def detectability_margin(c_in: float, c_out: float) -> float:
    """Distance from the two-group detectability threshold.

    Positive means the planted structure is detectable:
    margin = (c_in - c_out) - sqrt(2 (c_in + c_out)).
    """
    if c_out < 0 or c_in < c_out:
        raise ValueError("need c_in >= c_out >= 0")
    return float((c_in - c_out) - np.sqrt(2.0 * (c_in + c_out)))


def sweep_overlap(
    graph: Graph,
    truth: np.ndarray,
    params_grid: list[SBMParams],
    grid_values: np.ndarray,
    config: FixedPointConfig | None = None,
    parameter: str = "c_in",
) -> SweepResult:
    """Overlap against planted truth across a parameter grid."""
    values = []
    reports = []
    for params in params_grid:
        _, res = sbm_bp(graph, params, config)
        values.append(overlap(res.hard_labels, truth, params.q))
        reports.append(res.report)
    return SweepResult(
        parameter=parameter,
        grid=np.asarray(grid_values, dtype=np.float64),
        values=np.asarray(values),
        reports=reports,
        value_name="overlap",
    )
