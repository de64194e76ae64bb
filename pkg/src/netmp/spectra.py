"""Sparse spectral density of the adjacency matrix.

Messages are complex excursion generating functions evaluated at
z = x + i*eta; the density at x follows from the node-level resolvent
combination with the Lorentzian broadening eta.  Iteration is damped (0.5
by default): the undamped map can oscillate near eigenvalues when eta is
small.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netmp import kernels
from netmp.engine import BaseRule, FixedPointConfig, IterationReport, iterate
from netmp.errors import SingularUpdateError
from netmp.graph import Graph
from netmp.halfedge import HalfEdgeIndex
from netmp.results import SweepResult

_SINGULAR_EPS = 1e-14
DEFAULT_DAMPING = 0.5


@dataclass(frozen=True)
class SpectralParams:
    """Evaluation grid and Lorentzian half-width."""

    x_grid: np.ndarray
    eta: float = 0.01

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        grid = np.asarray(self.x_grid, dtype=np.float64)
        if grid.ndim != 1 or (np.diff(grid) <= 0).any():
            raise ValueError("x grid must be strictly ascending")


@dataclass(frozen=True)
class SpectralDensityResult:
    x_grid: np.ndarray
    density: np.ndarray
    reports: list[IterationReport]
    mass: float  # trapezoid integral of the density over the grid

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.reports)


class SpectralRule(BaseRule):
    kind = "complex"

    def __init__(self, index: HalfEdgeIndex, z: complex):
        if z.imag <= 0:
            raise ValueError("Im(z) must be positive")
        self.index = index
        self.z = complex(z)
        self.inv_z2 = 1.0 / (self.z * self.z)

    def sweep(self, values: np.ndarray) -> np.ndarray:
        new, singular = kernels.spectral_sweep(
            self.index.offsets, self.index.rev, values, self.inv_z2, _SINGULAR_EPS
        )
        if singular >= 0:
            raise SingularUpdateError(singular, "denominator 1 - sum(mu) vanished")
        return new

    def update_edge(self, values: np.ndarray, e: int) -> complex:
        den = 1.0 - values[self.index.successors(e)].sum()
        if abs(den) < _SINGULAR_EPS:
            raise SingularUpdateError(e, "denominator 1 - sum(mu) vanished")
        return self.inv_z2 / den


def _spectra_config(config: FixedPointConfig | None) -> FixedPointConfig:
    return config or FixedPointConfig(damping=DEFAULT_DAMPING)


def spectral_messages(
    graph: Graph,
    z: complex,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, IterationReport]:
    """Solve the generating-function messages at one complex point z."""
    config = _spectra_config(config)
    index = index or HalfEdgeIndex(graph)
    rule = SpectralRule(index, z)
    if initial is None:
        init = config.init or "zeros"
        if init != "zeros":
            raise ValueError("complex messages support only the zeros init")
        initial = np.zeros(index.n_edges, dtype=np.complex128)
    return iterate(rule, initial, config)


def _density_from_messages(
    index: HalfEdgeIndex, messages: np.ndarray, z: complex
) -> float:
    n = index.graph.n
    node_sums = kernels.seg_sum(index.offsets, messages)
    rho = (-1.0 / (n * np.pi * z) * (1.0 / (1.0 - node_sums)).sum()).imag
    return float(rho)


def spectral_density_at(
    graph: Graph,
    x: float,
    eta: float = 0.01,
    config: FixedPointConfig | None = None,
    index: HalfEdgeIndex | None = None,
    initial: np.ndarray | None = None,
) -> float:
    """Spectral density at one real point (negative numerical dust clamped to 0)."""
    if graph.n == 0:
        raise ValueError("graph has no nodes")
    if eta <= 0:
        raise ValueError("eta must be positive")
    index = index or HalfEdgeIndex(graph)
    messages, _ = spectral_messages(
        graph, complex(x, eta), config, index=index, initial=initial
    )
    return max(_density_from_messages(index, messages, complex(x, eta)), 0.0)


def spectral_density_grid(
    graph: Graph,
    params: SpectralParams,
    config: FixedPointConfig | None = None,
) -> SpectralDensityResult:
    """Density over the x grid, warm-starting messages between adjacent points."""
    if graph.n == 0:
        raise ValueError("graph has no nodes")
    config = _spectra_config(config)
    index = HalfEdgeIndex(graph)
    grid = np.asarray(params.x_grid, dtype=np.float64)
    density = np.empty_like(grid)
    reports: list[IterationReport] = []
    prev: np.ndarray | None = None
    for k, x in enumerate(grid):
        z = complex(x, params.eta)
        messages, report = spectral_messages(
            graph, z, config, index=index, initial=prev
        )
        density[k] = max(_density_from_messages(index, messages, z), 0.0)
        reports.append(report)
        prev = messages
    mass = float(np.trapezoid(density, grid)) if grid.shape[0] > 1 else 0.0
    return SpectralDensityResult(grid, density, reports, mass)


def sweep_spectral_density(
    graph: Graph,
    params: SpectralParams,
    config: FixedPointConfig | None = None,
) -> SweepResult:
    """Grid density packaged as a SweepResult for serialization."""
    res = spectral_density_grid(graph, params, config)
    return SweepResult(
        parameter="x",
        grid=res.x_grid,
        values=res.density,
        reports=res.reports,
        value_name="rho",
        meta={"eta": params.eta, "mass": res.mass},
    )


def kesten_mckay(d: int, x: float | np.ndarray) -> float | np.ndarray:
    """Closed-form spectral density of the random d-regular graph.

    rho(x) = (d / 2 pi) sqrt(4(d-1) - x^2) / (d^2 - x^2) inside the support
    |x| < 2 sqrt(d-1), zero outside.
    """
    if d < 2:
        raise ValueError("degree must be at least 2")
    x = np.asarray(x, dtype=np.float64)
    support = 4.0 * (d - 1) - x * x
    with np.errstate(invalid="ignore"):
        rho = np.where(
            support > 0.0,
            d / (2.0 * np.pi) * np.sqrt(np.maximum(support, 0.0)) / (d * d - x * x),
            0.0,
        )
    return float(rho) if rho.ndim == 0 else rho
