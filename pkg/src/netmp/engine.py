"""Generic fixed-point iteration over per-directed-edge message arrays.

Every algorithm module defines an update rule object; the engine owns the
schedule (synchronous Jacobi or sequential Gauss-Seidel), damping,
convergence detection, and payload-kind validation.  Non-convergence is
reported, not raised: sweeps near phase transitions legitimately hit the
iteration cap and the caller decides what to do about it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from netmp.errors import UpdateDomainError

PAYLOAD_KINDS = ("scalar", "pair", "complex", "simplex")


@dataclass
class MessageField:
    """Per-directed-edge message values with a declared payload kind."""

    values: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in PAYLOAD_KINDS:
            raise ValueError(f"unknown payload kind {self.kind!r}")

    def first_invalid(self, tol: float = 1e-12) -> int:
        """Index of the first entry violating its kind constraint, or -1."""
        v = self.values
        if v.shape[0] == 0:
            return -1
        if self.kind == "scalar":
            bad = (v < -tol) | (v > 1.0 + tol) | ~np.isfinite(v)
        elif self.kind in ("pair", "simplex"):
            bad = (
                (v < -tol).any(axis=1)
                | (np.abs(v.sum(axis=1) - 1.0) > tol)
                | ~np.isfinite(v).all(axis=1)
            )
        else:  # complex: any finite value is a valid payload
            bad = ~np.isfinite(v.real) | ~np.isfinite(v.imag)
        idx = np.flatnonzero(bad)
        return int(idx[0]) if idx.shape[0] else -1


@dataclass(frozen=True)
class FixedPointConfig:
    """Iteration controls shared by all message-passing solvers.

    `damping` is the fraction of the old value retained each step.  `init`
    selects the starting field (`None` means the algorithm's default); the
    accepted names are zeros, ones, random, uniform-simplex, tilt, custom.
    """

    tol: float = 1e-10
    max_iter: int = 100_000
    damping: float = 0.0
    schedule: str = "synchronous"
    seed: int = 0
    init: str | None = None

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must be in [0, 1)")
        if self.schedule not in ("synchronous", "sequential"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class IterationReport:
    converged: bool
    iterations: int
    residual: float


class UpdateRule(Protocol):
    """Pure per-edge update: one new payload per directed edge."""

    kind: str

    def begin_sweep(self, values: np.ndarray) -> None: ...

    def sweep(self, values: np.ndarray) -> np.ndarray: ...

    def update_edge(self, values: np.ndarray, e: int) -> np.ndarray | float: ...


def _residual(new: np.ndarray, old: np.ndarray) -> float:
    if new.shape[0] == 0:
        return 0.0
    return float(np.abs(new - old).max())


def iterate(
    rule: UpdateRule,
    values: np.ndarray,
    config: FixedPointConfig,
    validate: bool = True,
) -> tuple[np.ndarray, IterationReport]:
    """Run the update rule to a fixed point.

    Synchronous: all new payloads are computed from the old field, then the
    field is swapped.  Sequential: edges are updated in index order in place.
    The residual is the largest entrywise change of the final sweep (after
    damping); iteration stops once it drops below config.tol.
    """
    values = np.array(values, copy=True)
    d = config.damping
    field = MessageField(values, rule.kind)
    residual = np.inf
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        rule.begin_sweep(values)
        if config.schedule == "synchronous":
            new = rule.sweep(values)
            if d:
                new = d * values + (1.0 - d) * new
            residual = _residual(new, values)
            values = new
        else:
            residual = 0.0
            for e in range(values.shape[0]):
                upd = rule.update_edge(values, e)
                if d:
                    upd = d * values[e] + (1.0 - d) * upd
                change = np.max(np.abs(upd - values[e]))
                residual = max(residual, float(change))
                values[e] = upd
        if validate:
            field.values = values
            bad = field.first_invalid()
            if bad >= 0:
                raise UpdateDomainError(
                    bad, f"payload left the {rule.kind!r} domain: {values[bad]!r}"
                )
        if residual < config.tol:
            return values, IterationReport(True, iterations, residual)
    return values, IterationReport(False, iterations, residual)


class BaseRule:
    """Default no-op begin_sweep for rules without per-sweep state."""

    def begin_sweep(self, values: np.ndarray) -> None:
        pass
