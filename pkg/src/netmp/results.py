"""Parameter-sweep results shared by the algorithm modules and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from netmp.engine import IterationReport


@dataclass
class SweepResult:
    """A parameter grid with one scalar output (and metadata) per point.

    `meta` carries provenance (seed, config, graph hash); the CLI fills it
    before serializing.  Optional per-node arrays ride along for single-point
    runs.
    """

    parameter: str
    grid: np.ndarray
    values: np.ndarray
    reports: list[IterationReport]
    value_name: str = "value"
    per_node: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.values) or len(self.grid) != len(self.reports):
            raise ValueError("grid, values, and reports must have equal length")

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.reports)

    def rows(self):
        for x, y, rep in zip(self.grid, self.values, self.reports):
            yield float(x), float(y), rep
