"""Shared fitting plumbing: configuration, iteration traces, default starts."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .censoring import CensoredSample
from .distributions import Family, Laplace, Normal, ParamSet, Rayleigh
from .exceptions import ParameterError

__all__ = [
    "Algorithm",
    "FitConfig",
    "TraceRow",
    "FitTrace",
    "default_start",
    "read_trace_csv",
    "DEFAULT_SEED",
]

# Fixed, documented default seed; runs are reproducible out of the box.
DEFAULT_SEED = 0


class Algorithm(enum.Enum):
    EM = "em"
    MCEM = "mcem"
    DIRECT = "direct"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass
class FitConfig:
    """Options shared by the fitting routines.

    ``max_iter=None`` resolves to the algorithm's own default: 500 for the
    closed-form EM iteration, 15 for Monte Carlo EM (whose default stopping
    rule is the iteration budget itself).  ``k`` and ``k_growth`` only apply
    to Monte Carlo EM: iteration s uses ceil(k * k_growth**(s-1)) replicates
    per censored unit.
    """

    family: Family
    algorithm: Algorithm
    start: ParamSet | None = None
    k: int = 50_000
    max_iter: int | None = None
    tol: float = 1e-8
    seed: int = DEFAULT_SEED
    k_growth: float = 1.0

    def __post_init__(self):
        if not isinstance(self.family, Family):
            raise ParameterError(f"family must be a Family member, got {self.family!r}")
        if not isinstance(self.algorithm, Algorithm):
            raise ParameterError(f"algorithm must be an Algorithm member, got {self.algorithm!r}")
        if self.algorithm is Algorithm.EM and self.family is not Family.NORMAL:
            raise ParameterError(
                f"the exact EM step is only available for the normal family; "
                f"use mcem or direct for {self.family}"
            )
        if self.start is not None and self.start.family is not self.family:
            raise ParameterError(
                f"start parameters are for {self.start.family}, config family is {self.family}"
            )
        if int(self.k) < 1:
            raise ParameterError("k must be a positive integer")
        self.k = int(self.k)
        if self.max_iter is not None and int(self.max_iter) < 1:
            raise ParameterError("max_iter must be a positive integer")
        if not (self.tol > 0.0):
            raise ParameterError("tol must be positive")
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must fit in an unsigned 64-bit integer")
        if not (self.k_growth >= 1.0 and math.isfinite(self.k_growth)):
            raise ParameterError("k_growth must be >= 1")

    def resolved_max_iter(self) -> int:
        if self.max_iter is not None:
            return int(self.max_iter)
        return 15 if self.algorithm is Algorithm.MCEM else 500

    def k_at(self, s: int) -> int:
        """Replicates per censored unit at iteration s >= 1."""
        if self.k_growth == 1.0:
            return self.k
        return int(math.ceil(self.k * self.k_growth ** (s - 1)))


@dataclass(frozen=True)
class TraceRow:
    """One iteration record: index s, parameters at s, observed log-likelihood."""

    s: int
    params: ParamSet
    loglik: float

    def reported(self) -> tuple[float, ...]:
        """Row as displayed: (s, reported parameters..., loglik)."""
        return (float(self.s), *self.params.reported(), self.loglik)


@dataclass
class FitTrace:
    """Full iteration history of a fit; row 0 holds the starting point."""

    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False

    @property
    def final(self) -> ParamSet:
        return self.rows[-1].params

    @property
    def iterations(self) -> int:
        """Number of update steps actually taken."""
        return self.rows[-1].s if self.rows else 0

    def logliks(self) -> list[float]:
        return [row.loglik for row in self.rows]

    def header(self) -> list[str]:
        return ["s", *self.rows[0].params.param_names, "loglik"]

    def to_csv(self) -> str:
        """Serialize with 17 significant digits so values re-parse exactly."""
        lines = [",".join(self.header())]
        for row in self.rows:
            cells = [str(row.s)]
            cells += [f"{v:.17g}" for v in row.params.reported()]
            cells.append(f"{row.loglik:.17g}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def read_trace_csv(path) -> list[tuple[float, ...]]:
    """Parse a trace CSV back into numeric rows (s, params..., loglik)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                out.append(tuple(float(c) for c in row))
    return out


def default_start(sample: CensoredSample, family: Family) -> ParamSet:
    """Moment-style starting point from the uncensored part of the sample.

    Falls back to a neutral unit-scale start when fewer than two exact
    observations are available (or the exact observations are degenerate).
    """
    y = sample.uncensored
    if family is Family.NORMAL:
        if y.size >= 2:
            v = float(np.var(y))
            if v > 0.0:
                return Normal(float(np.mean(y)), v)
        return Normal(0.0, 1.0)
    if family is Family.LAPLACE:
        if y.size >= 2:
            med = float(np.median(y))
            scale = float(np.mean(np.abs(y - med)))
            if scale > 0.0:
                return Laplace(med, scale)
        return Laplace(0.0, 1.0)
    if family is Family.RAYLEIGH:
        if y.size >= 1:
            b2 = float(np.sum(y * y)) / (2.0 * y.size)
            if b2 > 0.0:
                return Rayleigh(math.sqrt(b2))
        return Rayleigh(1.0)
    raise ParameterError(f"unknown family: {family!r}")
