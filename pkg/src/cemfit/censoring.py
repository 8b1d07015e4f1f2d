"""Right-censored samples: container, likelihood, validation, and CSV I/O.

A sample is a list of pairs (w_i, delta_i): delta_i = 1 means w_i is an
exact observation, delta_i = 0 means the true value is only known to exceed
w_i.  Type-II censored experiments (stop after the r-th failure) reduce to
this representation with every unobserved unit censored at the largest
observed order statistic.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable

import numpy as np

from .distributions import Family, ParamSet
from .exceptions import DataError

__all__ = [
    "CensoredSample",
    "from_type2",
    "observed_loglik",
    "validate",
    "ensure_fittable",
    "read_censored_csv",
    "write_censored_csv",
]


class CensoredSample:
    """Immutable right-censored sample.

    Parameters
    ----------
    w : array_like of float
        Observed values (exact or censoring times).
    delta : array_like of int
        Censoring indicators; 1 for exact, 0 for right-censored.

    Construction is deliberately permissive about the sample's *content*
    (``validate`` reports problems such as out-of-range indicators or an
    all-censored sample); only the structure is enforced here.
    """

    def __init__(self, w, delta):
        w = np.atleast_1d(np.asarray(w, dtype=float)).copy()
        delta = np.atleast_1d(np.asarray(delta)).copy()
        if w.ndim != 1 or delta.ndim != 1:
            raise DataError("w and delta must be one-dimensional")
        if w.shape != delta.shape:
            raise DataError(f"w and delta differ in length: {w.size} vs {delta.size}")
        if delta.size and not np.issubdtype(delta.dtype, np.integer):
            if not np.all(delta == np.floor(delta)):
                raise DataError("delta must contain integers")
            delta = delta.astype(np.int64)
        else:
            delta = delta.astype(np.int64)
        w.setflags(write=False)
        delta.setflags(write=False)
        self._w = w
        self._delta = delta

    @property
    def w(self) -> np.ndarray:
        return self._w

    @property
    def delta(self) -> np.ndarray:
        return self._delta

    @property
    def n(self) -> int:
        """Total number of units."""
        return self._w.size

    @property
    def m(self) -> int:
        """Number of exactly observed units."""
        return int(np.count_nonzero(self._delta == 1))

    @property
    def uncensored(self) -> np.ndarray:
        """Values observed exactly."""
        return self._w[self._delta == 1]

    @property
    def censor_times(self) -> np.ndarray:
        """Censoring bounds of the unobserved units."""
        return self._w[self._delta == 0]

    @property
    def censored_indices(self) -> np.ndarray:
        """Original positions of the censored units (stable unit labels)."""
        return np.nonzero(self._delta == 0)[0]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"CensoredSample(n={self.n}, m={self.m})"


def from_type2(values: Iterable[float], total_n: int) -> CensoredSample:
    """Build the (w, delta) sample for a Type-II censored experiment.

    ``values`` are the ``r`` smallest order statistics actually observed
    (ascending); the remaining ``total_n - r`` units are censored at the
    largest observed value.
    """
    vals = [float(v) for v in values]
    r = len(vals)
    if r == 0:
        raise DataError("need at least one observed order statistic")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise DataError("observed order statistics must be sorted ascending")
    if total_n < r:
        raise DataError(f"total_n={total_n} is smaller than the {r} observed values")
    w = vals + [vals[-1]] * (total_n - r)
    delta = [1] * r + [0] * (total_n - r)
    return CensoredSample(w, delta)


def observed_loglik(sample: CensoredSample, params: ParamSet) -> float:
    """Log-likelihood of the censored sample: exact points contribute the log
    density, censored points the log survival at their bound.

    Returns ``-inf`` if any exact observation has zero density.  Summation is
    compensated, so the result does not depend on the order of the units.
    """
    terms = []
    y = sample.uncensored
    if y.size:
        lp = np.atleast_1d(np.asarray(params.logpdf(y)))
        if np.any(np.isneginf(lp)):
            return -math.inf
        terms.extend(lp.tolist())
    r = sample.censor_times
    if r.size:
        terms.extend(np.atleast_1d(np.asarray(params.log_survival(r))).tolist())
    return math.fsum(terms)


def validate(sample: CensoredSample, family: Family | None = None) -> list[str]:
    """Return a list of human-readable invariant violations (empty if none).

    Checks: nonempty sample, finite values, indicators in {0, 1}, at least
    one exact observation (with none, the likelihood approaches its supremum
    as the location grows and no maximizer exists), and positivity for the
    Rayleigh family.
    """
    problems = []
    if sample.n == 0:
        problems.append("sample is empty")
        return problems
    bad_delta = (sample.delta != 0) & (sample.delta != 1)
    if np.any(bad_delta):
        rows = np.nonzero(bad_delta)[0]
        problems.append(
            f"delta must be 0 or 1; offending rows (0-based): {rows.tolist()[:10]}"
        )
    if not np.all(np.isfinite(sample.w)):
        rows = np.nonzero(~np.isfinite(sample.w))[0]
        problems.append(f"w must be finite; offending rows (0-based): {rows.tolist()[:10]}")
    elif sample.m == 0 and not np.any(bad_delta):
        problems.append(
            "all observations are censored: likelihood unbounded; estimation refused"
        )
    if family is Family.RAYLEIGH and np.any(sample.w <= 0.0):
        rows = np.nonzero(sample.w <= 0.0)[0]
        problems.append(
            f"nonpositive observation for the Rayleigh family; "
            f"offending rows (0-based): {rows.tolist()[:10]}"
        )
    return problems


def ensure_fittable(sample: CensoredSample, family: Family | None = None) -> None:
    """Raise :class:`DataError` listing every violation found by ``validate``."""
    problems = validate(sample, family)
    if problems:
        raise DataError("; ".join(problems))


def read_censored_csv(path) -> CensoredSample:
    """Read a sample from CSV with header ``w,delta``.

    Malformed rows raise :class:`DataError` naming the offending line.
    """
    w, delta = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file (expected header 'w,delta')")
        if [h.strip().lower() for h in header[:2]] != ["w", "delta"]:
            raise DataError(f"{path}: expected header 'w,delta', got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise DataError(f"{path}, line {lineno}: expected two columns 'w,delta'")
            try:
                value = float(row[0])
            except ValueError:
                raise DataError(f"{path}, line {lineno}: cannot parse w value {row[0]!r}") from None
            try:
                flag = int(row[1])
            except ValueError:
                raise DataError(f"{path}, line {lineno}: cannot parse delta value {row[1]!r}") from None
            if flag not in (0, 1):
                raise DataError(f"{path}, line {lineno}: delta must be 0 or 1, got {flag}")
            w.append(value)
            delta.append(flag)
    if not w:
        raise DataError(f"{path}: empty sample")
    return CensoredSample(w, delta)


def write_censored_csv(path, sample: CensoredSample) -> None:
    """Write the sample as CSV with header ``w,delta``; values round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["w", "delta"])
        for value, flag in zip(sample.w, sample.delta):
            writer.writerow([repr(float(value)), int(flag)])
