"""Direct maximization of the censored-data log-likelihood.

This is the reference route used to cross-check the EM and Monte Carlo EM
fixed points: a derivative-free simplex search over an unconstrained
reparameterization (scale parameters on the log axis), restarted from
several perturbed moment starts.

The Laplace likelihood needs one extra step.  Its location profile is
piecewise smooth with kinks at the data values, and when the exact
observations balance, an entire interval between two adjacent order
statistics attains the maximum.  The simplex stops somewhere on that flat
segment; the result is canonicalized to the segment midpoint (the usual
sample-median convention) so the reported location is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .censoring import CensoredSample, ensure_fittable, observed_loglik
from .distributions import Family, Laplace, Normal, ParamSet, Rayleigh
from .exceptions import NonConvergenceError, ParameterError
from .fitting import Algorithm, FitConfig, default_start

__all__ = [
    "OptimizerReport",
    "fit_direct",
    "rayleigh_mle_closed_form",
    "loglik_gradient_norm",
]


@dataclass(frozen=True)
class OptimizerReport:
    """Outcome of a direct maximization."""

    argmax: ParamSet
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float


def _params_from_reported(family: Family, vec) -> ParamSet:
    if family is Family.NORMAL:
        return Normal(vec[0], vec[1] * vec[1])
    if family is Family.LAPLACE:
        return Laplace(vec[0], vec[1])
    return Rayleigh(vec[0])


def _pack(params: ParamSet) -> np.ndarray:
    """Map to the unconstrained search space (scales on the log axis)."""
    if isinstance(params, Normal):
        return np.array([params.mu, math.log(params.sigma)])
    if isinstance(params, Laplace):
        return np.array([params.mu, math.log(params.sigma)])
    return np.array([math.log(params.beta)])


def _unpack(family: Family, x: np.ndarray) -> ParamSet:
    if family is Family.NORMAL:
        return Normal(float(x[0]), math.exp(2.0 * float(x[1])))
    if family is Family.LAPLACE:
        return Laplace(float(x[0]), math.exp(float(x[1])))
    return Rayleigh(math.exp(float(x[0])))


def loglik_gradient_norm(sample: CensoredSample, params: ParamSet) -> float:
    """Euclidean norm of the central-difference score at ``params``.

    Differences are taken in the reported coordinates (location and scale,
    not variance) with step 1e-6 times the coordinate's magnitude.
    """
    vec = list(params.reported())
    grads = []
    for j in range(len(vec)):
        h = 1e-6 * max(1.0, abs(vec[j]))
        # keep scale coordinates positive under perturbation
        if j == len(vec) - 1 and vec[j] - h <= 0.0:
            h = 0.5 * vec[j]
        hi, lo = list(vec), list(vec)
        hi[j] += h
        lo[j] -= h
        f_hi = observed_loglik(sample, _params_from_reported(params.family, hi))
        f_lo = observed_loglik(sample, _params_from_reported(params.family, lo))
        grads.append((f_hi - f_lo) / (2.0 * h))
    return float(np.sqrt(math.fsum(g * g for g in grads)))


def _start_list(family: Family, base: ParamSet, n_starts: int) -> list[ParamSet]:
    """Deterministic fan of perturbed starts around the moment estimate."""
    starts = [base]
    for j in range(1, n_starts):
        level = (j + 1) // 2
        sign = 1.0 if j % 2 == 1 else -1.0
        factor = 2.0 ** (sign * level)
        if isinstance(base, Rayleigh):
            starts.append(Rayleigh(base.beta * factor))
        else:
            loc = base.mu + sign * 0.5 * level * base.sigma
            cls = type(base)
            if isinstance(base, Normal):
                starts.append(Normal(loc, base.sigma2 * factor * factor))
            else:
                starts.append(cls(loc, base.sigma * factor))
    return starts


def _canonicalize_laplace(sample: CensoredSample, best: Laplace) -> Laplace:
    """Pin the location to the midpoint of its flat maximizing segment.

    The location profile at fixed scale is concave with kinks at the data
    values; candidates are evaluated there and a flat top (within relative
    1e-9 of the best) is replaced by its midpoint.  The scale is then
    re-optimized on the log axis at the pinned location.
    """
    candidates = np.unique(np.concatenate([sample.w, [best.mu]]))
    values = np.array([
        observed_loglik(sample, Laplace(float(c), best.sigma)) for c in candidates
    ])
    top = values.max()
    flat = candidates[values >= top - 1e-9 * (1.0 + abs(top))]
    loc = 0.5 * (flat.min() + flat.max()) if flat.size > 1 else float(candidates[np.argmax(values)])
    t0 = math.log(best.sigma)
    res = minimize_scalar(
        lambda t: -observed_loglik(sample, Laplace(loc, math.exp(t))),
        bounds=(t0 - 5.0, t0 + 5.0),
        method="bounded",
        options={"xatol": 1e-13},
    )
    refined = Laplace(loc, math.exp(float(res.x)))
    base = observed_loglik(sample, best)
    # points on the flat segment tie only up to rounding noise; keep the
    # canonical midpoint unless it is worse by more than ridge tolerance
    if observed_loglik(sample, refined) >= base - 1e-9 * (1.0 + abs(base)):
        return refined
    return best


def fit_direct(sample: CensoredSample, config: FitConfig, n_starts: int = 5) -> OptimizerReport:
    """Maximize the censored-data log-likelihood by multi-start simplex search.

    Only ``config.family`` and ``config.start`` are consulted (the search has
    no tuning knobs beyond the start).  Raises :class:`NonConvergenceError`
    (with the best report attached as ``.report``) if no start converges.
    """
    if config.algorithm is not Algorithm.DIRECT:
        raise ParameterError(f"fit_direct called with algorithm {config.algorithm}")
    family = config.family
    ensure_fittable(sample, family)
    base = config.start if config.start is not None else default_start(sample, family)

    def objective(x):
        try:
            return -observed_loglik(sample, _unpack(family, x))
        except (ParameterError, OverflowError):
            return math.inf

    best = None
    for s in _start_list(family, base, n_starts):
        res = minimize(
            objective,
            _pack(s),
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 5000, "maxfev": 10000},
        )
        if best is None or res.fun < best.fun:
            best = res
    argmax = _unpack(family, best.x)
    if family is Family.LAPLACE:
        argmax = _canonicalize_laplace(sample, argmax)
    loglik = observed_loglik(sample, argmax)
    grad = loglik_gradient_norm(sample, argmax)
    converged = bool(best.success) and grad <= 1e-5
    report = OptimizerReport(argmax, loglik, int(best.nit), converged, grad)
    if not best.success:
        err = NonConvergenceError(
            f"simplex search did not converge from any of {n_starts} starts"
        )
        err.report = report
        raise err
    return report


def rayleigh_mle_closed_form(sample: CensoredSample) -> Rayleigh:
    """Exact censored-data MLE for the Rayleigh family.

    The score has a unique root: beta^2 = (sum of all w_i^2) / (2 m), where
    censored units enter through their bounds and m counts the exact
    observations.
    """
    ensure_fittable(sample, Family.RAYLEIGH)
    b2 = math.fsum(sample.w * sample.w) / (2.0 * sample.m)
    return Rayleigh(math.sqrt(b2))
