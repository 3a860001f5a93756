"""Truncation with last-column augmentation and the rate-stabilization loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

import numpy as np

from .band_chain import ROW_SUM_TOL, BandChain
from .eigen import eigenvalues
from .errors import InputError, NoSubdominant, NumericalError, PerronNotIsolated, SpecgapError

__all__ = [
    "RateEstimate",
    "SweepPoint",
    "truncate",
    "rho_k",
    "estimate_rho2",
    "parameter_sweep",
    "DEFAULT_EPS",
    "DEFAULT_K_START",
    "DEFAULT_K_MAX",
]

DEFAULT_EPS = 1e-5
DEFAULT_K_START = 2
DEFAULT_K_MAX = 400
DEFAULT_CONSECUTIVE = 3
VERDICT_MARGIN = 1e-6
PERRON_TOL = 1e-8
UNIT_CIRCLE_TOL = 1e-10


@dataclass(frozen=True)
class RateEstimate:
    """Outcome of the stabilization loop.

    ``verdict`` is ``"point"`` (the rate is approximately ``value``),
    ``"upper"`` (the rate is at most ``value = alpha0``) or ``None`` when
    ``k_max`` was reached first.
    """

    alpha0: float
    eps: float
    trajectory: tuple
    k_final: int
    stabilized: bool
    verdict: str | None
    value: float | None
    consecutive: int = DEFAULT_CONSECUTIVE

    def __post_init__(self):
        ks = [k for k, _ in self.trajectory]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("trajectory must be strictly increasing in k")
        if self.stabilized and len(self.trajectory) >= 2:
            if abs(self.trajectory[-1][1] - self.trajectory[-2][1]) > self.eps:
                raise ValueError("stabilized flag set but the last step exceeds eps")

    @property
    def rho(self) -> float:
        """Last computed ``rho_k``."""
        return self.trajectory[-1][1]

    @property
    def first_stable_k(self) -> int | None:
        """First ``k`` with ``|rho_k - rho_(k-1)| <= eps`` (single comparison)."""
        for (_, a), (k, b) in zip(self.trajectory, self.trajectory[1:]):
            if abs(b - a) <= self.eps:
                return k
        return None

    def as_dict(self, trajectory: bool = False) -> dict:
        out = {
            "alpha0": self.alpha0,
            "eps": self.eps,
            "k_final": self.k_final,
            "rho_k": self.rho,
            "stabilized": self.stabilized,
            "verdict": self.verdict,
            "value": self.value,
        }
        if trajectory:
            out["trajectory"] = [[k, r] for k, r in self.trajectory]
        return out


def truncate(chain: BandChain, k: int) -> np.ndarray:
    """North-west ``k x k`` corner with the tail of every row folded into
    the last column."""
    if k < 2:
        raise InputError(f"k must be at least 2, got {k}")
    m = np.zeros((k, k))
    for i in range(k):
        for j, p in chain.row(i).items():
            m[i, min(j, k - 1)] += p
    dev = np.abs(m.sum(axis=1) - 1.0).max()
    if dev > ROW_SUM_TOL:
        raise NumericalError(f"truncated matrix row sums deviate from 1 by {dev:.3e}")
    return m


def _similar(m: np.ndarray, similarity) -> np.ndarray:
    """``D^-1 M D``; a scalar ``s`` stands for ``D = diag(s^-i)``."""
    if similarity is None:
        return m
    n = m.shape[0]
    if np.isscalar(similarity):
        s = float(similarity)
        if not s > 0:
            raise InputError("similarity ratio must be positive")
        idx = np.arange(n)
        return m * np.exp((idx[:, None] - idx[None, :]) * math.log(s))
    d = np.asarray(similarity, dtype=float)[:n]
    if d.size != n or np.any(d <= 0):
        raise InputError("similarity weights must be positive, one per state")
    return m * (d[None, :] / d[:, None])


def rho_k(m, *, similarity=None) -> float:
    """Largest modulus after removing the eigenvalue nearest to 1.

    ``similarity`` optionally applies a diagonal similarity before the
    eigensolve (same spectrum, better conditioning for strongly nonnormal
    matrices).
    """
    a = np.asarray(m, dtype=float)
    if a.shape[0] < 2:
        raise NoSubdominant("a 1x1 matrix has no subdominant eigenvalue")
    vals = eigenvalues(_similar(a, similarity)).values
    j = int(np.argmin(np.abs(vals - 1.0)))
    dist = abs(vals[j] - 1.0)
    if dist > PERRON_TOL:
        raise PerronNotIsolated(f"no eigenvalue within {PERRON_TOL:g} of 1 (closest at distance {dist:.3e})")
    rest = np.abs(np.delete(vals, j))
    top = float(rest.max())
    if abs(top - 1.0) <= UNIT_CIRCLE_TOL:
        raise PerronNotIsolated("a second eigenvalue lies on the unit circle (reducible or periodic truncation)")
    return top


def estimate_rho2(
    chain: BandChain,
    alpha0: float,
    eps: float = DEFAULT_EPS,
    k_start: int = DEFAULT_K_START,
    k_max: int = DEFAULT_K_MAX,
    *,
    similarity=None,
    consecutive: int = DEFAULT_CONSECUTIVE,
    margin: float = VERDICT_MARGIN,
) -> RateEstimate:
    """Grow ``k`` until ``rho_k`` settles, then compare it with ``alpha0``.

    Settling means ``|rho_k - rho_(k-1)| <= eps`` at ``consecutive``
    successive ``k``.
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    if k_start < 2 or k_max < k_start:
        raise InputError("need 2 <= k_start <= k_max")
    if consecutive < 1:
        raise InputError("consecutive must be at least 1")
    trajectory = []
    run = 0
    prev = None
    stabilized = False
    for k in range(k_start, k_max + 1):
        try:
            rho = rho_k(truncate(chain, k), similarity=similarity)
        except SpecgapError as exc:
            exc.k = k
            exc.args = (f"k={k}: {exc}",)
            raise
        trajectory.append((k, rho))
        if prev is not None:
            run = run + 1 if abs(rho - prev) <= eps else 0
            if run >= consecutive:
                stabilized = True
                break
        prev = rho
    k_final, rho = trajectory[-1]
    if not stabilized:
        verdict, value = None, None
    elif rho > alpha0 + margin:
        verdict, value = "point", rho
    else:
        verdict, value = "upper", float(alpha0)
    return RateEstimate(float(alpha0), eps, tuple(trajectory), k_final, stabilized, verdict, value, consecutive)


class SweepPoint(NamedTuple):
    parameter: Any
    estimate: RateEstimate | None
    error: str | None = None


def parameter_sweep(
    builder: Callable[[Any], tuple],
    grid: Iterable,
    eps: float = DEFAULT_EPS,
    k_max: int = DEFAULT_K_MAX,
    k_start: int = DEFAULT_K_START,
    **options,
) -> list:
    """Run ``estimate_rho2`` at every grid point.

    ``builder(parameter)`` returns ``(chain, alpha0)`` or
    ``(chain, alpha0, extra_kwargs)``.  A failing point is recorded with
    its error message and the sweep moves on.
    """
    grid = list(grid)
    if not grid:
        raise InputError("parameter grid is empty")
    out = []
    for param in grid:
        try:
            built = builder(param)
            chain, alpha0 = built[0], built[1]
            extra = dict(options)
            if len(built) > 2:
                extra.update(built[2])
            est = estimate_rho2(chain, alpha0, eps, k_start, k_max, **extra)
            out.append(SweepPoint(param, est))
        except SpecgapError as exc:
            out.append(SweepPoint(param, None, f"{type(exc).__name__}: {exc}"))
    return out
