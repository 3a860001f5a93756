"""Generating function, tail ratio, essential-spectral-radius bounds and drift.

For a limit profile ``a_{-N} .. a_N`` the generating function is
``psi(t) = sum_k a_k t^(-k)``.  It is convex on ``(0, inf)`` with
``psi(1) = 1``; under a negative mean increment its second root in
``(0, 1)`` is the tail ratio ``tau`` of the invariant law, and the bound on
the essential spectral radius in ``l2(pi)`` is ``psi(sqrt(tau))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .band_chain import BandChain, LimitProfile, StationaryDist
from .errors import (
    DegenerateTailZero,
    DriftViolatedAtTail,
    InconsistentTauZero,
    InputError,
    NonpositiveArgument,
    NoRootInUnitInterval,
    OutOfWindow,
    ParameterDomain,
)

__all__ = [
    "Alpha0Result",
    "DriftCertificate",
    "psi",
    "solve_tau",
    "neri",
    "alpha0_from_profile",
    "alpha0_reversible",
    "alpha0_empirical",
    "drift_constants",
]

TAU_GRID_SIZE = 400
TAU_GRID_LO = 1e-15
TAU_GRID_HI = 1.0 - 1e-9
BISECTION_MAX_ITER = 200
BISECTION_TOL = 1e-14


@dataclass(frozen=True)
class Alpha0Result:
    """Value of the bound, how it was obtained, and the tail ratio used."""

    value: float
    method: str
    tau: float | None = None
    detail: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in ("profile", "reversible", "empirical"):
            raise ValueError(f"unknown method {self.method!r}")
        if not -1e-15 <= self.value <= 1.0 + 1e-12:
            raise ParameterDomain(
                f"alpha0 = {self.value:.12g} lies outside [0, 1]; no spectral gap is certified"
            )


@dataclass(frozen=True)
class DriftCertificate:
    """``(PV)(i) <= alpha V(i) + L`` on ``0..i_max`` with ``V = pi^(-1/2)``."""

    alpha: float
    L: float
    i_max: int
    tail_ratio_max: float


def psi(profile: LimitProfile, t: float) -> float:
    if not t > 0:
        raise NonpositiveArgument(f"psi is defined for t > 0, got {t}")
    powers = float(t) ** (-profile.offsets.astype(float))
    return float(np.dot(profile.coefficients, powers))


def neri(profile: LimitProfile) -> tuple[bool, float]:
    """Whether the asymptotic mean increment is negative, and its value."""
    drift = math.fsum(float(m) * a for m, a in zip(profile.offsets, profile.coefficients))
    return drift < 0.0, drift


def solve_tau(profile: LimitProfile) -> float:
    """Root of ``psi(t) = 1`` inside ``(0, 1)``.

    A geometric grid brackets the sign change of ``psi - 1`` below the trivial
    root at 1; convexity makes the bracket unique and bisection finishes.
    """
    a = profile.coefficients
    if not np.any(a[profile.N + 1:] > 0):
        raise DegenerateTailZero(
            "all forward coefficients vanish: use the tau = 0 branch (alpha0 = a_0)"
        )
    grid = np.geomspace(TAU_GRID_LO, TAU_GRID_HI, TAU_GRID_SIZE)
    excess = np.array([psi(profile, t) - 1.0 for t in grid])
    below = np.flatnonzero(excess < 0)
    if below.size == 0:
        raise NoRootInUnitInterval("psi(t) >= 1 on (0, 1): the mean increment is not negative")
    j = below[0]
    if j == 0:
        raise NoRootInUnitInterval("root lies below the grid floor")
    lo, hi = grid[j - 1], grid[j]
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= BISECTION_TOL * hi:
            break
        if psi(profile, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(psi(profile, lo) - 1.0) <= abs(psi(profile, hi) - 1.0) else hi


def alpha0_from_profile(profile: LimitProfile, tau: float) -> Alpha0Result:
    """``sum_m a_m tau^(-m/2)`` for ``tau`` in (0, 1), ``a_0`` for ``tau = 0``."""
    if not 0.0 <= tau < 1.0:
        raise ParameterDomain(f"tau must lie in [0, 1), got {tau}")
    if tau == 0.0:
        if np.any(profile.coefficients[profile.N + 1:] > 0):
            raise InconsistentTauZero("tau = 0 forces a_m = 0 for every m >= 1")
        return Alpha0Result(profile.a(0), "profile", 0.0)
    return Alpha0Result(psi(profile, math.sqrt(tau)), "profile", tau)


def alpha0_reversible(profile: LimitProfile) -> Alpha0Result:
    """``1 - sum_{m>=1} (sqrt(a_m) - sqrt(a_-m))^2`` for reversible kernels."""
    gap = math.fsum(
        (math.sqrt(profile.a(m)) - math.sqrt(profile.a(-m))) ** 2 for m in range(1, profile.N + 1)
    )
    return Alpha0Result(1.0 - gap, "reversible", profile.tail_ratio)


def _beta(chain: BandChain, pi: StationaryDist, i: int, m: int) -> float:
    j = i + m
    if j < 0:
        return 0.0
    p = chain.entry(i, j)
    if p == 0.0:
        return 0.0
    # sqrt(P(i,j) P*(j,i)) = P(i,j) sqrt(pi(i)/pi(j))
    return p * math.sqrt(pi.ratio(i, j))


def alpha0_empirical(chain: BandChain, pi: StationaryDist, ell: int, i_max: int) -> Alpha0Result:
    """Window proxy ``sum_m max_{ell <= i <= i_max} beta_m(i)``.

    This is an estimate over a finite window, not a certified bound: it
    dominates the ``limsup`` only when each ``beta_m`` is eventually monotone.
    """
    if ell < chain.i0:
        raise InputError(f"ell={ell} must be at least i0={chain.i0}")
    if i_max < ell:
        raise InputError("need ell <= i_max")
    if ell >= pi.k or i_max + chain.N >= pi.k:
        raise OutOfWindow(f"window 0..{pi.k - 1} must cover {ell}..{i_max + chain.N}")
    sups = {}
    for m in range(-chain.N, chain.N + 1):
        sups[m] = max(_beta(chain, pi, i, m) for i in range(ell, i_max + 1))
    value = math.fsum(sups.values())
    return Alpha0Result(
        value, "empirical", None,
        detail={"ell": ell, "i_max": i_max, "sup_beta": sups, "window_estimate": True},
    )


def drift_ratios(chain: BandChain, pi: StationaryDist, i_max: int) -> np.ndarray:
    """``(PV)(i) / V(i) = sum_j P(i,j) sqrt(pi(i)/pi(j))`` for ``i = 0..i_max``."""
    if i_max + chain.reach >= pi.k:
        raise OutOfWindow(f"window 0..{pi.k - 1} must cover {i_max + chain.reach}")
    out = np.empty(i_max + 1)
    for i in range(i_max + 1):
        out[i] = math.fsum(p * math.sqrt(pi.ratio(i, j)) for j, p in chain.row(i).items())
    return out


def drift_constants(chain: BandChain, pi: StationaryDist, alpha: float, i_max: int) -> DriftCertificate:
    """Smallest ``L`` with ``PV <= alpha V + L`` on the probed states.

    The ratio ``(PV)/V`` must already sit below ``alpha`` over the last
    quarter of ``0..i_max``; otherwise ``alpha`` does not exceed the limit of
    the ratio and no finite ``L`` can exist.
    """
    ratios = drift_ratios(chain, pi, i_max)
    tail = ratios[(3 * (i_max + 1)) // 4:]
    if tail.max() > alpha + 1e-12:
        raise DriftViolatedAtTail(
            f"(PV)/V reaches {tail.max():.6g} > alpha={alpha:.6g} on the last quarter of the window"
        )
    with np.errstate(over="ignore"):
        V = np.exp(-0.5 * pi.log_weights[: i_max + 1])
        excess = V * (ratios - alpha)
    L = float(max(0.0, excess.max()))
    return DriftCertificate(alpha, L, i_max, float(tail.max()))
