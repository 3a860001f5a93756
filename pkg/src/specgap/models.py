"""Constructors for the three model families.

* random walks with bounded increments (``rw_chain``, ``rw_g2d1``);
* birth-and-death chains (``bdmc_chain`` and its closed-form invariant law);
* Metropolis-Hastings kernels built from a banded proposal and a target
  known only through successor ratios ``pi(i+1)/pi(i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .band_chain import ROW_SUM_TOL, BandChain, LimitProfile, StationaryDist
from .errors import (
    InputError,
    InvalidCoefficients,
    NegativeDiagonal,
    NotPositiveRecurrent,
    ParameterDomain,
)

__all__ = [
    "BdmcSpec",
    "ProposalKernel",
    "TargetRatios",
    "RateBound",
    "rw_chain",
    "rw_g2d1",
    "rw_profile",
    "bdmc_chain",
    "bdmc_profile",
    "bdmc_stationary",
    "mh_chain",
    "proposal_rw",
    "mh_limit_profile",
    "bdmc_rate_bound",
    "poisson_target",
    "linear_geometric_target",
    "G2D1_COEFFICIENTS",
]

# a_{-2}, a_{-1}, a_0, a_1 of the two-down/one-up walk
G2D1_COEFFICIENTS = (1 / 2, 1 / 3, 0.0, 1 / 6)

RECURRENCE_MARGIN = 1e-9


# -- random walks with bounded increments -----------------------------------

def _check_stochastic_row(row: Mapping[int, float], label: str):
    if any(p < 0 or p > 1 for p in row.values()):
        raise InvalidCoefficients(f"{label}: entries must lie in [0, 1]")
    if any(j < 0 for j, p in row.items() if p):
        raise InvalidCoefficients(f"{label}: negative column")
    if abs(sum(row.values()) - 1.0) > ROW_SUM_TOL:
        raise InvalidCoefficients(f"{label}: sums to {sum(row.values())!r}")


def rw_chain(g: int, d: int, a: Sequence[float], boundary: Sequence[Mapping[int, float]]) -> BandChain:
    """Walk with i.d. increments in ``{-g..d}`` away from the boundary.

    ``a`` lists ``a_{-g} .. a_d``; ``boundary`` gives the rows of states
    ``0 .. g-1`` as ``{column: probability}``.
    """
    g, d = int(g), int(d)
    if g < 1 or d < 1:
        raise InvalidCoefficients("g and d must be positive integers")
    a = [float(x) for x in a]
    if len(a) != g + d + 1:
        raise InvalidCoefficients(f"expected {g + d + 1} coefficients a_-{g}..a_{d}, got {len(a)}")
    if any(x < 0 or x > 1 for x in a):
        raise InvalidCoefficients("coefficients must lie in [0, 1]")
    if not (a[0] > 0 and a[-1] > 0):
        raise InvalidCoefficients("a_-g and a_d must be positive")
    if abs(math.fsum(a) - 1.0) > ROW_SUM_TOL:
        raise InvalidCoefficients(f"coefficients sum to {math.fsum(a)!r}, not 1")
    if len(boundary) != g:
        raise InvalidCoefficients(f"expected {g} boundary rows, got {len(boundary)}")
    rows = [dict(r) for r in boundary]
    for i, r in enumerate(rows):
        _check_stochastic_row(r, f"boundary row {i}")
    increments = {m: p for m, p in zip(range(-g, d + 1), a)}
    return BandChain(max(g, d), g, rows, lambda i: increments, name=f"rw(g={g},d={d})")


def rw_g2d1(a: float, b: float, coefficients: Sequence[float] = G2D1_COEFFICIENTS) -> BandChain:
    """Two-down/one-up walk with boundary rows ``(a, 1-a)`` and ``(b, 0, 1-b)``."""
    if not (0 < a < 1 and 0 < b < 1):
        raise InvalidCoefficients("boundary parameters a, b must lie in (0, 1)")
    boundary = [{0: a, 1: 1 - a}, {0: b, 2: 1 - b}]
    return rw_chain(2, 1, coefficients, boundary)


def rw_profile(g: int, d: int, a: Sequence[float]) -> LimitProfile:
    return LimitProfile.from_offsets({m: p for m, p in zip(range(-g, d + 1), a)})


# -- birth-and-death chains --------------------------------------------------

@dataclass(frozen=True)
class BdmcSpec:
    """Birth-and-death rates: down ``p(i)`` (i >= 1), stay ``r(i)``, up ``q(i)``."""

    p: Callable[[int], float]
    r: Callable[[int], float]
    q: Callable[[int], float]

    @classmethod
    def constant(cls, p: float, q: float, r: float, r0: float) -> "BdmcSpec":
        """State-independent rates with ``r_0 = r0`` and ``q_0 = 1 - r0``."""
        return cls(
            p=lambda i: p,
            r=lambda i: r0 if i == 0 else r,
            q=lambda i: 1.0 - r0 if i == 0 else q,
        )

    def check(self, i_max: int = 200):
        if not self.r(0) < 1:
            raise InvalidCoefficients("r_0 must be < 1")
        if abs(self.r(0) + self.q(0) - 1.0) > ROW_SUM_TOL:
            raise InvalidCoefficients("r_0 + q_0 must equal 1")
        for i in range(1, i_max + 1):
            p, r, q = self.p(i), self.r(i), self.q(i)
            if not (0 < p < 1 and 0 < q < 1 and 0 <= r < 1):
                raise InvalidCoefficients(f"state {i}: need 0 < p_i, q_i < 1 and r_i in [0, 1)")
            if abs(p + r + q - 1.0) > ROW_SUM_TOL:
                raise InvalidCoefficients(f"state {i}: p_i + r_i + q_i = {p + r + q!r}")


def bdmc_chain(spec: BdmcSpec) -> BandChain:
    spec.check()
    boundary = [{0: spec.r(0), 1: spec.q(0)}]
    return BandChain(1, 1, boundary, lambda i: (spec.p(i), spec.r(i), spec.q(i)), name="bdmc")


def bdmc_profile(p: float, r: float, q: float) -> LimitProfile:
    return LimitProfile(1, np.array([p, r, q]))


def bdmc_stationary(spec: BdmcSpec, k: int) -> StationaryDist:
    """Closed-form invariant law on ``{0..k-1}``, normalized by the partial sum.

    ``pi(i)`` is proportional to ``prod_{j=1..i} q_{j-1} / p_j``.  Positive
    recurrence is screened by requiring the largest ratio over the upper
    half of the window to stay below ``1 - 1e-9``.
    """
    if k < 2:
        raise InputError("window must contain at least two states")
    ratios = np.array([spec.q(j - 1) / spec.p(j) for j in range(1, k)])
    tail = ratios[(k - 1) // 2:]
    if tail.max() >= 1.0 - RECURRENCE_MARGIN:
        raise NotPositiveRecurrent(
            f"successor ratio q_(j-1)/p_j reaches {tail.max():.6g} >= 1 on the probe window"
        )
    logw = np.concatenate([[0.0], np.cumsum(np.log(ratios))])
    return StationaryDist(logw - logsumexp(logw), normalized=True)


class RateBound(NamedTuple):
    value: float
    is_exact: bool
    case: str


def bdmc_rate_bound(p: float, q: float, r: float, r0: float) -> RateBound:
    """Convergence-rate value or bound for the state-independent BDMC.

    Returns the exact rate ``|r0 + p(1-r0)/(r0-1+q)|`` where it applies and
    the bound ``r + 2 sqrt(pq)`` otherwise.
    """
    if min(p, q, r) < 0 or abs(p + q + r - 1.0) > ROW_SUM_TOL:
        raise ParameterDomain("need p, q, r >= 0 with p + q + r = 1")
    if not p > q > 0:
        raise ParameterDomain("need p > q > 0")
    if not 0 < r0 < 1:
        raise ParameterDomain("need r0 in (0, 1)")
    spq = math.sqrt(p * q)
    bound = r + 2 * spq
    beta0 = 1 - q - spq
    if r0 >= beta0:
        return RateBound(bound, False, "r0 >= beta0")
    if 2 * p <= (1 - q + spq) ** 2:
        return RateBound(bound, False, "2p <= (1-q+sqrt(pq))^2")
    beta1 = p - spq - math.sqrt(r * (r + 2 * spq))
    if r0 <= beta1:
        return RateBound(abs(r0 + p * (1 - r0) / (r0 - 1 + q)), True, "r0 <= beta1")
    return RateBound(bound, False, "beta1 < r0 < beta0")


# -- Metropolis-Hastings -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProposalKernel(BandChain):
    symmetric_support: bool = True


@dataclass(frozen=True)
class TargetRatios:
    """Target law known through ``ratio(i) = pi(i+1)/pi(i)``; ``tau`` is its limit."""

    ratio: Callable[[int], float]
    tau: float | None = None
    name: str = ""

    def between(self, i: int, j: int) -> float:
        """``pi(j) / pi(i)``."""
        if j == i:
            return 1.0
        lo, hi = min(i, j), max(i, j)
        prod = 1.0
        for s in range(lo, hi):
            rs = self.ratio(s)
            if not rs > 0:
                raise InvalidCoefficients(f"target ratio at {s} must be positive, got {rs}")
            prod *= rs
        return prod if j > i else 1.0 / prod

    def stationary(self, k: int) -> StationaryDist:
        """Exact target on ``{0..k-1}``, normalized by the window mass."""
        r = np.array([self.ratio(s) for s in range(k - 1)], dtype=float)
        if np.any(r <= 0):
            raise InvalidCoefficients("target ratios must be positive")
        logw = np.concatenate([[0.0], np.cumsum(np.log(r))])
        return StationaryDist(logw - logsumexp(logw), normalized=True)


def poisson_target(lam: float = 1.0) -> TargetRatios:
    return TargetRatios(lambda i: lam / (i + 1), 0.0, name=f"poisson({lam:g})")


def linear_geometric_target(tau: float) -> TargetRatios:
    """``pi(i)`` proportional to ``(i+1) tau^i``."""
    if not 0 < tau < 1:
        raise ParameterDomain("tau must lie in (0, 1)")
    return TargetRatios(lambda i: tau * (i + 2) / (i + 1), tau, name=f"(i+1)tau^i, tau={tau:g}")


def proposal_rw(r: float, q: float) -> ProposalKernel:
    """Lazy nearest-neighbour proposal: ``Q(0,0)=r``, ``Q(i,i+-1)=q`` for i >= 1."""
    if not 0 < r < 1:
        raise ParameterDomain(f"r must lie in (0, 1), got {r}")
    if not 0 < q <= 0.5:
        raise ParameterDomain(f"q must lie in (0, 1/2], got {q}")
    return ProposalKernel(
        1, 1, [{0: r, 1: 1 - r}], lambda i: (q, 1 - 2 * q, q),
        name=f"rw-proposal(r={r:g},q={q:g})", symmetric_support=True,
    )


def mh_chain(target: TargetRatios, proposal: ProposalKernel) -> BandChain:
    """Metropolis-Hastings kernel for ``target`` with proposal ``proposal``.

    Off-diagonal: ``min(Q(i,j), pi(j) Q(j,i) / pi(i))``; the diagonal takes
    the remaining mass.
    """
    if not getattr(proposal, "symmetric_support", True):
        raise InputError("proposal must satisfy Q(i,j) = 0 <=> Q(j,i) = 0")

    def full_row(i: int) -> dict:
        out = {}
        moved = 0.0
        for j, qij in proposal.row(i).items():
            if j == i:
                continue
            qji = proposal.entry(j, i)
            if qji == 0.0:
                raise InputError(f"proposal support not symmetric at ({i}, {j})")
            pij = min(qij, target.between(i, j) * qji)
            out[j] = pij
            moved += pij
        stay = 1.0 - moved
        if stay < -1e-12:
            raise NegativeDiagonal(f"diagonal at state {i} is {stay:.3e}")
        out[i] = max(stay, 0.0)
        return out

    boundary = [full_row(i) for i in range(proposal.i0)]

    def band_row(i: int) -> dict:
        return {j - i: p for j, p in full_row(i).items()}

    name = f"mh[{target.name or 'target'} | {proposal.name or 'proposal'}]"
    return BandChain(proposal.N, proposal.i0, boundary, band_row, name=name)


def mh_limit_profile(q_m: Sequence[float] | Mapping[int, float], tau: float, N: int) -> LimitProfile:
    """Limits ``p_k = min(q_k, tau^k q_{-k})`` of the M-H kernel built on ``q_m``."""
    if not 0 <= tau < 1:
        raise ParameterDomain("tau must lie in [0, 1)")
    if isinstance(q_m, Mapping):
        qd = {int(m): float(v) for m, v in q_m.items()}
    else:
        qd = {m: float(v) for m, v in zip(range(-N, N + 1), q_m)}
    qv = lambda m: qd.get(m, 0.0)  # noqa: E731
    p = np.zeros(2 * N + 1)
    for k in range(-N, N + 1):
        if k == 0:
            continue
        back = qv(-k)
        if back == 0.0:
            scaled = 0.0
        elif tau == 0.0:
            scaled = 0.0 if k > 0 else math.inf
        else:
            scaled = tau ** k * back
        p[k + N] = min(qv(k), scaled)
    p[N] = 1.0 - (p[:N].sum() + p[N + 1:].sum())
    return LimitProfile(N, p, tau)
