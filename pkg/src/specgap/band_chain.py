"""Band-structured Markov kernels on the nonnegative integers.

A :class:`BandChain` is described by finitely many explicit boundary rows
(states ``i < i0``) and a row function valid for every ``i >= i0`` whose
support is contained in ``{i-N, ..., i+N}``.  Rows are produced lazily; no
global matrix is built except by truncation.

Invariant weights are held as logarithms so that fast-decaying targets
(e.g. Poisson) stay representable far into the tail.  Downstream formulas
only ever use ratios ``pi(i)/pi(j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import InconsistentTauZero, InputError, OutOfWindow, SingularSystem

ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-10

SparseRow = dict  # column -> probability
BandRow = Union[Sequence[float], Mapping[int, float]]

__all__ = [
    "BandChain",
    "LimitProfile",
    "StationaryDist",
    "ValidationReport",
    "row",
    "validate",
    "stationary_truncated",
    "adjoint_entry",
    "check_invariance",
    "is_reversible",
]


def _as_sparse(entries) -> dict:
    if isinstance(entries, Mapping):
        items = entries.items()
    else:
        items = entries
    out: dict = {}
    for j, p in items:
        j = int(j)
        out[j] = out.get(j, 0.0) + float(p)
    return out


@dataclass(frozen=True, eq=False)
class BandChain:
    """Banded Markov kernel on N = {0, 1, 2, ...}.

    Parameters
    ----------
    N
        Band half-width: for ``i >= i0``, ``P(i, j) = 0`` when ``|i - j| > N``.
    i0
        Boundary cutoff.  Rows ``0 .. i0-1`` are given explicitly.
    boundary_rows
        One sparse row (``{column: probability}`` or pairs) per state
        ``i < i0``.  Their support may extend beyond the band.
    band_row
        ``i -> probabilities`` for ``i >= i0``, either a sequence indexed by
        offset ``-N .. N`` or a mapping ``{offset: probability}``.  Mass at
        negative columns must be zero.
    """

    N: int
    i0: int
    boundary_rows: tuple
    band_row: Callable[[int], BandRow]
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.N) < 1:
            raise InputError(f"band half-width must be positive, got {self.N}")
        if int(self.i0) < 0:
            raise InputError(f"boundary cutoff must be nonnegative, got {self.i0}")
        rows = tuple(_as_sparse(r) for r in self.boundary_rows)
        if len(rows) != int(self.i0):
            raise InputError(f"expected {self.i0} boundary rows, got {len(rows)}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "i0", int(self.i0))
        object.__setattr__(self, "boundary_rows", rows)

    def raw_row(self, i: int) -> dict:
        """Row ``i`` as ``{column: probability}``, zeros and negative columns kept."""
        if i < 0:
            raise InputError(f"state must be nonnegative, got {i}")
        if i < self.i0:
            return dict(self.boundary_rows[i])
        values = self.band_row(i)
        if isinstance(values, Mapping):
            return {i + int(m): float(p) for m, p in values.items()}
        values = list(values)
        if len(values) != 2 * self.N + 1:
            raise InputError(
                f"band row {i} has {len(values)} entries, expected {2 * self.N + 1}"
            )
        return {i + m: float(p) for m, p in zip(range(-self.N, self.N + 1), values)}

    def row(self, i: int) -> dict:
        """Row ``i`` restricted to its nonzero entries on N."""
        cached = self._cache.get(i)
        if cached is None:
            cached = {j: p for j, p in sorted(self.raw_row(i).items()) if j >= 0 and p != 0.0}
            self._cache[i] = cached
        return dict(cached)

    def entry(self, i: int, j: int) -> float:
        if j < 0:
            return 0.0
        return self.row(i).get(j, 0.0)

    @property
    def reach(self) -> int:
        """Largest ``|i - j|`` over every nonzero entry (boundary rows included)."""
        r = self.N
        for i, brow in enumerate(self.boundary_rows):
            for j, p in brow.items():
                if p != 0.0:
                    r = max(r, abs(j - i))
        return r


def row(chain: BandChain, i: int) -> dict:
    """Sparse row ``{state: probability}`` of ``chain`` at state ``i``."""
    return chain.row(i)


@dataclass(frozen=True)
class LimitProfile:
    """Asymptotic increment probabilities ``a_{-N} .. a_N`` and tail ratio.

    ``coefficients[m + N]`` holds ``a_m``.
    """

    N: int
    coefficients: np.ndarray
    tail_ratio: float | None = None

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=float)
        if a.shape != (2 * self.N + 1,):
            raise InputError(f"expected {2 * self.N + 1} coefficients, got {a.shape}")
        if np.any(a < 0) or np.any(a > 1):
            raise InputError("profile coefficients must lie in [0, 1]")
        if abs(a.sum() - 1.0) > ROW_SUM_TOL:
            raise InputError(f"profile coefficients sum to {a.sum()!r}, not 1")
        tau = self.tail_ratio
        if tau is not None:
            if not 0.0 <= tau < 1.0:
                raise InputError(f"tail ratio must lie in [0, 1), got {tau}")
            if tau == 0.0 and np.any(a[self.N + 1:] > 0):
                raise InconsistentTauZero("tail ratio 0 requires a_m = 0 for every m >= 1")
        a.setflags(write=False)
        object.__setattr__(self, "coefficients", a)

    @classmethod
    def from_offsets(cls, coeffs: Mapping[int, float], tail_ratio=None) -> "LimitProfile":
        N = max(abs(int(m)) for m in coeffs)
        a = np.zeros(2 * N + 1)
        for m, v in coeffs.items():
            a[int(m) + N] = float(v)
        return cls(N, a, tail_ratio)

    def a(self, m: int) -> float:
        if abs(m) > self.N:
            return 0.0
        return float(self.coefficients[m + self.N])

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def with_tail_ratio(self, tau: float) -> "LimitProfile":
        return LimitProfile(self.N, self.coefficients, tau)


@dataclass(frozen=True)
class StationaryDist:
    """Invariant weights on the window ``{0 .. k-1}``, stored as logarithms."""

    log_weights: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        lw = np.array(self.log_weights, dtype=float)
        if lw.ndim != 1 or lw.size == 0:
            raise InputError("weights must be a nonempty vector")
        if not np.all(np.isfinite(lw)):
            raise InputError("weights must be strictly positive and finite")
        if self.normalized and abs(logsumexp(lw)) > 1e-10:
            raise InputError("normalized weights must sum to 1")
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def from_weights(cls, weights, normalized: bool | None = None) -> "StationaryDist":
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise InputError("weights must be strictly positive")
        if normalized is None:
            normalized = abs(w.sum() - 1.0) <= 1e-10
        return cls(np.log(w), normalized)

    @property
    def k(self) -> int:
        return self.log_weights.size

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def normalize(self) -> "StationaryDist":
        return StationaryDist(self.log_weights - logsumexp(self.log_weights), True)

    def _check(self, *states):
        for s in states:
            if not 0 <= s < self.k:
                raise OutOfWindow(f"state {s} outside window 0..{self.k - 1}")

    def ratio(self, i: int, j: int) -> float:
        """``pi(i) / pi(j)``."""
        self._check(i, j)
        return float(np.exp(self.log_weights[i] - self.log_weights[j]))

    def V(self, i: int) -> float:
        """Lyapunov weight ``pi(i)^(-1/2)`` (up to a constant if unnormalized)."""
        self._check(i)
        return float(np.exp(-0.5 * self.log_weights[i]))


@dataclass
class ValidationReport:
    checked_rows: int
    max_row_sum_deviation: float = 0.0
    row_sum_violations: list = field(default_factory=list)
    negativity_violations: list = field(default_factory=list)
    band_violations: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return (
            [("row_sum", *v) for v in self.row_sum_violations]
            + [("negative", *v) for v in self.negativity_violations]
            + [("band", *v) for v in self.band_violations]
        )

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(chain: BandChain, i_max: int, tol: float = ROW_SUM_TOL) -> ValidationReport:
    """Check stochasticity, nonnegativity and the band condition on rows ``0..i_max``."""
    if i_max < chain.i0:
        raise InputError(f"i_max={i_max} must be at least i0={chain.i0}")
    report = ValidationReport(checked_rows=i_max + 1)
    for i in range(i_max + 1):
        entries = chain.raw_row(i)
        total = 0.0
        for j, p in entries.items():
            if p < 0.0 or p > 1.0:
                report.negativity_violations.append((i, j, p))
            if p != 0.0 and (j < 0 or (i >= chain.i0 and abs(i - j) > chain.N)):
                report.band_violations.append((i, j, p))
            if j >= 0:
                total += p
        dev = abs(total - 1.0)
        report.max_row_sum_deviation = max(report.max_row_sum_deviation, dev)
        if dev > tol:
            report.row_sum_violations.append((i, total))
    return report


def _gth_log_weights(P: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman state reduction, back-substituted in log space."""
    A = np.array(P, dtype=float)
    k = A.shape[0]
    pivots = np.empty(k)
    for n in range(k - 1, 0, -1):
        s = A[n, :n].sum()
        if not s > 0.0:
            raise SingularSystem(f"state {n} cannot reach lower states; truncation is reducible")
        pivots[n] = s
        A[:n, :n] += np.outer(A[:n, n], A[n, :n]) / s
    logpi = np.zeros(k)
    with np.errstate(divide="ignore"):
        for n in range(1, k):
            logpi[n] = logsumexp(logpi[:n] + np.log(A[:n, n])) - np.log(pivots[n])
    if not np.all(np.isfinite(logpi)):
        raise SingularSystem("truncated chain is not irreducible")
    return logpi - logsumexp(logpi)


def stationary_truncated(chain: BandChain, k: int) -> StationaryDist:
    """Invariant distribution of the truncated-and-augmented matrix ``P_k``."""
    from .truncation import truncate

    if k <= chain.i0 + chain.N:
        raise InputError(f"window k={k} must exceed i0 + N = {chain.i0 + chain.N}")
    P = truncate(chain, k)
    pi = StationaryDist(_gth_log_weights(P), normalized=True)
    w = pi.weights
    residual = np.max(np.abs(w @ P - w))
    if residual > RESIDUAL_TOL:
        raise SingularSystem(f"fixed-point residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return pi


def adjoint_entry(chain: BandChain, pi: StationaryDist, i: int, j: int) -> float:
    """``P*(i, j) = pi(j) P(j, i) / pi(i)``."""
    pi._check(i, j)
    p = chain.entry(j, i)
    if p == 0.0:
        return 0.0
    return pi.ratio(j, i) * p


def _predecessors(chain: BandChain, i: int) -> list:
    cand = set(range(max(0, i - chain.N), i + chain.N + 1))
    cand.update(j for j in range(chain.i0) if chain.entry(j, i) != 0.0)
    return sorted(cand)


def check_invariance(chain: BandChain, pi: StationaryDist, i: int) -> float:
    """``|sum_j P(j, i) pi(j)/pi(i) - 1|`` over the predecessors ``j`` of ``i``."""
    total = 0.0
    for j in _predecessors(chain, i):
        pi._check(j)
        p = chain.entry(j, i)
        if p:
            total += p * pi.ratio(j, i)
    return abs(total - 1.0)


def is_reversible(
    chain: BandChain,
    pi: StationaryDist,
    i_max: int,
    tol: float = 1e-12,
    *,
    relative: bool = False,
) -> bool:
    """Detailed balance ``pi(i) P(i,j) = pi(j) P(j,i)`` on rows ``0..i_max``.

    With ``relative=True`` each defect is divided by ``max(pi(i), pi(j))``,
    which stays meaningful deep in a fast-decaying tail.
    """
    lw = pi.log_weights
    worst = 0.0
    for i in range(i_max + 1):
        for j, p in chain.row(i).items():
            if j == i:
                continue
            pi._check(i, j)
            back = chain.entry(j, i)
            scale = max(lw[i], lw[j])
            # pi(i) P(i,j) - pi(j) P(j,i), factored by max(pi(i), pi(j))
            defect = abs(np.exp(lw[i] - scale) * p - np.exp(lw[j] - scale) * back)
            if not relative:
                defect *= np.exp(scale)
            worst = max(worst, defect)
    return bool(worst <= tol)
