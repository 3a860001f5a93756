"""Dense real eigenvalues without LAPACK's eigen drivers.

General path: diagonal balancing, Householder reduction to upper Hessenberg
form, then Francis implicit double-shift QR with deflation.  Tridiagonal
matrices whose paired off-diagonal products are nonnegative (every
truncated birth-and-death or nearest-neighbour kernel) are similar to a
symmetric tridiagonal matrix and go through Sturm-count bisection instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import InputError, NoConvergence

__all__ = [
    "Spectrum",
    "SpectrumDiagnostics",
    "eigenvalues",
    "spectrum_checks",
    "balance",
    "hessenberg",
    "symmetric_tridiagonal_eigenvalues",
    "DEFAULT_MAX_ORDER",
]

DEFAULT_MAX_ORDER = 1024
SWEEPS_PER_ORDER = 30
PAIRING_TOL = 1e-10
DET_CHECK_MAX_ORDER = 16

_EPS = np.finfo(float).eps
_RADIX = 2.0


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    iterations: int
    trace_gap: float
    det_gap: float | None
    method: str = "francis"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if _pairing_violations(v):
            raise NoConvergence("complex eigenvalues are not paired with their conjugates")

    def __len__(self):
        return self.values.size

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class SpectrumDiagnostics:
    trace_gap: float
    trace_tol: float
    det_gap: float | None
    pairing_violations: int
    perron_distance: float
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def _as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def _pairing_violations(values: np.ndarray, tol: float = PAIRING_TOL) -> int:
    cplx = values[np.abs(values.imag) > tol]
    if cplx.size == 0:
        return 0
    pos = np.sort_complex(cplx[cplx.imag > 0])
    neg = np.sort_complex(np.conj(cplx[cplx.imag < 0]))
    if pos.size != neg.size:
        return abs(pos.size - neg.size)
    return int(np.sum(np.abs(pos - neg) > tol * np.maximum(1.0, np.abs(pos))))


# -- reductions --------------------------------------------------------------

def balance(m) -> tuple[np.ndarray, np.ndarray]:
    """Power-of-two diagonal scaling that evens out row and column norms.

    Returns ``(D^-1 M D, diag(D))``.  Exact in floating point, so the
    spectrum is untouched.
    """
    a = _as_matrix(m)
    n = a.shape[0]
    scale = np.ones(n)
    for _ in range(100):
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g, f, s = r / _RADIX, 1.0, c + r
            while c < g:
                f *= _RADIX
                c *= _RADIX * _RADIX
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= _RADIX * _RADIX
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
                scale[i] *= f
        if done:
            break
    return a, scale


def hessenberg(m) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections."""
    a = _as_matrix(m)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(math.hypot(x[0], tail), x[0])
        v /= np.linalg.norm(v)
        a[k + 1:, k:] -= 2.0 * np.outer(v, v @ a[k + 1:, k:])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v)
        a[k + 2:, k] = 0.0
    return a


# -- Francis double-shift QR -------------------------------------------------

@njit(cache=True)
def _francis(a, max_sweeps):
    """Eigenvalues of the Hessenberg matrix ``a`` (overwritten).

    Classic hqr layout: deflate from the bottom, take the eigenvalues of
    the trailing 2x2 block as the double shift, and chase the 3x3 bulge
    with Householder reflectors.  Exceptional shifts every ten stalled
    iterations.  Returns ``(wr, wi, sweeps)``; ``sweeps = -1`` signals
    that the budget ran out.
    """
    n = a.shape[0]
    eps = 2.220446049250313e-16
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
    nn = n - 1
    t = 0.0
    sweeps = 0
    x = y = z = w = p = q = r = s = 0.0
    while nn >= 0:
        its = 0
        while True:
            # look for a negligible subdiagonal entry
            l = nn
            while l > 0:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= eps * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                return wr, wi, -1
            if its > 0 and its % 10 == 0:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            # find two consecutive small subdiagonal entries
            m = nn - 2
            while True:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= eps * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            # bulge chase
            for k in range(m, nn):
                last = k == nn - 1
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0 if last else a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    h = a[k, j] + q * a[k + 1, j]
                    if not last:
                        h += r * a[k + 2, j]
                        a[k + 2, j] -= h * z
                    a[k + 1, j] -= h * y
                    a[k, j] -= h * x
                top = min(nn, k + 3)
                for i in range(l, top + 1):
                    h = x * a[i, k] + y * a[i, k + 1]
                    if not last:
                        h += z * a[i, k + 2]
                        a[i, k + 2] -= h * r
                    a[i, k + 1] -= h * q
                    a[i, k] -= h
    return wr, wi, sweeps


# -- symmetric tridiagonal path ----------------------------------------------

def _tridiagonal_products(a: np.ndarray) -> np.ndarray | None:
    """Off-diagonal products ``a[i,i+1] a[i+1,i]`` if ``a`` is tridiagonal
    with all of them nonnegative, else ``None``."""
    n = a.shape[0]
    if n < 3:
        return None
    if np.any(np.triu(a, 2)) or np.any(np.tril(a, -2)):
        return None
    prod = np.diag(a, 1) * np.diag(a, -1)
    if np.any(prod < 0):
        return None
    return prod


def _sturm_counts(d: np.ndarray, e2: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues below each entry of ``x``."""
    q = d[0] - x
    q[np.abs(q) < pivmin] = -pivmin
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = (d[i] - x) - e2[i - 1] / q
        q[np.abs(q) < pivmin] = -pivmin
        count += q < 0
    return count


def symmetric_tridiagonal_eigenvalues(d, e2) -> tuple[np.ndarray, int]:
    """Eigenvalues (ascending) of the symmetric tridiagonal matrix with
    diagonal ``d`` and squared off-diagonal ``e2``, by bisection.

    All ``n`` bisections run side by side; each step costs one Sturm
    sequence evaluated at ``n`` points.
    """
    d = np.asarray(d, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    n = d.size
    if n == 1:
        return d.copy(), 0
    e = np.sqrt(e2)
    radius = np.zeros(n)
    radius[:-1] += e
    radius[1:] += e
    lo = float((d - radius).min())
    hi = float((d + radius).max())
    span = max(abs(lo), abs(hi), np.finfo(float).tiny)
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max()))
    tol = 4.0 * _EPS * span
    lo_v = np.full(n, lo)
    hi_v = np.full(n, hi)
    idx = np.arange(n)
    its = 0
    while its < 200 and np.max(hi_v - lo_v) > tol:
        mid = 0.5 * (lo_v + hi_v)
        below = _sturm_counts(d, e2, mid, pivmin) > idx
        hi_v = np.where(below, mid, hi_v)
        lo_v = np.where(below, lo_v, mid)
        its += 1
    return 0.5 * (lo_v + hi_v), its


# -- front end ----------------------------------------------------------------

def _trace_tol(a: np.ndarray) -> float:
    n = a.shape[0]
    return 1e-8 * n * max(float(np.abs(a).sum(axis=1).max()), 1.0)


def _det_gap(a: np.ndarray, values: np.ndarray) -> float | None:
    if a.shape[0] > DET_CHECK_MAX_ORDER:
        return None
    det = np.linalg.det(a)
    prod = np.prod(values)
    return float(abs(prod - det) / max(abs(det), 1e-300)) if det != 0 else float(abs(prod))


def eigenvalues(m, *, balance_first: bool = True, max_order: int = DEFAULT_MAX_ORDER,
                tridiagonal: str = "auto") -> Spectrum:
    """All eigenvalues of a dense real matrix.

    ``tridiagonal="auto"`` sends sign-symmetric tridiagonal input to the
    bisection path; ``"never"`` forces the general QR path.
    """
    a = _as_matrix(m)
    n = a.shape[0]
    if n > max_order:
        raise InputError(f"order {n} exceeds the configured cap {max_order}")
    if tridiagonal not in ("auto", "never"):
        raise InputError("tridiagonal must be 'auto' or 'never'")
    trace = float(np.trace(a))
    if n == 1:
        vals, its, method = np.array([a[0, 0]], dtype=complex), 0, "trivial"
    else:
        e2 = _tridiagonal_products(a) if tridiagonal == "auto" else None
        if e2 is not None:
            vals, its = symmetric_tridiagonal_eigenvalues(np.diag(a), e2)
            vals = vals.astype(complex)
            method = "tridiagonal-bisection"
        else:
            h = balance(a)[0] if balance_first else a.copy()
            wr, wi, its = _francis(hessenberg(h), SWEEPS_PER_ORDER * n)
            if its < 0:
                raise NoConvergence(f"no convergence after {SWEEPS_PER_ORDER * n} QR sweeps (order {n})")
            vals = wr + 1j * wi
            method = "francis"
    order = np.lexsort((vals.imag, -vals.real))
    vals = vals[order]
    return Spectrum(
        vals, its,
        trace_gap=float(abs(vals.sum().real - trace)),
        det_gap=_det_gap(a, vals),
        method=method,
    )


def _det_exact(a: np.ndarray) -> float:
    """Determinant by cofactor expansion (used only for small orders)."""
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    if n == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    total = 0.0
    for j in range(n):
        if a[0, j] == 0.0:
            continue
        minor = np.delete(a[1:], j, axis=1)
        total += (-1) ** j * a[0, j] * _det_exact(minor)
    return total


def spectrum_checks(m, s: Spectrum) -> SpectrumDiagnostics:
    """Trace and determinant consistency, conjugate pairing, Perron root."""
    a = _as_matrix(m)
    values = np.asarray(s.values, dtype=complex)
    issues = []
    trace_gap = float(abs(values.sum() - np.trace(a)))
    tol = _trace_tol(a)
    if values.size != a.shape[0]:
        issues.append(f"{values.size} eigenvalues for order {a.shape[0]}")
    if trace_gap > tol:
        issues.append(f"trace gap {trace_gap:.3e} exceeds {tol:.3e}")
    det_gap = None
    if a.shape[0] <= 8:
        det = _det_exact(a)
        prod = np.prod(values)
        det_gap = float(abs(prod - det) / abs(det)) if det != 0 else float(abs(prod))
        if det_gap > 1e-6:
            issues.append(f"determinant gap {det_gap:.3e}")
    pairing = _pairing_violations(values)
    if pairing:
        issues.append(f"{pairing} unpaired complex eigenvalues")
    perron = float(np.min(np.abs(values - 1.0))) if values.size else math.inf
    rows = a.sum(axis=1)
    if np.all(a >= 0) and np.allclose(rows, 1.0, atol=1e-12) and perron > 1e-8:
        issues.append(f"stochastic matrix but no eigenvalue within 1e-8 of 1 (closest {perron:.3e})")
    return SpectrumDiagnostics(trace_gap, tol, det_gap, pairing, perron, issues)
