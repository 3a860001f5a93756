"""Independent reference computations for the test suite.

Nothing here calls into the package's numerical routines: exact rational
arithmetic (fractions) and arbitrary precision (mpmath) stand in for the
float code paths under test.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath

mpmath.mp.dps = 50


def leibniz_det(m) -> Fraction:
    """Determinant by permutation expansion, exact on the float inputs."""
    a = [[Fraction(float(x)) for x in row] for row in m]
    n = len(a)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i, j in enumerate(perm):
            prod *= a[i][j]
            if not prod:
                break
        total += -prod if inv % 2 else prod
    return total


def charpoly(m) -> list:
    """Coefficients (highest degree first) of ``det(x I - m)`` by the
    Faddeev-LeVerrier recursion in exact arithmetic."""
    a = [[Fraction(float(x)) for x in row] for row in m]
    n = len(a)
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        AM = [[sum(a[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        M = [[AM[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        AMk = [[sum(a[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(AMk[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def charpoly_roots(m) -> list:
    """Roots of the characteristic polynomial via Durand-Kerner at 50 digits."""
    coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in charpoly(m)]
    if len(coeffs) == 2:
        return [complex(-coeffs[1])]
    roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=200)
    return [complex(r) for r in roots]


def match_error(a, b) -> float:
    """Largest distance under the best one-to-one pairing (brute force, n <= 6)."""
    a, b = list(a), list(b)
    assert len(a) == len(b)
    best = math.inf
    for perm in itertools.permutations(range(len(b))):
        best = min(best, max(abs(a[i] - b[j]) for i, j in enumerate(perm)))
    return best


def tau_root(coefficients) -> float:
    """Root in (0, 1) of ``sum a_m t^-m = 1``: the polynomial
    ``t^N (psi(t) - 1)`` solved at 50 digits, trivial root 1 excluded."""
    assert len(coefficients) % 2 == 1, "pass a_-N .. a_N"
    N = (len(coefficients) - 1) // 2
    # t^N psi(t) = sum_m a_m t^(N - m); index by power N - m
    poly = [mpmath.mpf(0)] * (2 * N + 1)
    for m, a in zip(range(-N, N + 1), coefficients):
        poly[N - m] += mpmath.mpf(Fraction(a).numerator) / Fraction(a).denominator
    poly[N] -= 1
    # highest power first for polyroots
    hp = list(reversed(poly))
    while hp and hp[0] == 0:
        hp.pop(0)
    roots = mpmath.polyroots(hp, maxsteps=400, extraprec=200)
    real = [r.real for r in roots if abs(r.imag) < 1e-30 and 0 < r.real < 1 - mpmath.mpf(10) ** -20]
    assert len(real) == 1, real
    return float(real[0])


def psi_mp(coefficients, t) -> mpmath.mpf:
    N = (len(coefficients) - 1) // 2
    t = mpmath.mpf(t)
    return mpmath.fsum(mpmath.mpf(a) * t ** (-m) for m, a in zip(range(-N, N + 1), coefficients))


def bdmc_weights_exact(p, q, r, r0, k) -> list:
    """Invariant law of the constant-rate birth-and-death chain on ``0..k-1``
    normalized on the window, as Fractions."""
    p, q, r0 = Fraction(p), Fraction(q), Fraction(r0)
    w = [Fraction(1), (1 - r0) / p]
    for _ in range(2, k):
        w.append(w[-1] * q / p)
    s = sum(w[:k])
    return [x / s for x in w[:k]]


def mp_eigenvalues(m) -> list:
    """All eigenvalues at 50 digits (mpmath QR, independent of LAPACK)."""
    A = mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in m])
    ev = mpmath.eig(A, left=False, right=False)
    return [complex(e) for e in ev]


def two_state_rho(a, b) -> float:
    return abs(1 - a - b)


def mh_alpha0_closed(q, tau) -> float:
    return 1 - q * (1 - math.sqrt(tau)) ** 2


def bdmc_exact_rate(p, q, r0) -> float:
    return abs(r0 + p * (1 - r0) / (r0 - 1 + q))
