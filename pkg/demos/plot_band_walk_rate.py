"""
Convergence rate of a band random walk
======================================

A walk on the non-negative integers that can jump down two steps and up
one. Far from the origin it behaves like a fixed random walk, and the
generating function of that limit fixes a ceiling alpha0 on the rate.
"""

import math

from specgap.models import G2D1_COEFFICIENTS, rw_g2d1, rw_profile
from specgap.spectral import alpha0_from_profile, solve_tau
from specgap.truncation import estimate_rho2

# limit profile (a_-2, a_-1, a_0, a_1) = (1/2, 1/3, 0, 1/6)
prof = rw_profile(2, 1, G2D1_COEFFICIENTS)
tau = solve_tau(prof)
alpha0 = alpha0_from_profile(prof, tau).value
print(f"tau    = {tau:.10f}   closed form {(math.sqrt(37) - 5) / 6:.10f}")
print(f"alpha0 = {alpha0:.6f}")

# the boundary rows decide whether the true rate sits below alpha0
for a in (0.5, 0.1, 0.02):
    est = estimate_rho2(rw_g2d1(a, a), alpha0, similarity=math.sqrt(tau))
    print(f"a = b = {a:<5} rho_{est.k_final} = {est.rho:.6f}  verdict {est.verdict}")
