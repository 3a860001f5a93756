"""
Poisson target: sweeping the proposal weight
============================================

Random-walk Metropolis for a Poisson(1) target. The limit profile gives
alpha0 = 1 - q, but the truncations settle well above it, on the closed
form 1 - q (3 - sqrt 5) / 2. For this chain P = I - qG with G fixed, so the
rate is monotone in q.
"""

import math

import numpy as np

from specgap.models import mh_chain, poisson_target, proposal_rw
from specgap.truncation import parameter_sweep

target = poisson_target(1.0)
grid = [0.1, 0.2, 0.3, 0.38, 0.4, 0.5]


def builder(q):
    return mh_chain(target, proposal_rw(0.5, q)), 1 - q


for pt in parameter_sweep(builder, grid):
    est = pt.estimate
    closed = 1 - pt.parameter * (3 - math.sqrt(5)) / 2
    print(f"q = {pt.parameter:<5} alpha0 = {est.alpha0:.4f}  rho_{est.k_final:<3} = {est.rho:.4f}"
          f"  (1 - q(3-sqrt5)/2 = {closed:.4f})")

q = np.array(grid)
print("minimiser over the grid:", q[np.argmin(1 - q * (3 - math.sqrt(5)) / 2)])
