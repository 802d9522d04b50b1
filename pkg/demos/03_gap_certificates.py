"""Certified optimality gaps for solve-on-a-sample.

The whole point of sampling before solving is that the loss is bounded a
priori. This script measures the actual dual-objective gap between the
full-data solve and the sampled solve, next to the two certified bounds:

  initial gap   g* - g_s(u0)   <  d log(s / (1 - eps))
  final gap     g* - g_s*      <  d log((1 + delta) / (1 - eps))

Both hold deterministically for the prefix rule; no randomness anywhere.
"""

import numpy as np

from mvce.datagen import DatasetSpec, generate
from mvce.leverage import exact_leverage
from mvce.linalg import gram, log_det
from mvce.sampling import sample_deterministic
from mvce.solver import (bound_final_gap, bound_initial_gap,
                         init_kumar_yildirim, solve_wolfe_atwood)

delta = 1e-9
spec = DatasetSpec(family="rotated-cauchy", n=50000, d=10, seed=3)
X = generate(spec)

full, cert = solve_wolfe_atwood(X, delta=delta)
print(f"full solve: g* = {full.g:.6f}, support {full.support.size}, "
      f"{cert.iterations} iterations")

profile = exact_leverage(X)
print(f"\n{'eps':>6} {'s':>7} {'init gap':>10} {'bound':>8} "
      f"{'final gap':>10} {'bound':>9}")
for eps in (0.5, 0.3, 0.1, 0.03):
    sel = sample_deterministic(profile, eps)
    Xs = sel.apply(X)
    u0 = init_kumar_yildirim(Xs)
    g0 = log_det(gram(Xs, weights=u0.weights))
    state, _ = solve_wolfe_atwood(Xs, u0=u0, delta=delta)
    init_gap = full.g - g0
    final_gap = full.g - state.g
    print(f"{eps:>6} {sel.s:>7} {init_gap:>10.4f} "
          f"{bound_initial_gap(X.shape[1], sel.s, eps):>8.3f} "
          f"{final_gap:>10.2e} {bound_final_gap(X.shape[1], eps, delta):>9.2e}")

print("""
Both measured columns sit under their bounds at every epsilon. The final
gap is typically orders of magnitude smaller than its bound: the bound
charges for the worst case where all epsilon of discarded leverage mass
was load-bearing, which heavy-tailed data never achieves.
""")

# The certificate attached to any solve is checkable after the fact:
# it states delta-feasibility (all points inside the blown-up ellipsoid)
# which any third party can recompute from u alone.
xi = np.einsum("ij,ij->i", X @ np.linalg.inv(full.M), X)
print(f"certificate check by hand: max xi / d = {xi.max() / X.shape[1]:.12f} "
      f"(claim: <= 1 + {delta})")
