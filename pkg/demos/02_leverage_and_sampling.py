"""Leverage scores and the deterministic prefix rule.

Leverage scores measure how much each row matters to the column space.
Keeping the highest-leverage rows until the leftover mass drops below
epsilon gives a subsample whose Gram matrix is spectrally sandwiched
between (1 - epsilon) X^T X and X^T X, so anything solved on the sample
transfers back to the full matrix with a controlled loss.
"""

import numpy as np

from mvce.datagen import DatasetSpec, generate
from mvce.leverage import exact_leverage
from mvce.linalg import extreme_gen_eigs, gram
from mvce.sampling import predict_sample_size, sample_deterministic

n, d = 20000, 8

for family in ("gaussian", "rotated-cauchy", "power-law-leverage"):
    X = generate(DatasetSpec(family=family, n=n, d=d, seed=0))
    profile = exact_leverage(X)
    scores = profile.sorted_scores()
    print(f"{family}: scores sum to {scores.sum():.6f} (= d), "
          f"top score {scores[0]:.4f}, median {np.median(scores):.2e}")

    for eps in (0.5, 0.1, 0.02):
        sel = sample_deterministic(profile, eps)
        Xs = sel.apply(X)
        lmin, lmax = extreme_gen_eigs(gram(Xs), gram(X))
        print(f"  eps={eps:<4}: kept {sel.s:>6} rows ({100 * sel.s / n:5.1f}%)"
              f"  eigenvalue range [{lmin:.4f}, {lmax:.4f}]"
              f"  guarantee [{1 - eps}, 1]")
    print()

# How fast heavy tails pay off: under power-law score decay with exponent
# -(1+eta), the prefix size needed for tail mass epsilon is predictable
# in closed form, independent of n.
print("predicted sample sizes, d=20:")
for eta in (0.5, 1.0, 2.0):
    sizes = [predict_sample_size(20, eps, eta) for eps in (0.5, 0.1, 0.02)]
    print(f"  eta={eta}: s = {sizes} for eps = [0.5, 0.1, 0.02]")

# The prediction is the scaling story; the measured prefix on a generated
# power-law dataset follows the same curve.
X = generate(DatasetSpec(family="power-law-leverage", n=n, d=20, seed=1,
                         params={"eta": 1.0}))
profile = exact_leverage(X)
measured = [sample_deterministic(profile, eps).s for eps in (0.5, 0.1, 0.02)]
print(f"measured on generated data (eta=1): s = {measured}")
