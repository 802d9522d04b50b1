"""Row sampling driven by leverage scores.

The deterministic rule keeps the shortest prefix of the descending score
order whose mass strictly exceeds sum - epsilon, which guarantees the
leverage mass left behind is below epsilon; that in turn makes the
sampled Gram a two-sided spectral approximation of the full Gram.
Randomized baselines (uniform, score-proportional) are provided for
comparison, plus the closed-form sample size prediction for power-law
score decay.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ThresholdUnreachable


@dataclass
class SampleSelection:
    """Rows chosen from a matrix plus how they were chosen.

    Attributes
    ----------
    indices : ndarray
        Distinct 0-based row indices, in selection order.
    n : int
        Row count of the source matrix.
    method : str
        One of "det", "det-approx", "uniform", "prop".
    epsilon : float or None
        Tail-mass target for the deterministic rules.
    alpha : float
        Score relative-error budget in play (0.0 when exact).
    scores_used : ndarray or None
        Score of each selected row under the profile that drove the
        selection; None for uniform sampling.
    """

    indices: np.ndarray
    n: int
    method: str
    epsilon: float = None
    alpha: float = 0.0
    scores_used: np.ndarray = field(default=None)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.intp)
        if self.indices.ndim != 1 or self.indices.size == 0:
            raise DimensionError("selection must hold at least one index")
        if np.unique(self.indices).size != self.indices.size:
            raise DimensionError("selection indices must be distinct")
        if self.indices.min() < 0 or self.indices.max() >= self.n:
            raise DimensionError(
                f"selection indices outside 0..{self.n - 1}")

    @property
    def s(self):
        return self.indices.size

    def apply(self, X):
        """Rows of X named by this selection, in selection order."""
        X = np.asarray(X)
        if X.shape[0] != self.n:
            raise DimensionError(
                f"matrix has {X.shape[0]} rows, selection expects {self.n}")
        return X[self.indices]


def _check_epsilon(epsilon):
    if not (0.0 < epsilon < 1.0) or not math.isfinite(epsilon):
        raise DimensionError(f"epsilon must lie in (0, 1), got {epsilon}")


def _prefix_length(cumulative, threshold, strict):
    """Smallest j >= 1 such that cumulative[j-1] exceeds the threshold.

    strict picks > versus >=.  Raises ThresholdUnreachable when no prefix
    qualifies; with scores summing to d and epsilon > 0 that cannot
    happen, but the guard stays for doctored inputs.
    """
    hit = cumulative > threshold if strict else cumulative >= threshold
    if not hit.any():
        raise ThresholdUnreachable(
            f"no prefix reaches threshold {threshold:.17g} "
            f"(total mass {cumulative[-1]:.17g})")
    return int(np.argmax(hit)) + 1


def _infer_dim(profile):
    d = int(round(float(np.sum(profile.scores))))
    return max(d, 1)


def sample_deterministic(profile, epsilon):
    """Top-score prefix whose mass strictly exceeds d - epsilon.

    Parameters
    ----------
    profile : LeverageProfile, mode "exact"
        Scores sum to the column dimension d.
    epsilon : float in (0, 1)
        Upper bound on the leverage mass left unselected.

    Returns
    -------
    SampleSelection of the s highest-score rows (ties by ascending row
    index), where s is the smallest prefix length with cumulative score
    > d - epsilon, floored at d.

    Notes
    -----
    By construction sum of unselected scores < epsilon, which yields the
    two-sided spectral sandwich (1 - epsilon) X^T X < Xs^T Xs <= X^T X.
    """
    if profile.mode != "exact":
        raise DimensionError(
            "sample_deterministic needs an exact profile; use "
            "sample_deterministic_approx for sketched scores")
    _check_epsilon(epsilon)
    d = _infer_dim(profile)
    cums = np.cumsum(profile.sorted_scores())
    s = _prefix_length(cums, d - epsilon, strict=True)
    s = max(s, min(d, profile.n))
    idx = profile.order[:s]
    return SampleSelection(
        indices=idx, n=profile.n, method="det", epsilon=float(epsilon),
        alpha=0.0, scores_used=profile.scores[idx])


def sample_deterministic_approx(profile, epsilon):
    """Deterministic prefix rule run on approximate scores.

    With scores accurate to relative error alpha, keeping estimated mass
    t - (1 - alpha) epsilon (non-strict) leaves true mass below epsilon,
    where t is the total estimated mass.  The prefix length is floored at
    the inferred dimension, like the exact rule.
    """
    if profile.mode != "approx":
        raise DimensionError(
            "sample_deterministic_approx needs an approximate profile")
    _check_epsilon(epsilon)
    alpha = profile.alpha
    if not (0.0 <= alpha < 1.0):
        raise DimensionError(f"profile alpha {alpha} outside [0, 1)")
    d = max(int(round(float(np.sum(profile.scores)) / (1.0 + alpha))), 1)
    cums = np.cumsum(profile.sorted_scores())
    t = cums[-1]
    s = _prefix_length(cums, t - (1.0 - alpha) * epsilon, strict=False)
    s = max(s, min(d, profile.n))
    idx = profile.order[:s]
    return SampleSelection(
        indices=idx, n=profile.n, method="det-approx", epsilon=float(epsilon),
        alpha=float(alpha), scores_used=profile.scores[idx])


def sample_uniform(n, s, seed):
    """s distinct rows of 0..n-1, uniformly at random, seeded."""
    if not (1 <= s <= n):
        raise DimensionError(f"need 1 <= s <= n, got s={s}, n={n}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=s, replace=False)
    return SampleSelection(indices=idx, n=n, method="uniform")


def sample_proportional(profile, s, seed):
    """s distinct rows drawn sequentially with probability proportional
    to score, renormalizing after each draw.

    Implemented as an exponential race (key_i = E_i / score_i with E_i
    standard exponentials, keep the s smallest keys), which draws from
    exactly that sequential-renormalization distribution in one pass.
    Zero-score rows are only taken once every positive score is used,
    ties broken by ascending row index.
    """
    n = profile.n
    if not (1 <= s <= n):
        raise DimensionError(f"need 1 <= s <= n, got s={s}, n={n}")
    scores = profile.scores
    if np.any(scores < 0):
        raise DimensionError("scores must be nonnegative")
    rng = np.random.default_rng(seed)
    race = rng.standard_exponential(n)
    with np.errstate(divide="ignore"):
        keys = np.where(scores > 0, race / scores, np.inf)
    idx = np.argsort(keys, kind="stable")[:s]
    return SampleSelection(
        indices=idx, n=n, method="prop", alpha=profile.alpha,
        scores_used=scores[idx])


def predict_sample_size(d, epsilon, eta, alpha=0.0):
    """Rows needed by the deterministic rule under power-law score decay.

    For scores decaying like rank^-(1 + eta), the selected prefix length
    is at most

        max( (2 d / epsilon)^(1/(1+eta)) - 1,
             (2 d / (eta epsilon))^(1/eta) - 1,
             d )

    When the profile is approximate with relative error alpha > 0, d is
    inflated to d (1 + alpha) and epsilon shrunk to (1 - alpha) epsilon
    throughout.  Returns the ceiling of the max.
    """
    if d < 1:
        raise DimensionError(f"d must be >= 1, got {d}")
    _check_epsilon(epsilon)
    if eta <= 0 or not math.isfinite(eta):
        raise DimensionError(f"eta must be positive, got {eta}")
    if not (0.0 <= alpha < 1.0):
        raise DimensionError(f"alpha must lie in [0, 1), got {alpha}")
    deff = d * (1.0 + alpha)
    eeff = (1.0 - alpha) * epsilon
    v1 = (2.0 * deff / eeff) ** (1.0 / (1.0 + eta)) - 1.0
    v2 = (2.0 * deff / (eta * eeff)) ** (1.0 / eta) - 1.0
    return int(math.ceil(max(v1, v2, deff)))


def selection_to_csv(selection, path):
    """Write a selection as CSV with columns rank, row_index, score_used.

    rank is the 0-based position in selection order; score_used is empty
    for uniform selections.
    """
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["rank", "row_index", "score_used"])
        for r, i in enumerate(selection.indices):
            if selection.scores_used is None:
                out.writerow([r, int(i), ""])
            else:
                out.writerow([r, int(i), f"{selection.scores_used[r]:.17g}"])
