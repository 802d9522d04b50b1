"""Dual ascent solvers for the minimum-volume covering ellipsoid.

The dual problem maximizes g(u) = log det sum_i u_i x_i x_i^T over the
probability simplex.  Writing M(u) for that weighted Gram and
xi_i = x_i^T M(u)^-1 x_i, a design u is

  delta-primal-feasible    when max_i xi_i <= (1 + delta) d,
  delta-approx-optimal     when additionally xi_i >= (1 - delta) d on
                           every row carrying weight.

Either condition certifies g(u) >= g* - d log(1 + delta): scaling
M(u)^-1 by d / max xi gives a primal-feasible ellipsoid matrix whose
objective differs from g(u) by at most d log(1 + delta), and weak
duality does the rest.  That certified gap is what Certificate.gap_bound
records.

Two solvers are provided: Wolfe-Atwood coordinate ascent (rank-one
updates, away steps, drop steps) and the multiplicative fixed-point
iteration u_i <- u_i xi_i / d as a slow but simple baseline.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, MaxIterations, NotFeasible, RankDeficient
from .linalg import as_data_matrix, cholesky_spd, gram, inv_spd, log_det

# Weights at or below this are treated as zero (off the support).
SUPPORT_TOL = 1e-14


@dataclass
class DesignVector:
    """A point of the probability simplex over the rows of a matrix."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        if w.ndim != 1 or w.size == 0:
            raise DimensionError("weights must be a nonempty vector")
        if not np.isfinite(w).all():
            raise DimensionError("weights must be finite")
        if np.any(w < -1e-12):
            raise DimensionError("weights must be nonnegative")
        np.clip(w, 0.0, None, out=w)
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise DimensionError(
                f"weights must sum to 1, got {float(w.sum()):.17g}")
        self.weights = w

    @property
    def m(self):
        return self.weights.size

    @property
    def support(self):
        return np.flatnonzero(self.weights > SUPPORT_TOL)


@dataclass
class DualState:
    """Solver state: design u plus cached factorization products.

    M is the weighted Gram sum u_i x_i x_i^T, Minv its inverse, xi the
    vector x_i^T Minv x_i, and g = log det M.  After refactor() these are
    exact to rounding; between refactorizations they drift by the
    accumulated rank-one update error, which the solvers keep below 1e-8
    on g.
    """

    u: np.ndarray
    M: np.ndarray
    Minv: np.ndarray
    xi: np.ndarray
    g: float

    @property
    def support(self):
        return np.flatnonzero(self.u > SUPPORT_TOL)


@dataclass
class Certificate:
    """What a design vector provably satisfies.

    kind is "approx-optimal" or "primal-feasible"; gap_bound is the
    proven bound on g* - g(u), namely d log(1 + delta).
    """

    kind: str
    delta: float
    gap_bound: float
    iterations: int = 0
    runtime_ms: float = 0.0


def init_khachiyan(m):
    """Uniform design 1/m on every row."""
    if m < 1:
        raise DimensionError(f"need at least one row, got m={m}")
    return DesignVector(np.full(m, 1.0 / m))


def init_kumar_yildirim(X, seed=0):
    """Equal weights on at most 2d points found by directional sweeps.

    For k = 1..d, draw a random direction, orthogonalize it against the
    differences of previously chosen point pairs, and grab the rows with
    extreme projections.  The chosen rows span R^d whenever X has full
    column rank, giving a positive definite initial Gram at support size
    at most 2d, in O(n d^2) time.

    Raises RankDeficient if the chosen rows fail to span (which implies
    X itself is rank deficient to working precision).
    """
    X = as_data_matrix(X)
    n, d = X.shape
    rng = np.random.default_rng(seed)
    basis = []
    chosen = []
    for _ in range(d):
        r = rng.standard_normal(d)
        b = r.copy()
        for v in basis:
            b -= (b @ v) * v
        nb = np.linalg.norm(b)
        if nb < 1e-12 * max(np.linalg.norm(r), 1.0):
            b = r
            nb = np.linalg.norm(r)
        b /= nb
        proj = X @ b
        p = int(np.argmax(proj))
        q = int(np.argmin(proj))
        chosen.extend((p, q))
        dv = X[p] - X[q]
        for v in basis:
            dv -= (dv @ v) * v
        ndv = np.linalg.norm(dv)
        if ndv > 1e-10 * max(np.linalg.norm(X[p]), np.linalg.norm(X[q]), 1.0):
            basis.append(dv / ndv)
    support = list(dict.fromkeys(chosen))
    u = np.zeros(n)
    u[support] = 1.0 / len(support)
    cholesky_spd(gram(X, u))
    return DesignVector(u)


def dual_objective(X, u):
    """g(u) = log det of the weighted Gram."""
    w = u.weights if isinstance(u, DesignVector) else np.asarray(u)
    return log_det(gram(X, w))


def _refactor(X, u):
    """Exact DualState from scratch for design weights u."""
    M = gram(X, u)
    L = cholesky_spd(M)
    Linv = scipy.linalg.solve_triangular(
        L, np.eye(L.shape[0]), lower=True, check_finite=False)
    Minv = Linv.T @ Linv
    T = X @ Minv
    xi = np.einsum("ij,ij->i", T, X)
    g = 2.0 * float(np.sum(np.log(np.diag(L))))
    return DualState(u=u, M=M, Minv=Minv, xi=xi, g=g)


def _coerce_init(X, u0):
    if u0 is None:
        return init_kumar_yildirim(X).weights.copy()
    if isinstance(u0, DesignVector):
        return u0.weights.copy()
    return DesignVector(np.asarray(u0, dtype=np.float64)).weights.copy()


def _certificate_kind(xi, u, d, delta):
    """None if not delta-primal-feasible, else the certified kind."""
    if float(np.max(xi)) > (1.0 + delta) * d:
        return None
    support = u > SUPPORT_TOL
    if float(np.min(xi[support])) >= (1.0 - delta) * d:
        return "approx-optimal"
    return "primal-feasible"


def solve_wolfe_atwood(X, u0=None, delta=1e-9, max_iter=1000000,
                       refactor_every=500, callback=None):
    """Wolfe-Atwood coordinate ascent to a delta-approx-optimal design.

    Each iteration looks at the most violated row on either side: the
    global argmax of xi (add candidate) and the argmin of xi over the
    support (away candidate), takes whichever deviates more from d in
    relative terms, and moves along u <- (1 - lambda) u + lambda e_j with
    the exact line-search step

        lambda = (xi_j - d) / (d (xi_j - 1)).

    Away steps use negative lambda, clipped below at -u_j / (1 - u_j);
    hitting the clip removes row j from the support (a drop step).  For
    an away candidate with xi_j <= 1 the objective is monotone on the
    feasible ray, so the drop value is optimal and is used directly.
    M, its inverse, xi, and g are maintained by rank-one updates and
    rebuilt from scratch every refactor_every iterations (and once more
    before returning, so the returned state is exact).

    Parameters
    ----------
    X : ndarray, shape (n, d)
    u0 : DesignVector or array, optional
        Start design; defaults to init_kumar_yildirim(X).
    delta : float
        Certificate tolerance.
    max_iter : int
        Iteration cap; hitting it raises MaxIterations with the state
        attached.
    refactor_every : int
        Rank-one updates between full refactorizations.
    callback : callable, optional
        Called as callback(iteration, g, xi_max, xi_min_support) once per
        step-taking iteration, before the step; certificate checks and
        refactorization passes do not trigger it.

    Returns
    -------
    (DualState, Certificate)

    Raises
    ------
    MaxIterations, RankDeficient
    """
    X = as_data_matrix(X)
    n, d = X.shape
    if delta <= 0 or not math.isfinite(delta):
        raise DimensionError(f"delta must be positive, got {delta}")
    u = _coerce_init(X, u0)
    if u.size != n:
        raise DimensionError(f"u0 has {u.size} entries, expected {n}")
    t0 = time.perf_counter()
    state = _refactor(X, u)
    hi = (1.0 + delta) * d
    lo = (1.0 - delta) * d
    since_refactor = 0
    it = 0
    while it < max_iter:
        xi = state.xi
        jp = int(np.argmax(xi))
        ximax = float(xi[jp])
        support = u > SUPPORT_TOL
        xi_sup = np.where(support, xi, np.inf)
        jm = int(np.argmin(xi_sup))
        ximin = float(xi[jm])
        if ximax <= hi and ximin >= lo:
            if since_refactor == 0:
                runtime = (time.perf_counter() - t0) * 1e3
                cert = Certificate(
                    kind="approx-optimal", delta=delta,
                    gap_bound=d * math.log1p(delta),
                    iterations=it, runtime_ms=runtime)
                return state, cert
            state = _refactor(X, u)
            since_refactor = 0
            continue
        if callback is not None:
            callback(it, state.g, ximax, ximin)
        eplus = ximax / d - 1.0
        eminus = 1.0 - ximin / d
        if eplus >= eminus:
            j = jp
            xij = ximax
            lam = (xij - d) / (d * (xij - 1.0))
            dropped = False
        else:
            j = jm
            xij = ximin
            lam_min = -u[j] / (1.0 - u[j]) if u[j] < 1.0 else 0.0
            if xij > 1.0:
                lam = max((xij - d) / (d * (xij - 1.0)), lam_min)
            else:
                lam = lam_min
            dropped = lam <= lam_min
        beta = 1.0 - lam + lam * xij
        mj = state.Minv @ X[j]
        w = X @ mj
        one_minus = 1.0 - lam
        state.xi = (xi - (lam / beta) * w * w) / one_minus
        state.Minv = (state.Minv - (lam / beta) * np.outer(mj, mj)) / one_minus
        state.M = one_minus * state.M + lam * np.outer(X[j], X[j])
        state.g += (d - 1.0) * math.log1p(-lam) + math.log(beta)
        u *= one_minus
        u[j] += lam
        if dropped:
            u[j] = 0.0
        it += 1
        since_refactor += 1
        if since_refactor >= refactor_every:
            u[u <= SUPPORT_TOL] = 0.0
            u /= u.sum()
            state = _refactor(X, u)
            since_refactor = 0
    state = _refactor(X, u)
    raise MaxIterations(
        f"no {delta:g}-approx-optimal certificate within {max_iter} "
        "iterations", state=state,
        certificate=_certificate_kind(state.xi, u, d, delta))


def solve_fixed_point(X, u0=None, delta=1e-7, max_iter=1000000,
                      callback=None):
    """Multiplicative fixed-point baseline u_i <- u_i xi_i / d.

    The update preserves the simplex because sum_i u_i xi_i = d exactly
    (trace identity) and increases g monotonically.  Iteration stops at
    delta-primal-feasibility; no approximate-optimality test is made, so
    the certificate kind is always "primal-feasible".

    Same return and error contract as solve_wolfe_atwood, with the whole
    state recomputed each sweep (no drift).
    """
    X = as_data_matrix(X)
    n, d = X.shape
    if delta <= 0 or not math.isfinite(delta):
        raise DimensionError(f"delta must be positive, got {delta}")
    if u0 is None:
        u = init_khachiyan(n).weights.copy()
    else:
        u = _coerce_init(X, u0)
    if u.size != n:
        raise DimensionError(f"u0 has {u.size} entries, expected {n}")
    t0 = time.perf_counter()
    hi = (1.0 + delta) * d
    for it in range(max_iter):
        state = _refactor(X, u)
        ximax = float(np.max(state.xi))
        if callback is not None:
            callback(it, state.g, ximax, float(np.min(state.xi[u > 0])))
        if ximax <= hi:
            runtime = (time.perf_counter() - t0) * 1e3
            cert = Certificate(
                kind="primal-feasible", delta=delta,
                gap_bound=d * math.log1p(delta),
                iterations=it, runtime_ms=runtime)
            return state, cert
        u = u * state.xi / d
        u /= u.sum()
    state = _refactor(X, u)
    raise MaxIterations(
        f"no {delta:g}-primal-feasible point within {max_iter} iterations",
        state=state, certificate=None)


def certify(X, u, delta):
    """Check a design from scratch and return its Certificate.

    Recomputes the weighted Gram and xi directly from X and u, so the
    result does not depend on any solver's cached state.

    Raises NotFeasible if u is not even delta-primal-feasible.
    """
    X = as_data_matrix(X)
    n, d = X.shape
    w = u.weights if isinstance(u, DesignVector) else \
        DesignVector(np.asarray(u, dtype=np.float64)).weights
    if w.size != n:
        raise DimensionError(f"design has {w.size} entries, expected {n}")
    state = _refactor(X, w)
    kind = _certificate_kind(state.xi, w, d, delta)
    if kind is None:
        raise NotFeasible(
            f"max_i xi_i = {float(np.max(state.xi)):.17g} exceeds "
            f"(1 + {delta:g}) d = {(1 + delta) * d:.17g}")
    return Certificate(kind=kind, delta=delta, gap_bound=d * math.log1p(delta))


def bound_initial_gap(d, s, epsilon):
    """Proven bound on g* - g_s(uniform init on a deterministic sample):
    d log(s / (1 - epsilon))."""
    if d < 1 or s < 1:
        raise DimensionError(f"need d >= 1 and s >= 1, got d={d}, s={s}")
    if not (0.0 < epsilon < 1.0):
        raise DimensionError(f"epsilon must lie in (0, 1), got {epsilon}")
    return d * math.log(s / (1.0 - epsilon))


def bound_final_gap(d, epsilon, delta=0.0):
    """Proven bound on g* - g_s* after solving the sampled dual to a
    delta certificate: d log((1 + delta) / (1 - epsilon)).

    delta = 0 gives the exact-subproblem case.  epsilon >= 1 means the
    sample carries no spectral guarantee and the bound is vacuous, which
    is reported as +inf rather than an error.
    """
    if d < 1:
        raise DimensionError(f"need d >= 1, got d={d}")
    if epsilon <= 0.0 or not math.isfinite(epsilon):
        raise DimensionError(f"epsilon must be positive, got {epsilon}")
    if delta < 0.0:
        raise DimensionError(f"delta must be nonnegative, got {delta}")
    if epsilon >= 1.0:
        return math.inf
    return d * math.log((1.0 + delta) / (1.0 - epsilon))


@dataclass
class Ellipsoid:
    """The set {x : (x - center)^T Q (x - center) <= dim}.

    Q is symmetric positive definite and dim is the ambient dimension,
    matching the convention in which the sphere of squared radius d has
    Q = I.
    """

    Q: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=np.float64)
        self.center = np.asarray(self.center, dtype=np.float64)
        if self.Q.ndim != 2 or self.Q.shape[0] != self.Q.shape[1]:
            raise DimensionError(f"Q must be square, got shape {self.Q.shape}")
        if self.center.shape != (self.Q.shape[0],):
            raise DimensionError(
                f"center shape {self.center.shape} does not match Q "
                f"{self.Q.shape}")

    @property
    def dim(self):
        return self.Q.shape[0]

    def squared_radii(self, X):
        """(x_i - center)^T Q (x_i - center) for each row of X."""
        Z = np.asarray(X, dtype=np.float64) - self.center
        return np.einsum("ij,ij->i", Z @ self.Q, Z)

    def max_violation(self, X):
        """max_i squared_radii / dim - 1; <= 0 means X is covered."""
        return float(np.max(self.squared_radii(X))) / self.dim - 1.0

    def log_volume(self):
        d = self.dim
        return (0.5 * d * (math.log(d) + math.log(math.pi))
                - math.lgamma(0.5 * d + 1.0) - 0.5 * log_det(self.Q))

    def volume(self):
        """d^(d/2) vol(unit ball) / sqrt(det Q)."""
        return math.exp(self.log_volume())


def lift_and_center(X):
    """Append a constant-1 coordinate so a centered solve in d+1
    dimensions captures translation in d dimensions."""
    X = as_data_matrix(X)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def recover_ellipsoid(X, u):
    """Ellipsoid around the original rows from a lifted design vector.

    With c = sum_i u_i x_i and S = sum_i u_i x_i x_i^T, the shape matrix
    is Q0 = (S - c c^T)^-1; Q0 is then rescaled so the farthest row lands
    exactly on the boundary, which guarantees every row is covered.

    Parameters
    ----------
    X : ndarray, shape (n, d), the original (unlifted) rows.
    u : DesignVector or array, shape (n,), a design for the lifted dual.

    Raises
    ------
    RankDeficient
        If the weighted rows are affinely degenerate.
    """
    X = as_data_matrix(X)
    n, d = X.shape
    w = u.weights if isinstance(u, DesignVector) else \
        DesignVector(np.asarray(u, dtype=np.float64)).weights
    if w.size != n:
        raise DimensionError(f"design has {w.size} entries, expected {n}")
    c = X.T @ w
    S = gram(X, w)
    Q0 = inv_spd(S - np.outer(c, c))
    e = Ellipsoid(Q=Q0, center=c)
    worst = float(np.max(e.squared_radii(X)))
    if worst <= 0.0:
        raise RankDeficient("all rows coincide with the center")
    return Ellipsoid(Q=Q0 * (d / worst), center=c)


def minimum_volume_ellipsoid(X, delta=1e-9, seed=0, max_iter=1000000):
    """Convenience wrapper: lift, solve with Wolfe-Atwood, recover.

    Returns (Ellipsoid, Certificate).  The certificate describes the
    lifted dual solve.
    """
    Xl = lift_and_center(X)
    state, cert = solve_wolfe_atwood(
        Xl, u0=init_kumar_yildirim(Xl, seed=seed), delta=delta,
        max_iter=max_iter)
    return recover_ellipsoid(X, state.u), cert
