"""Synthetic dataset families with controlled leverage behavior.

Four families:

  gaussian             i.i.d. standard normal entries; leverage is nearly
                       uniform (the hard case for subsampling).
  lognormal            i.i.d. exp(N(0, sigma^2)) entries, sigma = 2 by
                       default; a few huge entries create coherent rows.
  rotated-cauchy       rows r * v with v uniform on the unit sphere and
                       r = |tan(pi (U - 1/2))| a half-Cauchy radius, so a
                       handful of rows dominate the spectrum.
  power-law-leverage   rows of a Gaussian matrix rescaled (and polished)
                       so the sorted exact leverage scores decay like
                       rank^-(1 + eta), then randomly rotated.

Generation is blocked: rows are produced in blocks of 4096 with one
child seed per block, so the output for a given spec is reproducible and
independent of how blocks might be scheduled.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, FormatError
from .leverage import exact_leverage

BLOCK_ROWS = 4096

# family -> {param name: default}
FAMILIES = {
    "gaussian": {},
    "lognormal": {"sigma": 2.0},
    "rotated-cauchy": {},
    "power-law-leverage": {"eta": 1.0},
}

# Leverage targets are capped below 1 so the row-scale inversion stays
# finite; a cap this close to 1 does not move the fitted decay slope.
_TARGET_CAP = 0.999


@dataclass
class DatasetSpec:
    """Everything needed to regenerate a dataset deterministically."""

    family: str
    n: int
    d: int
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FormatError(
                f"unknown family {self.family!r}; known: "
                + ", ".join(sorted(FAMILIES)))
        self.n = int(self.n)
        self.d = int(self.d)
        self.seed = int(self.seed)
        if self.d < 1 or self.n < self.d:
            raise DimensionError(
                f"need n >= d >= 1, got n={self.n}, d={self.d}")
        known = FAMILIES[self.family]
        for key in self.params:
            if key not in known:
                raise FormatError(
                    f"family {self.family!r} takes no parameter {key!r}")
        self.params = {k: float(v) for k, v in self.params.items()}

    def resolved_params(self):
        out = dict(FAMILIES[self.family])
        out.update(self.params)
        return out


def describe(spec):
    """Canonical one-line description, e.g. 'gaussian n=1000 d=10 seed=7'.

    Parameters are printed in sorted order with defaults resolved, so
    describe(parse_spec(describe(s))) == describe(s).
    """
    parts = [spec.family, f"n={spec.n}", f"d={spec.d}", f"seed={spec.seed}"]
    for k, v in sorted(spec.resolved_params().items()):
        parts.append(f"{k}={v:g}")
    return " ".join(parts)


def parse_spec(text):
    """Inverse of describe; also accepts the CLI's key=value token form."""
    tokens = text.split()
    if not tokens:
        raise FormatError("empty dataset description")
    family = tokens[0]
    fields = {}
    params = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise FormatError(f"expected key=value, got {tok!r}")
        key, _, val = tok.partition("=")
        try:
            if key in ("n", "d", "seed"):
                fields[key] = int(val)
            else:
                params[key] = float(val)
        except ValueError:
            raise FormatError(
                f"cannot parse value {val!r} for key {key!r}") from None
    for key in ("n", "d", "seed"):
        if key not in fields:
            raise FormatError(f"dataset description is missing {key}=")
    return DatasetSpec(family=family, params=params, **fields)


def _block_generators(seed, n):
    blocks_ss, extra_ss = np.random.SeedSequence(seed).spawn(2)
    nblocks = (n + BLOCK_ROWS - 1) // BLOCK_ROWS
    gens = [np.random.default_rng(s) for s in blocks_ss.spawn(nblocks)]
    return gens, np.random.default_rng(extra_ss)


def _fill_blocks(spec, fill):
    gens, _ = _block_generators(spec.seed, spec.n)
    X = np.empty((spec.n, spec.d))
    for b, rng in enumerate(gens):
        lo = b * BLOCK_ROWS
        hi = min(lo + BLOCK_ROWS, spec.n)
        X[lo:hi] = fill(rng, hi - lo, spec.d)
    return X


def _fill_gaussian(rng, m, d):
    return rng.standard_normal((m, d))


def _make_lognormal(spec):
    sigma = spec.resolved_params()["sigma"]
    if sigma <= 0:
        raise DimensionError(f"sigma must be positive, got {sigma}")
    return _fill_blocks(
        spec, lambda rng, m, d: rng.lognormal(0.0, sigma, size=(m, d)))


def _fill_rotated_cauchy(rng, m, d):
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    r = np.abs(np.tan(np.pi * (rng.random(m) - 0.5)))
    return g * (r / norms)[:, None]


def _power_law_targets(n, d, eta):
    """min(cap, c i^-(1+eta)) with c chosen so the targets sum to d."""
    ranks = np.arange(1, n + 1, dtype=np.float64)
    decay = ranks ** -(1.0 + eta)

    def total(c):
        return float(np.minimum(_TARGET_CAP, c * decay).sum())

    lo, hi = 0.0, 1.0
    while total(hi) < d:
        hi *= 2.0
        if hi > 1e18:
            raise DimensionError(
                f"cannot reach leverage mass d={d} with n={n} rows")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) < d:
            lo = mid
        else:
            hi = mid
    return np.minimum(_TARGET_CAP, hi * decay)


def _make_power_law(spec):
    eta = spec.resolved_params()["eta"]
    if eta <= 0:
        raise DimensionError(f"eta must be positive, got {eta}")
    n, d = spec.n, spec.d
    G = _fill_blocks(spec, _fill_gaussian)
    _, rng = _block_generators(spec.seed, n)
    t = _power_law_targets(n, d, eta)
    # Invert the single-row scaled-leverage saturation map around the
    # mean base score d/n, then polish: recompute exact leverage and
    # damp the same correction until scores track the targets.
    base = d / n
    w = np.sqrt(t * (1.0 - base) / (base * (1.0 - t)))
    for _ in range(6):
        scores = exact_leverage(w[:, None] * G).scores
        scores = np.clip(scores, 1e-300, 1.0 - 1e-12)
        if float(np.max(np.abs(np.log(scores / t)))) < 0.05:
            break
        w *= (t * (1.0 - scores) / (scores * (1.0 - t))) ** 0.25
    rot, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (w[:, None] * G) @ rot


def generate(spec):
    """Materialize a DatasetSpec as an (n, d) float64 matrix."""
    if spec.family == "gaussian":
        return _fill_blocks(spec, _fill_gaussian)
    if spec.family == "lognormal":
        return _make_lognormal(spec)
    if spec.family == "rotated-cauchy":
        return _fill_blocks(spec, _fill_rotated_cauchy)
    if spec.family == "power-law-leverage":
        return _make_power_law(spec)
    raise FormatError(f"unknown family {spec.family!r}")
