"""Dense linear algebra kernels and matrix file I/O.

All higher level code funnels through the helpers here: Gram matrices,
Cholesky-based log-determinants, extreme generalized eigenvalues of an
SPD pencil, and the two on-disk matrix formats (a small binary format
and CSV).  Matrices are plain float64 ndarrays; validation happens at
these entry points so the numerical routines can assume clean inputs.
"""

import csv
import struct

import numpy as np
import scipy.linalg

from .errors import DimensionError, FormatError, RankDeficient

# Magic bytes opening the binary matrix format: "MVCE1\0".
MAGIC = b"\x4d\x56\x43\x45\x31\x00"

# Relative pivot threshold below which an SPD factorization is declared
# rank deficient.
PIVOT_RTOL = 1e-12


def as_data_matrix(X, min_rows_ge_cols=True):
    """Coerce to a validated float64 data matrix.

    Parameters
    ----------
    X : array_like, shape (n, d)
        Rows are points in R^d.
    min_rows_ge_cols : bool
        Require n >= d (the tall regime every routine here assumes).

    Returns
    -------
    ndarray, C-contiguous float64 copy only if coercion is needed.

    Raises
    ------
    DimensionError
        If X is not 2-D, is empty, has n < d, or contains non-finite
        entries.
    """
    A = np.ascontiguousarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={A.ndim}")
    n, d = A.shape
    if n < 1 or d < 1:
        raise DimensionError(f"empty matrix of shape {A.shape}")
    if min_rows_ge_cols and n < d:
        raise DimensionError(f"need n >= d, got n={n}, d={d}")
    if not np.isfinite(A).all():
        raise DimensionError("matrix contains non-finite entries")
    return A


def symmetrize(A):
    """Return (A + A.T)/2, the symmetric part of A."""
    return 0.5 * (A + A.T)


def gram(X, weights=None):
    """Gram matrix X^T X, optionally weighted.

    Parameters
    ----------
    X : ndarray, shape (n, d)
    weights : ndarray, shape (n,), optional
        Nonnegative row weights; the result is sum_i w_i x_i x_i^T.

    Returns
    -------
    ndarray, shape (d, d), symmetric positive semidefinite.
    """
    X = as_data_matrix(X, min_rows_ge_cols=False)
    if weights is None:
        return symmetrize(X.T @ X)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (X.shape[0],):
        raise DimensionError(
            f"weights shape {w.shape} does not match n={X.shape[0]}")
    if np.any(w < 0):
        raise DimensionError("weights must be nonnegative")
    # Scaling rows by sqrt(w) keeps the product exactly PSD in floating
    # point, unlike X.T @ (w[:, None] * X).
    Y = X * np.sqrt(w)[:, None]
    return symmetrize(Y.T @ Y)


def cholesky_spd(A):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    The input is symmetrized first (tolerating 1e-12-level asymmetry from
    accumulated arithmetic).  A factorization failure, or any pivot below
    PIVOT_RTOL times the largest diagonal entry, raises RankDeficient.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise DimensionError("matrix contains non-finite entries")
    A = symmetrize(A)
    try:
        L = scipy.linalg.cholesky(A, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficient(f"matrix is not positive definite: {exc}") from exc
    dmax = float(np.max(np.diag(A)))
    if np.min(np.diag(L)) ** 2 < PIVOT_RTOL * dmax:
        raise RankDeficient(
            "matrix is singular to working precision "
            f"(pivot below {PIVOT_RTOL:g} * max diagonal)")
    return L


def log_det(A):
    """log det of an SPD matrix via Cholesky.

    Raises RankDeficient when A is singular to working precision, so the
    value returned is always finite.
    """
    L = cholesky_spd(A)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def inv_spd(A):
    """Inverse of an SPD matrix via its Cholesky factor."""
    L = cholesky_spd(A)
    Linv = scipy.linalg.solve_triangular(
        L, np.eye(L.shape[0]), lower=True, check_finite=False)
    return symmetrize(Linv.T @ Linv)


def extreme_gen_eigs(A, B):
    """Smallest and largest eigenvalue of the SPD pencil (A, B).

    Computes the eigenvalues lambda solving det(A - lambda B) = 0 for
    symmetric A and SPD B by Cholesky whitening: with B = L L^T the
    pencil eigenvalues are the ordinary eigenvalues of L^-1 A L^-T.

    Parameters
    ----------
    A : ndarray, shape (d, d), symmetric.
    B : ndarray, shape (d, d), symmetric positive definite.

    Returns
    -------
    (lo, hi) : floats, the extreme generalized eigenvalues.

    Raises
    ------
    RankDeficient
        If B is singular to working precision.
    """
    A = symmetrize(np.asarray(A, dtype=np.float64))
    L = cholesky_spd(B)
    if A.shape != L.shape:
        raise DimensionError(
            f"pencil shapes differ: {A.shape} vs {L.shape}")
    Z = scipy.linalg.solve_triangular(L, A, lower=True, check_finite=False)
    W = scipy.linalg.solve_triangular(L, Z.T, lower=True, check_finite=False)
    evals = scipy.linalg.eigvalsh(symmetrize(W))
    return float(evals[0]), float(evals[-1])


def save_matrix(path, X, fmt=None):
    """Write a matrix to disk in binary or CSV form.

    Parameters
    ----------
    path : str
    X : ndarray, shape (n, d)
    fmt : {"binary", "csv", None}
        None infers from the extension: ".csv" means CSV, anything else
        means the binary format.

    Notes
    -----
    Binary layout: 6 magic bytes "MVCE1\\0", then n and d as u64
    little-endian, then n*d float64 little-endian values in row-major
    order.  CSV cells are written with 17 significant digits so doubles
    round-trip exactly.
    """
    X = as_data_matrix(X, min_rows_ge_cols=False)
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "binary"
    if fmt == "binary":
        n, d = X.shape
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", n, d))
            fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            for row in X:
                fh.write(",".join(f"{v:.17g}" for v in row))
                fh.write("\n")
    else:
        raise FormatError(f"unknown matrix format {fmt!r}")


def load_matrix(path):
    """Read a matrix written by save_matrix (either format).

    The binary format is recognized by its magic bytes; anything else is
    parsed as CSV with an optional single header line.

    Raises
    ------
    FormatError
        Truncated binary payload, bad magic-like header, unparseable CSV
        cell (reported with 1-based row and column), or non-finite values.
    DimensionError
        Ragged CSV rows or an empty file.
    """
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        if head == MAGIC:
            return _load_binary(fh, path)
    return _load_csv(path)


def _load_binary(fh, path):
    hdr = fh.read(16)
    if len(hdr) != 16:
        raise FormatError(f"{path}: truncated header")
    n, d = struct.unpack("<QQ", hdr)
    if n < 1 or d < 1:
        raise DimensionError(f"{path}: empty matrix ({n} x {d})")
    want = n * d * 8
    buf = fh.read(want + 1)
    if len(buf) < want:
        raise FormatError(
            f"{path}: payload holds {len(buf)} bytes, expected {want}")
    if len(buf) > want:
        raise FormatError(f"{path}: trailing bytes after payload")
    X = np.frombuffer(buf, dtype="<f8").reshape(n, d).astype(np.float64)
    if not np.isfinite(X).all():
        raise FormatError(f"{path}: non-finite values in payload")
    return X


def _looks_numeric(cells):
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def _load_csv(path):
    rows = []
    width = None
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if lineno == 1 and not _looks_numeric(cells):
                # Optional single header line.
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DimensionError(
                    f"{path}: row {lineno} has {len(cells)} cells, "
                    f"expected {width}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                for col, c in enumerate(cells, start=1):
                    try:
                        float(c)
                    except ValueError:
                        raise FormatError(
                            f"{path}: cannot parse cell at row {lineno}, "
                            f"column {col}: {c!r}") from None
                raise
    if not rows:
        raise DimensionError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(X).all():
        raise FormatError(f"{path}: non-finite values")
    return X
