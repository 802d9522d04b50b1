import numpy as np
import pytest

from mvce.errors import DimensionError, FormatError, RankDeficient
from mvce.linalg import (
    MAGIC,
    as_data_matrix,
    cholesky_spd,
    extreme_gen_eigs,
    gram,
    inv_spd,
    load_matrix,
    log_det,
    save_matrix,
    symmetrize,
)

from oracles import det_cofactor, pencil_extremes


def test_as_data_matrix_coerces_lists():
    A = as_data_matrix([[1, 2], [3, 4], [5, 6]])
    assert A.dtype == np.float64
    assert A.flags["C_CONTIGUOUS"]
    assert A.shape == (3, 2)


def test_as_data_matrix_rejections():
    with pytest.raises(DimensionError):
        as_data_matrix([1.0, 2.0, 3.0])
    with pytest.raises(DimensionError):
        as_data_matrix(np.empty((0, 3)))
    with pytest.raises(DimensionError):
        as_data_matrix(np.ones((2, 5)))
    with pytest.raises(DimensionError):
        as_data_matrix([[1.0, np.nan]], min_rows_ge_cols=False)
    with pytest.raises(DimensionError):
        as_data_matrix([[1.0, np.inf]], min_rows_ge_cols=False)
    # Wide matrices are fine when the tall-regime check is off.
    assert as_data_matrix(np.ones((2, 5)), min_rows_ge_cols=False).shape == (2, 5)


def test_symmetrize():
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    S = symmetrize(A)
    assert np.array_equal(S, S.T)
    assert np.allclose(S, [[1.0, 1.0], [1.0, 3.0]])


def test_gram_matches_outer_product_sum():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 3))
    brute = np.zeros((3, 3))
    for row in X:
        brute += np.outer(row, row)
    assert np.allclose(gram(X), brute, atol=1e-12)
    assert np.array_equal(gram(X), gram(X).T)


def test_gram_weighted_matches_outer_product_sum():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((6, 2))
    w = rng.uniform(0.0, 2.0, size=6)
    brute = np.zeros((2, 2))
    for wi, row in zip(w, X):
        brute += wi * np.outer(row, row)
    assert np.allclose(gram(X, w), brute, atol=1e-12)


def test_gram_weight_validation():
    X = np.ones((3, 2))
    with pytest.raises(DimensionError):
        gram(X, np.ones(4))
    with pytest.raises(DimensionError):
        gram(X, np.array([0.5, -0.1, 0.6]))


def test_cholesky_spd_hand_case():
    # [[4, 2], [2, 5]] factors as [[2, 0], [1, 2]], worked by hand.
    L = cholesky_spd(np.array([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(L, [[2.0, 0.0], [1.0, 2.0]], atol=1e-14)


def test_cholesky_spd_reconstructs():
    rng = np.random.default_rng(2)
    for _ in range(20):
        B = rng.standard_normal((5, 5))
        A = B @ B.T + 5 * np.eye(5)
        L = cholesky_spd(A)
        assert np.allclose(L @ L.T, A, atol=1e-10 * np.abs(A).max())
        assert np.allclose(L, np.tril(L))


def test_cholesky_spd_tolerates_roundoff_asymmetry():
    A = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
    cholesky_spd(A)


def test_cholesky_spd_rejections():
    with pytest.raises(DimensionError):
        cholesky_spd(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        cholesky_spd(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(RankDeficient):
        cholesky_spd(np.array([[1.0, 0.0], [0.0, -1.0]]))
    # Rank-one outer product is singular.
    v = np.array([1.0, 2.0, 3.0])
    with pytest.raises(RankDeficient):
        cholesky_spd(np.outer(v, v))


def test_log_det_matches_cofactor_expansion():
    rng = np.random.default_rng(3)
    for m in (1, 2, 3, 4, 5, 6):
        B = rng.standard_normal((m, m))
        A = B @ B.T + m * np.eye(m)
        ref = np.log(det_cofactor(A))
        assert log_det(A) == pytest.approx(ref, abs=1e-9)


def test_log_det_invariant_under_row_permutation():
    # The Gram matrix is a sum over rows, so reordering rows only changes
    # floating point summation order.
    rng = np.random.default_rng(4)
    X = rng.lognormal(0.0, 2.0, size=(200, 5))
    perm = rng.permutation(200)
    assert log_det(gram(X)) == pytest.approx(log_det(gram(X[perm])), abs=1e-12)


def test_inv_spd_matches_numpy():
    rng = np.random.default_rng(5)
    B = rng.standard_normal((4, 4))
    A = B @ B.T + 4 * np.eye(4)
    assert np.allclose(inv_spd(A), np.linalg.inv(A), atol=1e-12)
    assert np.array_equal(inv_spd(A), inv_spd(A).T)


def test_extreme_gen_eigs_hand_pencil():
    A = np.diag([1.0, 2.0, 3.0])
    lo, hi = extreme_gen_eigs(A, np.eye(3))
    assert (lo, hi) == pytest.approx((1.0, 3.0), abs=1e-12)
    lo, hi = extreme_gen_eigs(A, 2.0 * np.eye(3))
    assert (lo, hi) == pytest.approx((0.5, 1.5), abs=1e-12)


def test_extreme_gen_eigs_matches_pencil_solver():
    rng = np.random.default_rng(6)
    for _ in range(20):
        F = rng.standard_normal((5, 5))
        G = rng.standard_normal((5, 5))
        A = symmetrize(F @ F.T)
        B = G @ G.T + 5 * np.eye(5)
        got = extreme_gen_eigs(A, B)
        want = pencil_extremes(A, B)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-11)


def test_extreme_gen_eigs_rejections():
    with pytest.raises(RankDeficient):
        extreme_gen_eigs(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        extreme_gen_eigs(np.eye(3), np.eye(2))


def test_binary_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    X = rng.standard_normal((11, 4)) * 10.0 ** rng.integers(-30, 30, (11, 4))
    path = tmp_path / "m.bin"
    save_matrix(path, X)
    Y = load_matrix(path)
    assert np.array_equal(X, Y)


def test_binary_layout():
    import struct

    assert MAGIC == b"MVCE1\x00"
    assert len(MAGIC) == 6
    # Header after the magic is two little-endian u64 values.
    assert struct.calcsize("<QQ") == 16


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((9, 3)) / 3.0
    path = tmp_path / "m.csv"
    save_matrix(path, X)
    Y = load_matrix(path)
    # 17 significant digits round-trip doubles exactly.
    assert np.array_equal(X, Y)


def test_format_inference_and_override(tmp_path):
    X = np.array([[1.5, 2.5]])
    csv_path = tmp_path / "a.csv"
    save_matrix(csv_path, X)
    assert csv_path.read_bytes()[:4] != MAGIC[:4]
    bin_path = tmp_path / "a.dat"
    save_matrix(bin_path, X)
    assert bin_path.read_bytes()[:6] == MAGIC
    forced = tmp_path / "b.csv"
    save_matrix(forced, X, fmt="binary")
    assert forced.read_bytes()[:6] == MAGIC
    assert np.array_equal(load_matrix(forced), X)
    with pytest.raises(FormatError):
        save_matrix(tmp_path / "c.dat", X, fmt="parquet")


def test_csv_header_line_is_skipped(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("col_a,col_b\n1.0,2.0\n3.0,4.0\n")
    assert np.array_equal(load_matrix(path), [[1.0, 2.0], [3.0, 4.0]])


def test_csv_blank_lines_are_skipped(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("1.0,2.0\n\n3.0,4.0\n")
    assert np.array_equal(load_matrix(path), [[1.0, 2.0], [3.0, 4.0]])


def test_csv_ragged_row_reports_line(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(DimensionError, match="row 2"):
        load_matrix(path)


def test_csv_bad_cell_reports_position(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0,3.0\n4.0,5.0,oops\n")
    with pytest.raises(FormatError, match="row 2, column 3"):
        load_matrix(path)


def test_csv_non_finite_rejected(tmp_path):
    path = tmp_path / "nf.csv"
    path.write_text("1.0,nan\n")
    with pytest.raises(FormatError, match="non-finite"):
        load_matrix(path)


def test_empty_csv_rejected(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("\n\n")
    with pytest.raises(DimensionError, match="no data rows"):
        load_matrix(path)


def test_truncated_binary_rejected(tmp_path):
    X = np.ones((4, 3))
    path = tmp_path / "t.bin"
    save_matrix(path, X)
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError, match="payload"):
        load_matrix(path)
    path.write_bytes(data[:10])
    with pytest.raises(FormatError, match="truncated"):
        load_matrix(path)


def test_binary_trailing_bytes_rejected(tmp_path):
    X = np.ones((2, 2))
    path = tmp_path / "x.bin"
    save_matrix(path, X)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        load_matrix(path)


def test_binary_non_finite_rejected(tmp_path):
    X = np.ones((2, 2))
    path = tmp_path / "nf.bin"
    save_matrix(path, X)
    data = bytearray(path.read_bytes())
    import struct

    data[-8:] = struct.pack("<d", np.inf)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="non-finite"):
        load_matrix(path)
