import numpy as np
import pytest

from structcov import matspace as ms


def vech_reference(S):
    # independent definitional oracle: lower triangle, column by column
    p = S.shape[0]
    out = []
    for col in range(p):
        for row in range(col, p):
            out.append(S[row, col])
    return np.array(out)


def random_symmetric(p, rng):
    A = rng.standard_normal((p, p))
    return (A + A.T) / 2.0


def test_vech_examples():
    S = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(ms.vech(S), [1.0, 2.0, 3.0])
    assert np.array_equal(ms.vech(np.array([[7.0]])), [7.0])
    assert np.array_equal(ms.vech(np.eye(3)), [1, 0, 0, 1, 0, 1])


def test_vech_matches_reference_definition():
    rng = np.random.default_rng(0)
    for p in range(1, 17):
        S = random_symmetric(p, rng)
        assert np.array_equal(ms.vech(S), vech_reference(S))


def test_mat_examples():
    assert np.array_equal(ms.mat([1.0, 2.0, 3.0]), [[1.0, 2.0], [2.0, 3.0]])
    with pytest.raises(ValueError):
        ms.mat(np.zeros(4))  # 4 is not triangular


def test_vech_mat_roundtrips():
    rng = np.random.default_rng(1)
    for p in range(1, 17):
        S = random_symmetric(p, rng)
        assert np.array_equal(ms.mat(ms.vech(S)), S)
        v = rng.standard_normal(p * (p + 1) // 2)
        assert np.array_equal(ms.vech(ms.mat(v)), v)


def test_vec_index_set_examples():
    assert np.array_equal(ms.vec_index_set(2) + 1, [1, 2, 4])
    assert np.array_equal(ms.vec_index_set(1) + 1, [1])
    assert np.array_equal(ms.vec_index_set(3) + 1, [1, 2, 3, 5, 6, 9])


def test_vec_index_set_selects_vech():
    rng = np.random.default_rng(2)
    for p in (1, 2, 5, 9):
        S = random_symmetric(p, rng)
        vec = S.flatten(order="F")
        assert np.array_equal(vec[ms.vec_index_set(p)], ms.vech(S))


def test_kron_examples():
    assert np.array_equal(ms.kron(np.eye(2), np.eye(2)), np.eye(4))
    B = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(ms.kron([[2.0]], B), 2 * B)


def test_kron_mixed_product():
    rng = np.random.default_rng(3)
    for _ in range(5):
        A, B, C, D = (rng.standard_normal((2, 2)) for _ in range(4))
        lhs = ms.kron(A, B) @ ms.kron(C, D)
        rhs = ms.kron(A @ C, B @ D)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_restrict_examples():
    assert np.array_equal(ms.restrict(np.eye(4), ms.vec_index_set(2)), np.eye(3))
    # identity Kronecker restricted to the index set is the l x l identity
    p = 3
    M = ms.kron(np.eye(p), np.eye(p))
    assert np.array_equal(ms.restrict(M, ms.vec_index_set(p)), np.eye(6))


def test_restrict_reads_the_right_block():
    M = np.arange(16.0).reshape(4, 4)
    idx = ms.vec_index_set(2)  # rows/cols 0, 1, 3
    expected = M[[0, 1, 3]][:, [0, 1, 3]]
    assert np.array_equal(ms.restrict(M, idx), expected)
    with pytest.raises(ValueError):
        ms.restrict(np.zeros((2, 3)), [0])


def test_svd_contract():
    U, s, W = ms.svd(np.diag([3.0, 1.0]))
    assert np.allclose(s, [3.0, 1.0])
    _, s0, _ = ms.svd(np.zeros((3, 5)))
    assert np.all(s0 == 0)
    rng = np.random.default_rng(4)
    for shape in ((6, 10), (40, 25), (120, 120)):
        M = rng.standard_normal(shape)
        U, s, W = ms.svd(M)
        assert np.all(np.diff(s) <= 0)
        resid = np.linalg.norm(U @ np.diag(s) @ W.T - M) / np.linalg.norm(M)
        assert resid <= 1e-10
    with pytest.raises(ValueError):
        ms.svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_pinv_examples():
    assert np.allclose(ms.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    rng = np.random.default_rng(5)
    M = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    assert np.allclose(ms.pinv(M), np.linalg.inv(M), atol=1e-8)


def test_pinv_penrose_and_involution():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((6, 3))
    M = A @ rng.standard_normal((3, 8))  # rank 3
    P = ms.pinv(M)
    scale = np.linalg.norm(M)
    assert np.linalg.norm(M @ P @ M - M) <= 1e-8 * scale
    assert np.linalg.norm(P @ M @ P - P) <= 1e-8 * np.linalg.norm(P)
    assert np.allclose(M @ P, (M @ P).T, atol=1e-8)
    assert np.allclose(P @ M, (P @ M).T, atol=1e-8)
    assert np.allclose(ms.pinv(P), M, atol=1e-8 * scale)


def test_matrix_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    S = random_symmetric(5, rng)
    path = tmp_path / "m.csv"
    ms.write_matrix_csv(S, path)
    assert np.array_equal(ms.read_matrix_csv(path), S)


def test_matrix_csv_rejects_asymmetry(tmp_path):
    path = tmp_path / "bad.csv"
    ms.write_matrix_csv(np.array([[1.0, 2.0], [2.1, 1.0]]), path)
    with pytest.raises(ValueError, match="asymmetry"):
        ms.read_matrix_csv(path)


def test_matrix_csv_symmetrizes_roundoff(tmp_path):
    path = tmp_path / "near.csv"
    A = np.array([[1.0, 2.0 + 1e-12], [2.0, 1.0]])
    ms.write_matrix_csv(A, path)
    out = ms.read_matrix_csv(path)
    assert np.array_equal(out, out.T)


def test_stacked_matrices_csv(tmp_path):
    rng = np.random.default_rng(8)
    mats = [random_symmetric(3, rng) for _ in range(4)]
    path = tmp_path / "stack.csv"
    ms.write_matrix_csv(np.vstack(mats), path)
    out = ms.read_stacked_matrices_csv(path, 3)
    assert len(out) == 4
    for got, want in zip(out, mats):
        assert np.array_equal(got, want)
    with pytest.raises(ValueError):
        ms.read_stacked_matrices_csv(path, 4)


def test_matrix_vs_vech_norm_are_distinct():
    # ||S||_F >= ||vech(S)||_2, equality only for diagonal S
    rng = np.random.default_rng(9)
    for _ in range(10):
        S = random_symmetric(5, rng)
        assert np.linalg.norm(S) >= np.linalg.norm(ms.vech(S))
    D = np.diag(rng.standard_normal(5))
    assert np.isclose(np.linalg.norm(D), np.linalg.norm(ms.vech(D)))
