# Half-vectorization algebra and decomposition helpers shared by every module.
#
# Conventions (fixed globally):
#   * vech stacks the lower triangle column by column, diagonal included.
#   * l = p(p+1)/2 is the dimension of the space of p x p symmetric matrices.
#   * vec is plain column-major (Fortran) vectorization of the full matrix.

import csv

import numpy as np

__all__ = [
    "vech_len",
    "dim_from_vech_len",
    "vech",
    "mat",
    "vec_index_set",
    "kron",
    "restrict",
    "svd",
    "pinv",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_stacked_matrices_csv",
]


def vech_len(p):
    """Dimension l = p(p+1)/2 of the half-vectorized space."""
    return p * (p + 1) // 2


def dim_from_vech_len(l):
    """Recover p from l = p(p+1)/2; raises if l is not triangular."""
    p = int(round((np.sqrt(8 * l + 1) - 1) / 2))
    if p * (p + 1) // 2 != l:
        raise ValueError(f"length {l} is not a triangular number p(p+1)/2")
    return p


def _lower_indices(p):
    # (rows, cols) of the lower triangle in column-major order:
    # (0,0),(1,0),...,(p-1,0),(1,1),(2,1),...
    iu = np.triu_indices(p)
    return iu[1], iu[0]


def vech(S):
    """Stack the lower-triangular part of a symmetric matrix column by column.

    Parameters
    ----------
    S : (p, p) ndarray, symmetric.

    Returns
    -------
    (l,) ndarray with l = p(p+1)/2.
    """
    S = np.asarray(S, dtype=float)
    rows, cols = _lower_indices(S.shape[0])
    return S[rows, cols].copy()


def mat(v):
    """Inverse of vech: rebuild the p x p symmetric matrix.

    mat(vech(S)) == S exactly for symmetric S.
    """
    v = np.asarray(v, dtype=float)
    p = dim_from_vech_len(v.shape[0])
    S = np.empty((p, p))
    rows, cols = _lower_indices(p)
    S[rows, cols] = v
    S[cols, rows] = v
    return S


def vec_index_set(p):
    """Positions (0-based) of the lower-triangular entries inside vec(S).

    Selecting vec(S) at these indices yields vech(S) entrywise.
    """
    rows, cols = _lower_indices(p)
    return rows + cols * p


def kron(A, B):
    """Kronecker (tensor) product with the standard block layout."""
    return np.kron(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


def restrict(M, idx):
    """Square submatrix [M]_{I,I}: rows and columns of M selected at idx."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("restrict expects a square matrix")
    idx = np.asarray(idx, dtype=int)
    return M[np.ix_(idx, idx)]


def svd(M):
    """Thin SVD returning (U, sigma, W) with M ~ U @ diag(sigma) @ W.T.

    sigma is nonincreasing; both U and W have orthonormal columns.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("svd input has non-finite entries")
    U, s, Wt = np.linalg.svd(M, full_matrices=False)
    return U, s, Wt.T


def pinv(M, tol=None):
    """Moore-Penrose pseudo-inverse.

    Singular values below tol * sigma_1 are treated as zero; the default
    tolerance is max(shape) * machine epsilon.
    """
    M = np.asarray(M, dtype=float)
    if tol is None:
        tol = max(M.shape) * np.finfo(float).eps
    return np.linalg.pinv(M, rcond=tol)


# ---------------------------------------------------------------------------
# Matrix CSV interface: full (not triangular) storage, one row per matrix row.
# Readers symmetrize by (A + A^T)/2 and reject gross asymmetry.

ASYMMETRY_TOL = 1e-9


def _symmetrize_checked(A, context="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{context}: expected a square matrix, got shape {A.shape}")
    scale = max(np.abs(A).max(), 1.0)
    gap = np.abs(A - A.T).max()
    if gap > ASYMMETRY_TOL * scale:
        raise ValueError(
            f"{context}: asymmetry {gap:.3e} exceeds {ASYMMETRY_TOL:.0e} relative"
        )
    return (A + A.T) / 2.0


def read_matrix_csv(path):
    """Read one symmetric matrix from CSV (full storage), symmetrizing."""
    rows = _read_float_rows(path)
    return _symmetrize_checked(np.array(rows), context=str(path))


def write_matrix_csv(S, path):
    """Write a matrix as CSV, one row per matrix row, full storage."""
    S = np.asarray(S, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in S:
            w.writerow([repr(float(x)) for x in row])


def read_stacked_matrices_csv(path, p):
    """Read g stacked p x p symmetric matrices (g*p CSV rows)."""
    rows = _read_float_rows(path)
    A = np.array(rows)
    if A.ndim != 2 or A.shape[1] != p or A.shape[0] % p != 0:
        raise ValueError(
            f"{path}: expected g*{p} rows of width {p}, got shape {A.shape}"
        )
    g = A.shape[0] // p
    return [
        _symmetrize_checked(A[i * p : (i + 1) * p], context=f"{path} block {i}")
        for i in range(g)
    ]


def _read_float_rows(path):
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    return rows
