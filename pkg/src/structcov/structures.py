# Affine structure subspaces for covariance families, and projection onto them.
#
# A model is the affine set { mat(u0 + U c) : c in R^r } with U orthonormal in
# vech coordinates. Bases are orthonormalized from raw generators; the reported
# dimension is always the numeric rank of the generator set, never a hard-coded
# count.

from dataclasses import dataclass, field

import numpy as np

from . import matspace
from .matspace import mat, vech, vech_len

__all__ = [
    "SubspaceModel",
    "model_from_generators",
    "diagonal_model",
    "banded_model",
    "circulant_model",
    "toeplitz_model",
    "toeplitz_generator",
    "proper_complex_model",
    "custom_model",
    "real_embed",
    "project",
    "parse_structure",
]

ORTHO_TOL = 1e-10
RANK_CUTOFF = 1e-8  # singular values above cutoff * sigma_1 count toward r
HERMITIAN_TOL = 1e-9


@dataclass(frozen=True)
class SubspaceModel:
    """Affine structure: basis U (l x r, orthonormal columns), offset u0."""

    p: int
    r: int
    basis: np.ndarray
    offset: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        l = vech_len(self.p)
        if self.basis.shape != (l, self.r):
            raise ValueError(
                f"basis shape {self.basis.shape} != ({l}, {self.r})"
            )
        if self.offset.shape != (l,):
            raise ValueError(f"offset shape {self.offset.shape} != ({l},)")
        gram = self.basis.T @ self.basis
        if self.r and np.abs(gram - np.eye(self.r)).max() > ORTHO_TOL:
            raise ValueError("basis columns are not orthonormal")

    @property
    def l(self):
        return vech_len(self.p)


def model_from_generators(p, generators, kind="custom", offset=None, params=None):
    """Orthonormalize symmetric generator matrices into a SubspaceModel.

    The subspace dimension is the numeric rank of the vech'd generator set
    (singular values above RANK_CUTOFF * sigma_1).
    """
    G = np.column_stack([vech(g) for g in generators])
    U, s, _ = np.linalg.svd(G, full_matrices=False)
    r = int(np.sum(s > RANK_CUTOFF * s[0])) if s.size and s[0] > 0 else 0
    u0 = np.zeros(vech_len(p)) if offset is None else np.asarray(offset, dtype=float)
    return SubspaceModel(
        p=p, r=r, basis=U[:, :r], offset=u0, kind=kind, params=params or {}
    )


def diagonal_model(p):
    """Span of diagonal matrices; r = p."""
    gens = []
    for i in range(p):
        E = np.zeros((p, p))
        E[i, i] = 1.0
        gens.append(E)
    return model_from_generators(p, gens, kind="diagonal")


def banded_model(p, b):
    """Symmetric b-banded matrices: entries vanish when |i - h| > b.

    The span has dimension (2p - b)(b + 1)/2; b = 0 coincides with the
    diagonal family and b = p - 1 with the full symmetric space.
    """
    if not 0 <= b <= p - 1:
        raise ValueError(f"bandwidth b={b} outside [0, {p - 1}]")
    gens = []
    for d in range(b + 1):
        for i in range(p - d):
            E = np.zeros((p, p))
            E[i + d, i] = E[i, i + d] = 1.0
            gens.append(E)
    return model_from_generators(p, gens, kind="banded", params={"b": b})


def circulant_model(p):
    """Symmetric circulant matrices.

    Generators place ones at cyclic offsets +-j; the symmetry ties offset j to
    offset p - j, leaving floor(p/2) + 1 free parameters. The reported r is the
    numeric rank of that generator set.
    """
    gens = []
    for j in range(p // 2 + 1):
        E = np.zeros((p, p))
        idx = np.arange(p)
        E[idx, (idx + j) % p] = 1.0
        E[(idx + j) % p, idx] = 1.0
        gens.append(E)
    return model_from_generators(p, gens, kind="circulant")


def toeplitz_generator(p, j):
    """Symmetric generator with ones on the +-j-th subdiagonals (j = 0 gives I)."""
    D = np.zeros((p, p))
    idx = np.arange(p - j)
    D[idx, idx + j] = 1.0
    D[idx + j, idx] = 1.0
    return D


def toeplitz_model(p):
    """Symmetric Toeplitz matrices; r = p."""
    gens = [toeplitz_generator(p, j) for j in range(p)]
    return model_from_generators(p, gens, kind="toeplitz")


def proper_complex_model(p_real):
    """Real embeddings of hermitian matrices: [[A, -B], [B, A]] blocks.

    A runs over symmetric, B over antisymmetric q x q matrices (q = p_real/2),
    giving r = p_real^2 / 4.
    """
    if p_real % 2:
        raise ValueError("proper complex embedding needs an even dimension")
    q = p_real // 2
    gens = []
    for i in range(q):
        for h in range(i, q):
            A = np.zeros((q, q))
            A[i, h] = A[h, i] = 1.0
            G = np.zeros((p_real, p_real))
            G[:q, :q] = A
            G[q:, q:] = A
            gens.append(G)
    for i in range(q):
        for h in range(i + 1, q):
            B = np.zeros((q, q))
            B[i, h] = 1.0
            B[h, i] = -1.0
            G = np.zeros((p_real, p_real))
            G[:q, q:] = -B
            G[q:, :q] = B
            gens.append(G)
    return model_from_generators(p_real, gens, kind="proper_complex")


def custom_model(p, generators):
    """Model from user-supplied symmetric generators; rank is computed, not trusted."""
    gens = [np.asarray(g, dtype=float) for g in generators]
    for g in gens:
        if g.shape != (p, p):
            raise ValueError(f"generator shape {g.shape} != ({p}, {p})")
    return model_from_generators(p, gens, kind="custom")


def real_embed(QC):
    """Real representation (1/2) [[Re Q, -Im Q], [Im Q, Re Q]] of a hermitian Q."""
    QC = np.asarray(QC, dtype=complex)
    scale = max(np.abs(QC).max(), 1.0)
    if np.abs(QC - QC.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValueError("real_embed expects a hermitian matrix")
    Re, Im = QC.real, QC.imag
    top = np.hstack([Re, -Im])
    bot = np.hstack([Im, Re])
    return 0.5 * np.vstack([top, bot])


def project(S, model):
    """Euclidean projection of a symmetric matrix onto the model, in vech coordinates."""
    s = vech(S)
    if s.shape[0] != model.l:
        raise ValueError(
            f"matrix dimension {matspace.dim_from_vech_len(s.shape[0])} != model p={model.p}"
        )
    d = s - model.offset
    return mat(model.offset + model.basis @ (model.basis.T @ d))


def parse_structure(flag, p):
    """Parse a --structure flag: diagonal|banded:b|circulant|toeplitz|proper|custom:path."""
    name, _, arg = flag.partition(":")
    name = name.strip().lower()
    if name == "diagonal":
        return diagonal_model(p)
    if name == "banded":
        if not arg:
            raise ValueError("banded structure needs a bandwidth, e.g. banded:2")
        return banded_model(p, int(arg))
    if name == "circulant":
        return circulant_model(p)
    if name == "toeplitz":
        return toeplitz_model(p)
    if name == "proper":
        return proper_complex_model(p)
    if name == "custom":
        if not arg:
            raise ValueError("custom structure needs a generator CSV, e.g. custom:gens.csv")
        return custom_model(p, matspace.read_stacked_matrices_csv(arg, p))
    raise ValueError(f"unknown structure {flag!r}")
