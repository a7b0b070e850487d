# Cramer-Rao machinery for the factored parametrization Y = U Z of the stacked
# vech'd covariances: the block Jacobian, its exact rank, the Gaussian Fisher
# information, the pseudo-inverse trace bound, the closed-form floor, and the
# marginal per-matrix MSE shape.

import warnings
from dataclasses import dataclass

import numpy as np

from .matspace import mat, restrict, vec_index_set

__all__ = [
    "FactorPair",
    "CrbReport",
    "jacobian",
    "jacobian_rank",
    "fim",
    "crb_trace",
    "crb_floor",
    "marginal_mse",
    "factorize",
    "crb_report",
]

RANK_SV_CUTOFF = 1e-8
MAX_CONDITION = 1e12
CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class FactorPair:
    """Factors U (l x r) and Z (r x K) with full numeric rank r each."""

    U: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        if self.U.ndim != 2 or self.Z.ndim != 2 or self.U.shape[1] != self.Z.shape[0]:
            raise ValueError("incompatible factor shapes")
        r = self.U.shape[1]
        for name, M in (("U", self.U), ("Z", self.Z)):
            s = np.linalg.svd(M, compute_uv=False)
            if s.size == 0 or np.sum(s > RANK_SV_CUTOFF * s[0]) != r:
                raise ValueError(f"factor {name} is rank deficient (needs rank {r})")

    @property
    def l(self):
        return self.U.shape[0]

    @property
    def r(self):
        return self.U.shape[1]

    @property
    def K(self):
        return self.Z.shape[1]


@dataclass(frozen=True)
class CrbReport:
    """Summary of the bound for one scenario at sample size n."""

    l: int
    r: int
    K: int
    n: int
    jacobian_rank_theory: int
    jacobian_rank_numeric: int
    trace_bound: float
    floor: float
    marginal_per_matrix: float


def jacobian(fp):
    """Block Jacobian of the map (U, Z) -> stacked vech'd covariances.

    Row block k is [ z_k^T kron I_l | 0 ... U ... 0 ]: the left l x lr block
    differentiates in U (columns ordered as vec(U)), the right blocks form a
    K-fold block diagonal of U.
    """
    l, r, K = fp.l, fp.r, fp.K
    J = np.zeros((l * K, l * r + K * r))
    I_l = np.eye(l)
    for k in range(K):
        rows = slice(k * l, (k + 1) * l)
        J[rows, : l * r] = np.kron(fp.Z[:, k], I_l)
        J[rows, l * r + k * r : l * r + (k + 1) * r] = fp.U
    return J


def jacobian_rank(l, r, K):
    """Exact rank lr + Kr - r^2 of the (rank-deficient) Jacobian."""
    if not 1 <= r <= min(l, K):
        raise ValueError(f"rank r={r} outside [1, min({l}, {K})]")
    return l * r + K * r - r * r


def _numeric_rank(M, cutoff=RANK_SV_CUTOFF):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > cutoff * s[0]))


def _inv_kron_restricted(Q, idx):
    # [Q^{-1} kron Q^{-1}]_{I,I} via a Cholesky solve; the full p^2 x p^2
    # Kronecker exists only transiently per group.
    w = np.linalg.eigvalsh(Q)
    if w[0] <= 0 or w[-1] / w[0] > MAX_CONDITION:
        raise np.linalg.LinAlgError(
            f"covariance not safely invertible (condition {w[-1] / max(w[0], 1e-300):.2e})"
        )
    L = np.linalg.cholesky(Q)
    eye = np.eye(Q.shape[0])
    Qinv = np.linalg.solve(L.T, np.linalg.solve(L, eye))
    Qinv = (Qinv + Qinv.T) / 2.0
    return restrict(np.kron(Qinv, Qinv), idx)


def fim(fp, covariances):
    """Gaussian per-sample information (1/2) J^T diag([Q_k^-1 kron Q_k^-1]_I,I) J.

    Requires mat(U z_k) to reproduce each Q_k; symmetric PSD output with the
    same rank as the Jacobian.
    """
    l, r, K = fp.l, fp.r, fp.K
    if len(covariances) != K:
        raise ValueError(f"expected {K} covariances, got {len(covariances)}")
    p = np.asarray(covariances[0]).shape[0]
    idx = vec_index_set(p)
    J = jacobian(fp)
    DJ = np.empty_like(J)
    for k, Q in enumerate(covariances):
        Q = np.asarray(Q, dtype=float)
        gap = np.abs(mat(fp.U @ fp.Z[:, k]) - Q).max()
        if gap > CONSISTENCY_TOL * max(1.0, np.abs(Q).max()):
            raise ValueError(
                f"factorization inconsistent with covariance {k} (gap {gap:.3e})"
            )
        rows = slice(k * l, (k + 1) * l)
        DJ[rows] = _inv_kron_restricted(Q, idx) @ J[rows]
    F = 0.5 * (J.T @ DJ)
    return (F + F.T) / 2.0


def _pinv_forced_rank(F, rank):
    # Eigendecomposition pseudo-inverse with the retained rank pinned to the
    # theoretical value: the FIM is structurally singular, and a floating
    # cutoff would make the trace unstable near the rank boundary.
    w, V = np.linalg.eigh(F)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    numeric = int(np.sum(w > RANK_SV_CUTOFF * max(w[0], 0.0)))
    if numeric != rank:
        warnings.warn(
            f"FIM numeric rank {numeric} != theoretical rank {rank}; "
            "forcing the theoretical value",
            RuntimeWarning,
            stacklevel=3,
        )
    inv = np.zeros_like(w)
    inv[:rank] = 1.0 / w[:rank]
    return (V * inv) @ V.T


def crb_trace(fp, covariances, n):
    """Trace of the bound: (2/n) Tr([J^T D J]^+ J^T J), rank pinned by theory."""
    if n < 1:
        raise ValueError("n must be at least 1")
    J = jacobian(fp)
    F = fim(fp, covariances)
    rank = jacobian_rank(fp.l, fp.r, fp.K)
    Fpinv = _pinv_forced_rank(2.0 * F, rank)  # 2F = J^T D J
    return float(2.0 / n * np.trace(Fpinv @ (J.T @ J)))


def crb_floor(l, r, K, n, lambda_min):
    """Closed-form relaxation (2 lambda_min^2 / n)(lr + Kr - r^2)."""
    return float(2.0 * lambda_min**2 / n * jacobian_rank(l, r, K))


def marginal_mse(l, r, K, n):
    """Per-matrix MSE shape (lr - r^2)/(Kn) + r/n used as the K-sweep overlay."""
    return float((l * r - r * r) / (K * n) + r / n)


def factorize(Y, r):
    """SVD factor pair: U = top-r left singular vectors, Z = Sigma W^T.

    U Z is the best rank-r approximation of Y; requires numeric rank >= r.
    """
    Y = np.asarray(Y, dtype=float)
    U, s, Wt = np.linalg.svd(Y, full_matrices=False)
    if _numeric_rank(Y) < r:
        raise ValueError(f"matrix rank below requested r={r}")
    return FactorPair(U=U[:, :r], Z=s[:r, None] * Wt[:r])


def crb_report(scenario, n, r=None):
    """Evaluate the bound for a scenario's ground truth at sample size n.

    The factor rank defaults to the numeric rank of the stacked truth Y
    (the affine offset contributes one direction on top of the span).
    """
    Y = scenario.measurement_truth()
    if r is None:
        r = _numeric_rank(Y)
    fp = factorize(Y, r)
    J = jacobian(fp)
    eigs = [np.linalg.eigvalsh(Q) for Q in scenario.covariances]
    lam_min = min(w[0] for w in eigs)
    l, K = Y.shape
    return CrbReport(
        l=l,
        r=r,
        K=K,
        n=n,
        jacobian_rank_theory=jacobian_rank(l, r, K),
        jacobian_rank_numeric=_numeric_rank(J),
        trace_bound=crb_trace(fp, scenario.covariances, n),
        floor=crb_floor(l, r, K, n, lam_min),
        marginal_per_matrix=marginal_mse(l, r, K, n),
    )
