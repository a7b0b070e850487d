# Truncated-SVD joint covariance estimator with column-mean separation, plus
# the spectrum thresholding rules used to pick the truncation rank:
#   * the alpha power rule (Wishart signal-fraction estimate),
#   * asymptotically optimal hard thresholding (AOHT, Marchenko-Pastur based),
#   * the elbow rule (largest singular-value gap).

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .matspace import mat, vech

__all__ = [
    "center",
    "truncate",
    "sphericity",
    "alpha_ratio",
    "rank_select_alpha",
    "rank_select_elbow",
    "rank_select_aoht",
    "mp_median",
    "lambda_star",
    "aoht_omega",
    "TsvdEstimate",
    "estimate",
    "psd_clip",
    "RANK_RULES",
]

RANK_RULES = ("known", "alpha", "aoht", "aoht-c", "elbow", "elbow-c")


def center(S):
    """Split the measurement matrix into (columns minus mean, column mean)."""
    S = np.asarray(S, dtype=float)
    u0 = S.mean(axis=1)
    return S - u0[:, None], u0


def truncate(M, r):
    """Best rank-r approximation in Frobenius norm (Eckart-Young)."""
    M = np.asarray(M, dtype=float)
    if not 0 <= r <= min(M.shape):
        raise ValueError(f"rank {r} outside [0, {min(M.shape)}]")
    if r == 0:
        return np.zeros_like(M)
    U, s, Wt = np.linalg.svd(M, full_matrices=False)
    return (U[:, :r] * s[:r]) @ Wt[:r]


def sphericity(S):
    """Sphericity coefficient p ||S||_F^2 / (Tr S)^2, in [1, p]."""
    S = np.asarray(S, dtype=float)
    tr = np.trace(S)
    if tr == 0.0:
        raise ValueError("sphericity is undefined for zero-trace matrices")
    return S.shape[0] * np.sum(S * S) / tr**2


def alpha_ratio(scms, n):
    """Estimated signal-to-measurement power fraction.

    alpha = 1 - (1/n) * sum_k (Tr S_k)^2 / sum_k ||S_k||_F^2, clamped to [0, 1].
    """
    traces = np.array([np.trace(S) for S in scms])
    norms2 = np.array([np.sum(np.asarray(S) ** 2) for S in scms])
    total = norms2.sum()
    if total == 0.0:
        raise ValueError("alpha_ratio needs at least one nonzero SCM")
    return float(min(1.0, max(0.0, 1.0 - (traces**2).sum() / (n * total))))


def rank_select_alpha(S, alpha):
    """Smallest count of top singular values whose energy best matches alpha.

    argmin over L of |sum_{i<=L} sigma_i^2(S) - alpha ||S||_F^2|, ties broken
    toward smaller L. L = 0 (pure column-mean estimator) is admissible.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha {alpha} outside [0, 1]")
    s = np.linalg.svd(np.asarray(S, dtype=float), compute_uv=False)
    cum = np.concatenate([[0.0], np.cumsum(s**2)])
    return int(np.argmin(np.abs(cum - alpha * cum[-1])))


def _elbow_from_sigma(s):
    if s.size < 2:
        raise ValueError("elbow rule needs at least two singular values")
    gaps = s[:-1] - s[1:]
    return int(np.argmax(gaps)) + 1


def rank_select_elbow(M):
    """Truncation index of the largest gap between consecutive singular values."""
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    return _elbow_from_sigma(s)


# ---------------------------------------------------------------------------
# AOHT: hard thresholding at omega(l/K) times the median singular value.


def _mp_density(x, ratio, lo, hi):
    return np.sqrt(max((hi - x) * (x - lo), 0.0)) / (2.0 * np.pi * ratio * x)


def mp_median(ratio):
    """Median of the Marchenko-Pastur law with aspect ratio in (0, 1].

    The quantile is solved by bisection on the integrated density; the
    bracketing interval is shrunk below 1e-6.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"aspect ratio {ratio} outside (0, 1]")
    lo_edge = (1.0 - np.sqrt(ratio)) ** 2
    hi_edge = (1.0 + np.sqrt(ratio)) ** 2
    cdf = lambda x: quad(_mp_density, lo_edge, x, args=(ratio, lo_edge, hi_edge))[0]
    lo, hi = lo_edge, hi_edge
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lambda_star(ratio):
    """Known-noise optimal hard-threshold coefficient (4/sqrt(3) at ratio 1)."""
    b = float(ratio)
    return np.sqrt(2.0 * (b + 1.0) + 8.0 * b / (b + 1.0 + np.sqrt(b * b + 14.0 * b + 1.0)))


_omega_cache = {}


def aoht_omega(l, K):
    """Median-calibrated AOHT coefficient omega for an l x K matrix.

    omega = lambda_star(beta) / sqrt(mp_median(beta)) with beta the aspect
    ratio min(l, K)/max(l, K); cached per shape ratio.
    """
    beta = min(l, K) / max(l, K)
    if beta not in _omega_cache:
        _omega_cache[beta] = float(lambda_star(beta) / np.sqrt(mp_median(beta)))
    return _omega_cache[beta]


def _aoht_from_sigma(s, l, K):
    tau = aoht_omega(l, K) * np.median(s)
    return int(np.sum(s > tau))


def rank_select_aoht(M):
    """Count of singular values strictly above omega(l/K) * median singular value."""
    M = np.asarray(M, dtype=float)
    l, K = M.shape
    s = np.linalg.svd(M, compute_uv=False)
    return _aoht_from_sigma(s, l, K)


# ---------------------------------------------------------------------------
# Full estimator.


@dataclass(frozen=True)
class TsvdEstimate:
    """Result of the TSVD estimator.

    Yhat's columns are the vech'd covariance estimates; sigma holds the full
    singular-value vector of the centered measurement matrix.
    """

    Yhat: np.ndarray
    u0hat: np.ndarray
    r_used: int
    sigma: np.ndarray
    rank_rule: str
    alpha: float | None = None


def estimate(S, rank_rule, known_r=None, n=None, alpha=None):
    """Center, truncate at the selected rank, and add the column mean back.

    Parameters
    ----------
    S : (l, K) measurement matrix of vech'd SCM columns.
    rank_rule : one of RANK_RULES. Rules ending in -c examine the centered
        matrix; 'alpha' and the plain 'aoht'/'elbow' examine S as given.
    known_r : truncation rank for rule 'known'.
    n : samples per group; required by the 'alpha' rule unless alpha is given.
    alpha : fixed power fraction for the 'alpha' rule (bypasses the formula).
    """
    S = np.asarray(S, dtype=float)
    if not np.all(np.isfinite(S)):
        raise ValueError("measurement matrix has non-finite entries")
    l, K = S.shape
    Sprime, u0hat = center(S)
    U, sig, Wt = np.linalg.svd(Sprime, full_matrices=False)
    rmax = min(l, K)

    used_alpha = None
    if rank_rule == "known":
        if known_r is None:
            raise ValueError("rank rule 'known' needs known_r")
        r = int(known_r)
        if not 0 <= r <= rmax:
            raise ValueError(f"known_r {r} outside [0, {rmax}]")
    elif rank_rule == "alpha":
        if alpha is None:
            if n is None:
                raise ValueError("the alpha formula needs the per-group sample count n")
            used_alpha = alpha_ratio([mat(S[:, k]) for k in range(K)], n)
        else:
            used_alpha = float(alpha)
        r = rank_select_alpha(S, used_alpha)
    elif rank_rule == "aoht":
        r = rank_select_aoht(S)
    elif rank_rule == "aoht-c":
        r = _aoht_from_sigma(sig, l, K)
    elif rank_rule == "elbow":
        r = rank_select_elbow(S)
    elif rank_rule == "elbow-c":
        r = _elbow_from_sigma(sig)
    else:
        raise ValueError(f"unknown rank rule {rank_rule!r}")

    r = max(0, min(int(r), rmax))
    Yhat = (U[:, :r] * sig[:r]) @ Wt[:r] + u0hat[:, None]
    return TsvdEstimate(
        Yhat=Yhat,
        u0hat=u0hat,
        r_used=r,
        sigma=sig,
        rank_rule=rank_rule,
        alpha=used_alpha,
    )


def psd_clip(est):
    """Clip negative eigenvalues of each mat(y_k) to zero (optional post-step)."""
    cols = []
    for k in range(est.Yhat.shape[1]):
        Q = mat(est.Yhat[:, k])
        w, V = np.linalg.eigh(Q)
        w = np.maximum(w, 0.0)
        Qc = (V * w) @ V.T
        cols.append(vech((Qc + Qc.T) / 2.0))
    return np.column_stack(cols)
