# Data generation: heterogeneous Gaussian groups, sample covariance matrices,
# the Toeplitz benchmark scenario, and the complex time-varying DGP.
#
# All randomness flows through counter-based Philox substreams keyed by
# (master seed, *path), so trials parallelize without stream overlap and every
# draw is reproducible bit for bit.

import configparser
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .matspace import mat, vech
from .structures import SubspaceModel, model_from_generators, toeplitz_generator

__all__ = [
    "substream",
    "sample_gaussian",
    "scm",
    "Scenario",
    "toeplitz_scenario",
    "structured_scenario",
    "DgpState",
    "dgp_initial_state",
    "dgp_step",
    "sample_complex",
    "complex_to_real",
    "write_samples_csv",
    "read_samples_csv",
    "load_scenario_config",
]


def substream(seed, *path):
    """Philox generator for the substream (seed, *path).

    Distinct paths yield statistically independent streams; the same
    (seed, path) always reproduces the same stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in path))
    return np.random.Generator(np.random.Philox(ss))


def _as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed)


def sample_gaussian(Q, n, seed):
    """Draw n i.i.d. N(0, Q) columns via the Cholesky factor of Q.

    Raises np.linalg.LinAlgError when Q is not positive definite.
    """
    Q = np.asarray(Q, dtype=float)
    L = np.linalg.cholesky(Q)
    rng = _as_generator(seed)
    return L @ rng.standard_normal((Q.shape[0], n))


def scm(samples):
    """Sample covariance (1/n) sum x_i x_i^T, no mean subtraction.

    The populations are centered by assumption; output is exactly symmetric.
    """
    X = np.asarray(samples, dtype=float)
    n = X.shape[1]
    if n == 0:
        raise ValueError("scm needs at least one sample")
    S = X @ X.T / n
    return (S + S.T) / 2.0


@dataclass(frozen=True)
class Scenario:
    """K positive-definite covariances lying in a common affine structure."""

    p: int
    K: int
    covariances: list
    model: SubspaceModel
    seed: int
    n: int | None = None
    rejections: int = 0

    def measurement_truth(self):
        """The l x K matrix Y of stacked vech(Q_k)."""
        return np.column_stack([vech(Q) for Q in self.covariances])


def toeplitz_scenario(p, K, seed, n=None):
    """The Toeplitz benchmark scenario: Q_k = I + sum_j z_k^j D_j / ||D_j||_F.

    D_j has ones on the +-j-th subdiagonals, z_k^j ~ U[-1/2, 1/2] i.i.d., and
    draws whose Q_k is not positive definite are rejected and redrawn. The
    recorded ground-truth model is the affine family with offset vech(I) and
    the r = p - 1 normalized subdiagonal directions.
    """
    if p < 2:
        raise ValueError("toeplitz scenario needs p >= 2")
    gens = [toeplitz_generator(p, j) for j in range(1, p)]
    norms = [np.linalg.norm(D) for D in gens]
    rng = _as_generator(seed)
    covs = []
    rejections = 0
    eye = np.eye(p)
    while len(covs) < K:
        z = rng.uniform(-0.5, 0.5, size=p - 1)
        Q = eye + sum(zj / nj * D for zj, nj, D in zip(z, norms, gens))
        if np.linalg.eigvalsh(Q)[0] > 0:
            covs.append(Q)
        else:
            rejections += 1
    model = model_from_generators(
        p, [D / nj for D, nj in zip(gens, norms)], kind="toeplitz", offset=vech(eye)
    )
    return Scenario(
        p=p,
        K=K,
        covariances=covs,
        model=model,
        seed=seed if isinstance(seed, int) else -1,
        n=n,
        rejections=rejections,
    )


def structured_scenario(model, K, seed, spread=0.5, n=None):
    """Generic scenario in a given structure: Q_k = I + perturbation in the span.

    Coefficients are U[-spread, spread] over the orthonormal basis directions;
    non-PD draws are rejected. Requires the identity (projected offset) to be
    positive definite, which holds for all built-in families.
    """
    p = model.p
    rng = _as_generator(seed)
    eye = np.eye(p)
    base = model.offset + model.basis @ (model.basis.T @ (vech(eye) - model.offset))
    covs = []
    rejections = 0
    while len(covs) < K:
        z = rng.uniform(-spread, spread, size=model.r)
        Q = mat(base + model.basis @ z)
        if np.linalg.eigvalsh(Q)[0] > 0:
            covs.append(Q)
        else:
            rejections += 1
    return Scenario(
        p=p,
        K=K,
        covariances=covs,
        model=model,
        seed=seed if isinstance(seed, int) else -1,
        n=n,
        rejections=rejections,
    )


# ---------------------------------------------------------------------------
# Complex time-varying DGP (GARCH-style recursion on a hermitian covariance).


@dataclass(frozen=True)
class DgpState:
    """Hermitian PD covariance with unit Frobenius norm, plus the time index."""

    H: np.ndarray
    t: int
    beta: float


def dgp_initial_state(p, beta):
    """Start from the normalized identity (any hermitian PD start is admissible)."""
    H0 = np.eye(p, dtype=complex)
    return DgpState(H=H0 / np.linalg.norm(H0), t=0, beta=float(beta))


def dgp_step(state, seed):
    """One recursion tick: H <- normalize((1 - beta) H + beta M M^H).

    M has i.i.d. standard normal real and imaginary parts.
    """
    rng = _as_generator(seed)
    p = state.H.shape[0]
    M = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    Hhat = (1.0 - state.beta) * state.H + state.beta * (M @ M.conj().T)
    Hhat = (Hhat + Hhat.conj().T) / 2.0
    return replace(state, H=Hhat / np.linalg.norm(Hhat), t=state.t + 1)


def _hermitian_sqrt(H):
    w, V = np.linalg.eigh(H)
    if w[0] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return (V * np.sqrt(w)) @ V.conj().T


def sample_complex(H, n, seed):
    """n columns H^{1/2} y with y circularly-symmetric standard complex normal.

    CN(0, 1) entries have variance 1/2 per real component, so E[x x^H] = H.
    """
    H = np.asarray(H, dtype=complex)
    R = _hermitian_sqrt(H)
    rng = _as_generator(seed)
    p = H.shape[0]
    y = (rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))) / np.sqrt(2.0)
    return R @ y


def complex_to_real(X):
    """Stack Re over Im: complex p x n samples become real 2p x n samples."""
    return np.vstack([X.real, X.imag])


# ---------------------------------------------------------------------------
# Sample dump CSV and scenario configuration files.


def write_samples_csv(groups, path):
    """Write per-group samples: header group,sample_index,component_1..p."""
    p = groups[0].shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "sample_index"] + [f"component_{i+1}" for i in range(p)])
        for k, X in enumerate(groups):
            for i in range(X.shape[1]):
                w.writerow([k + 1, i + 1] + [repr(float(x)) for x in X[:, i]])


def read_samples_csv(path):
    """Read a sample dump back into a list of p x n_k arrays (group order)."""
    by_group = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["group", "sample_index"]:
            raise ValueError(f"{path}: expected header group,sample_index,component_...")
        for row in reader:
            if not row:
                continue
            k = int(row[0])
            by_group.setdefault(k, []).append([float(x) for x in row[2:]])
    if not by_group:
        raise ValueError(f"{path}: no samples")
    groups = []
    for k in sorted(by_group):
        groups.append(np.array(by_group[k]).T)
    return groups


def load_scenario_config(path):
    """Read scenario keys p, K, n, structure, seed, beta from an INI file."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ValueError(f"cannot read config {path}")
    section = cp["scenario"] if cp.has_section("scenario") else cp[cp.sections()[0]]
    cfg = {
        "p": section.getint("p", fallback=None),
        "K": section.getint("K", fallback=None),
        "n": section.getint("n", fallback=None),
        "structure": section.get("structure", fallback="toeplitz"),
        "seed": section.getint("seed", fallback=0),
        "beta": section.getfloat("beta", fallback=0.01),
    }
    if cfg["p"] is None or cfg["K"] is None:
        raise ValueError(f"{path}: scenario config needs at least p and K")
    return cfg
