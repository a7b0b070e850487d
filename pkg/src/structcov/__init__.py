"""Joint estimation of covariance matrices sharing a low-dimensional affine structure.

The toolkit covers half-vectorization algebra (matspace), structure subspaces
and projections (structures), heterogeneous Gaussian and complex DGP sampling
(sampling), the truncated-SVD estimator with its rank-selection rules (tsvd),
Cramer-Rao bound machinery (crb), and a seeded Monte-Carlo benchmark harness
(bench) with a command-line front end (cli).
"""

from .matspace import kron, mat, pinv, restrict, svd, vec_index_set, vech, vech_len
from .structures import (
    SubspaceModel,
    banded_model,
    circulant_model,
    custom_model,
    diagonal_model,
    project,
    proper_complex_model,
    real_embed,
    toeplitz_model,
)
from .sampling import (
    DgpState,
    Scenario,
    dgp_initial_state,
    dgp_step,
    sample_complex,
    sample_gaussian,
    scm,
    substream,
    toeplitz_scenario,
)
from .tsvd import (
    TsvdEstimate,
    alpha_ratio,
    aoht_omega,
    center,
    estimate,
    mp_median,
    rank_select_alpha,
    rank_select_aoht,
    rank_select_elbow,
    sphericity,
    truncate,
)
from .crb import (
    CrbReport,
    FactorPair,
    crb_floor,
    crb_report,
    crb_trace,
    factorize,
    fim,
    jacobian,
    jacobian_rank,
    marginal_mse,
)

__version__ = "0.1.0"
