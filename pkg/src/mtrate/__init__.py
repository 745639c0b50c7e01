"""Sum-rate bounds, tightness certificates, and structure reductions for
correlated Gaussian source coding under per-source distortion targets."""

from .bd_reduce import BDStructure, bt_sum_rate_preserved, detect, reduce
from .bt_solver import (
    BTSolution,
    MTProblem,
    solve,
    solve_block_circulant,
    sum_rate_at,
    verify,
)
from .errors import InvalidProblemError, MtrateError, NumericalError
from .matlib import (
    BlockPattern,
    SpectralDecomposition,
    block_circulant_eigvals,
    block_submatrix,
    conforms_to_pattern,
    is_block_circulant,
    is_psd,
    kron,
    psd_leq,
    real_fourier,
    spectral,
    star,
)
from .remote_model import (
    GammaTilde,
    NoisePattern,
    RemoteModel,
    build,
    gamma_tilde,
    lower_bound_eval,
    lower_bound_optimize,
)
from .report import CheckReport
from .tightness import (
    Certificate,
    check_corollary1,
    check_wang,
    check_wang_block_circulant,
    corollary1_certificate,
    search_noise,
    verify_theorem2,
    wang_block_circulant_parts,
)
from .two_terminal import (
    BoundSet,
    SubdiffSegment,
    TwoTermInstance,
    achievability,
    bounds,
    classic_region_sum_rate,
    classic_per_rate_bound,
    feasible_theta_range,
    gap_supremum,
    gradients,
    normalize,
    subdiff_segment,
    theta_tilde,
    tight_diagonal_noise,
)

__version__ = "0.1.0"

__all__ = [
    "BDStructure",
    "BTSolution",
    "BlockPattern",
    "BoundSet",
    "Certificate",
    "CheckReport",
    "GammaTilde",
    "InvalidProblemError",
    "MTProblem",
    "MtrateError",
    "NoisePattern",
    "NumericalError",
    "RemoteModel",
    "SpectralDecomposition",
    "SubdiffSegment",
    "TwoTermInstance",
    "achievability",
    "block_circulant_eigvals",
    "block_submatrix",
    "bounds",
    "bt_sum_rate_preserved",
    "build",
    "check_corollary1",
    "check_wang",
    "check_wang_block_circulant",
    "classic_per_rate_bound",
    "classic_region_sum_rate",
    "conforms_to_pattern",
    "corollary1_certificate",
    "detect",
    "feasible_theta_range",
    "gamma_tilde",
    "gap_supremum",
    "gradients",
    "is_block_circulant",
    "is_psd",
    "kron",
    "lower_bound_eval",
    "lower_bound_optimize",
    "normalize",
    "psd_leq",
    "real_fourier",
    "reduce",
    "search_noise",
    "solve",
    "solve_block_circulant",
    "spectral",
    "star",
    "subdiff_segment",
    "sum_rate_at",
    "theta_tilde",
    "tight_diagonal_noise",
    "verify",
    "verify_theorem2",
    "wang_block_circulant_parts",
]
