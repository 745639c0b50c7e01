"""Bundled reference instances used by the example command and the tests.

Three worked instances: a 4-source degraded problem with a full
certificate, a 4-source block-circulant problem, and a 3-source problem
certified through the simplified check. Printed matrices carry 4 decimal
places; expected values computed by independent prototypes are frozen at
6 decimals.
"""

import numpy as np

from .bt_solver import MTProblem
from .matlib import BlockPattern
from .remote_model import NoisePattern
from .tightness import Certificate

# ---------- instance 1: 4 sources, one degraded, pair + two singletons ----------

SIGMA_Y_1 = np.array(
    [
        [1.0000, 0.9000, 0.8000, 0.8000],
        [0.9000, 1.0000, 0.7000, 0.7000],
        [0.8000, 0.7000, 1.0000, 1.0000],
        [0.8000, 0.7000, 1.0000, 1.1000],
    ]
)
D_1 = np.array([0.3760, 0.35, 0.3, 0.5])
PATTERN_1 = BlockPattern(perm=(1, 2, 3, 4), k=1)
SIGMA_N_1 = np.array(
    [
        [0.2942, 0.2852, 0.0, 0.0],
        [0.2852, 0.4535, 0.0, 0.0],
        [0.0, 0.0, 0.0923, 0.0],
        [0.0, 0.0, 0.0, 0.1923],
    ]
)

D_TILDE_1_PRINTED = np.array(
    [
        [0.3760, 0.2740, 0.1818, 0.1818],
        [0.2740, 0.3500, 0.1231, 0.1231],
        [0.1818, 0.1231, 0.3000, 0.3000],
        [0.1818, 0.1231, 0.3000, 0.4000],
    ]
)
GAMMA_1_PRINTED = np.array(
    [
        [0.2248, 0.1753, 0.0, 0.0],
        [0.1753, 0.2791, 0.0, 0.0],
        [0.0, 0.0, 0.0783, 0.0],
        [0.0, 0.0, 0.0, 0.1923],
    ]
)
SIGMA_X_1_PRINTED = np.array([3.1162, 0.0923, 0.0377, 0.0061])
H_1_PRINTED = np.array(
    [
        [-0.4712, -0.4130, -0.5511, -0.5511],
        [0.0, 0.0, 0.7071, -0.7071],
        [0.5417, 0.5619, -0.4421, -0.4421],
        [-0.6961, 0.7167, 0.0290, 0.0290],
    ]
)

LAM_1_PRINTED = np.array(
    [
        [0.2248, 0.2489, 0.0967, 0.0967],
        [0.2489, 0.2791, 0.1075, 0.1075],
        [0.0967, 0.1075, 0.0783, 0.0000],
        [0.0967, 0.1075, 0.0000, 0.1923],
    ]
)
OMEGA_1_PRINTED = np.diag([0.0, 0.0, 0.0, 0.1])
THETA_1_PRINTED = np.zeros((2, 2))
PI_1_PRINTED = np.array([1.0377, 1.8957, 2.6331, 0.0])

EXPECTED_1 = {
    "sum_rate": 0.868900,
    "w": (0.011279, 1.373200, 1.933452, 0.0),
    "gamma_pair": ((0.224798, 0.175306), (0.175306, 0.279117)),
    "segment_offdiag_mu": 0.250489,
    "segment_offdiag_lb": 0.100122,
    "psd_defect": 0.092300,
    "bd_partition": ((0,), (1,), (2, 3)),
    "bd_sigma_z": 0.1,
}


def problem_1():
    return MTProblem(sigma_y=SIGMA_Y_1, d=D_1)


def noise_1():
    return NoisePattern(pattern=PATTERN_1, sigma_n=SIGMA_N_1)


def certificate_1():
    return Certificate(
        lam=LAM_1_PRINTED,
        omega=OMEGA_1_PRINTED,
        thetas=(THETA_1_PRINTED,),
        pi=PI_1_PRINTED,
    )


# ---------- instance 2: block-circulant 4 sources, two coupled pairs ----------

SIGMA_Y_2 = np.array(
    [
        [1.000, 0.500, 0.975, 0.480],
        [0.500, 1.000, 0.480, 0.975],
        [0.975, 0.480, 1.000, 0.500],
        [0.480, 0.975, 0.500, 1.000],
    ]
)
D_2 = np.full(4, 0.1362)
PATTERN_2 = BlockPattern(perm=(1, 2, 3, 4), k=2)
SIGMA_N_2 = np.array(
    [
        [0.025, 0.020, 0.0, 0.0],
        [0.020, 0.025, 0.0, 0.0],
        [0.0, 0.0, 0.025, 0.020],
        [0.0, 0.0, 0.020, 0.025],
    ]
)

D_TILDE_2_PRINTED = np.array(
    [
        [0.1362, 0.0189, 0.1142, 0.0018],
        [0.0189, 0.1362, 0.0018, 0.1142],
        [0.1142, 0.0018, 0.1362, 0.0189],
        [0.0018, 0.1142, 0.0189, 0.1362],
    ]
)
WANG_BC_RHS_2_PRINTED = np.array(
    [
        [7.5599, 5.4290, -3.6183, -5.7492],
        [5.4290, 7.5599, -5.7492, -3.6183],
        [-3.6183, -5.7492, 7.5599, 5.4290],
        [-5.7492, -3.6183, 5.4290, 7.5599],
    ]
)
WANG_BC_LHS_2_PRINTED = 4.1631
COR_MARGIN_LHS_2_PRINTED = 0.0219
COR_MARGIN_RHS_2_PRINTED = 0.0171

EXPECTED_2 = {
    "q": 0.298534,
    "sum_rate": 2.005937,
    # recomputed from the stated row-sum formula; the printed 4.1631 does
    # not reproduce under any reading we found (see the pinned RHS, which
    # matches to 1.9e-4)
    "wang_bc_lhs": 4.262791,
    "cor_margin_lhs": 0.021925,
    # recomputed 2|g12| - sqrt(g11*g22); the printed 0.0171 equals the
    # surrogate's own off-diagonal (0.017094), not this combination
    "cor_margin_rhs": 0.012176,
    "gamma_pair": ((0.022012, 0.017094), (0.017094, 0.022012)),
}


def problem_2():
    return MTProblem(sigma_y=SIGMA_Y_2, d=D_2)


def noise_2():
    return NoisePattern(pattern=PATTERN_2, sigma_n=SIGMA_N_2)


# ---------- instance 3: 3 sources, pair + singleton ----------

SIGMA_Y_3 = np.array(
    [
        [1.00, 0.95, 0.70],
        [0.95, 1.00, 0.60],
        [0.70, 0.60, 1.00],
    ]
)
D_3 = np.array([0.4, 0.45, 0.3])
PATTERN_3 = BlockPattern(perm=(1, 2, 3), k=1)
SIGMA_N_3 = np.array(
    [
        [0.4827, 0.5074, 0.0],
        [0.5074, 0.6205, 0.0],
        [0.0, 0.0, 0.0512],
    ]
)

COR_MARGIN_LHS_3_PRINTED = 0.3596
COR_MARGIN_RHS_3_PRINTED = 0.2815

EXPECTED_3 = {
    "sum_rate": 0.839443,
    "w": (0.522157, 0.514606, 2.050296),
    "d_tilde": (
        (0.4, 0.380003, 0.143089),
        (0.380003, 0.45, 0.105616),
        (0.143089, 0.105616, 0.3),
    ),
    "gamma": (
        (0.318669, 0.320599, 0.0),
        (0.320599, 0.405938, 0.0),
        (0.0, 0.0, 0.046336),
    ),
    "cor_margin_lhs": 0.359600,
    "cor_margin_rhs": 0.281533,
    "remote_rank": 3,
}


def problem_3():
    return MTProblem(sigma_y=SIGMA_Y_3, d=D_3)


def noise_3():
    return NoisePattern(pattern=PATTERN_3, sigma_n=SIGMA_N_3)


# ---------- two-source sweep reference (matrix-vs-diagonal comparison) ----------

# unit variances, correlation 0.9, targets (0.1, 0.05) for the sweep;
# equal targets (0.1, 0.1) for the diagonal-region cross-check
SWEEP_RHO = 0.9
SWEEP_D = (0.1, 0.05)
CROSSCHECK_D = (0.1, 0.1)
EXPECTED_CLASSIC = {
    "sum_rate": 1.558671,
    "beta_max": 2.377500,
}


def sweep_sigma():
    return np.array([[1.0, SWEEP_RHO], [SWEEP_RHO, 1.0]])
