"""Closed forms for the two-source problem under a full matrix distortion
constraint.

Everything is computed on a normalized instance (v1, v2, rho, theta): unit
target distortions, source standard deviations v1, v2, source correlation
rho >= 0 (inputs with negative correlation are sign-flipped and the flip
recorded), and distortion correlation theta. Rates are in nats.

The lower bound is the max of two branches: a scalar-combination helper
bound (r_mu) and a determinant-based bound (r_lb). They cross at the kink
theta_tilde; below it the bound is tight (an explicit test-channel pair
achieves it), above it the gap to the upper branch is controlled by
gap_supremum. At the kink the rate is nondifferentiable and its
subdifferential is a segment of matrices, exposed by subdiff_segment.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblemError, NumericalError
from .matlib import pd_inverse, psd_leq, symmetrize

KINK_SINGULAR_LIMIT = 1.0 - 1e-9


@dataclass(frozen=True)
class TwoTermInstance:
    """Normalized two-source instance; flipped records a correlation sign flip."""

    v1: float
    v2: float
    rho: float
    theta: float
    flipped: bool = False

    def __post_init__(self):
        if self.v1 <= 0 or self.v2 <= 0:
            raise InvalidProblemError(f"v1, v2 must be positive: {self.v1}, {self.v2}")
        if not (0.0 <= self.rho < 1.0) or 1.0 - self.rho < 1e-12:
            raise InvalidProblemError(f"rho must lie in [0, 1): {self.rho}")
        if not (-1.0 < self.theta < 1.0):
            raise InvalidProblemError(f"theta must lie in (-1, 1): {self.theta}")


@dataclass(frozen=True)
class BoundSet:
    """All sum-rate bound values (nats) at one instance."""

    r_mu: float
    r_lb: float
    r_ub: float
    lower_bound: float
    bt_upper: float
    wagner_composite: float
    gap: float
    theta_tilde: float


@dataclass(frozen=True)
class SubdiffSegment:
    """Endpoints of the subdifferential segment at the kink.

    Both endpoints share the diagonal (d1, d2); the off-diagonals are
    s*sqrt(d1*d2) (scalar-helper end) and s*(2|theta_tilde|-1)*sqrt(d1*d2)
    (determinant end), s = sign of the kink in the original coordinates.
    """

    endpoint_mu: np.ndarray
    endpoint_lb: np.ndarray
    d_kink: np.ndarray
    theta_tilde: float

    def gradient_of(self, psi):
        """Map a segment matrix to -1/2 * Dk^{-1} psi Dk^{-1}.

        This is the rate gradient in the trace pairing dR = tr(G dD);
        doubling it gives the symmetric-coordinate gradient convention
        used by gradients().
        """
        inv = pd_inverse(self.d_kink)
        return -0.5 * inv @ np.asarray(psi, dtype=float) @ inv


def normalize(sigma_y, d):
    """Build the normalized instance for source covariance and distortion matrix.

    v_i = sigma_i / sqrt(D_i), theta = off-diagonal correlation of d; a
    negative source correlation is removed by flipping the sign of source 2.
    """
    sigma_y = symmetrize(sigma_y)
    d = symmetrize(d)
    if sigma_y.shape != (2, 2) or d.shape != (2, 2):
        raise InvalidProblemError("normalize expects 2x2 matrices")
    if d[0, 0] <= 0 or d[1, 1] <= 0 or np.linalg.det(d) <= 0:
        raise InvalidProblemError("distortion matrix must be positive definite")
    if not psd_leq(d, sigma_y):
        raise InvalidProblemError("distortion matrix exceeds the source covariance")
    s1 = math.sqrt(sigma_y[0, 0])
    s2 = math.sqrt(sigma_y[1, 1])
    rho = sigma_y[0, 1] / (s1 * s2)
    theta = d[0, 1] / math.sqrt(d[0, 0] * d[1, 1])
    flipped = rho < 0
    if flipped:
        rho, theta = -rho, -theta
    return TwoTermInstance(
        v1=s1 / math.sqrt(d[0, 0]),
        v2=s2 / math.sqrt(d[1, 1]),
        rho=rho,
        theta=theta,
        flipped=flipped,
    )


def theta_tilde(inst):
    """Kink location: where the two lower-bound branches cross.

    Zero at rho = 0 by continuity (the closed form is 0/0 there).
    """
    if inst.rho == 0.0:
        return 0.0
    fprod = inst.v1 * inst.v2 * (1.0 - inst.rho**2)
    return (math.sqrt(fprod**2 + 4.0 * inst.rho**2) - fprod) / (2.0 * inst.rho)


def feasible_theta_range(inst):
    """Open interval of theta values keeping the distortion matrix admissible."""
    if inst.v1 < 1.0 or inst.v2 < 1.0:
        raise InvalidProblemError(
            "per-source distortion exceeds the source variance (v_i < 1)"
        )
    root = math.sqrt((inst.v1**2 - 1.0) * (inst.v2**2 - 1.0))
    mix = inst.rho * inst.v1 * inst.v2
    return max(-1.0, -root - mix), min(1.0, root + mix)


def gap_supremum(inst):
    """Upper limit of the gap between the bound's two outer branches."""
    fprod = inst.v1 * inst.v2 * (1.0 - inst.rho**2)
    return 0.5 * math.log(1.0 + 4.0 * inst.rho / fprod)


def bounds(inst):
    """Evaluate every bound at the instance (nats)."""
    lo, hi = feasible_theta_range(inst)
    if not (lo < inst.theta < hi):
        raise InvalidProblemError(
            f"theta={inst.theta} outside the feasible open interval ({lo}, {hi})"
        )
    v1, v2, rho, theta = inst.v1, inst.v2, inst.rho, inst.theta
    fprod = v1 * v2 * (1.0 - rho**2)
    tt = theta_tilde(inst)

    r_mu = 0.5 * math.log(v1 * v2 * (fprod + 2.0 * rho * (1.0 + theta)) / (1.0 + theta) ** 2)
    r_lb = 0.5 * math.log(
        v1**3 * v2**3 * (1.0 - rho**2) ** 2
        / ((1.0 - theta) ** 2 * (fprod + 2.0 * rho * (1.0 + theta)))
    )
    ub_arg = fprod - 2.0 * rho * (1.0 - theta)
    # the determinant upper branch is only usable where its argument is
    # positive; it is positive throughout theta > theta_tilde
    r_ub = (
        0.5 * math.log(v1 * v2 * ub_arg / (1.0 - theta) ** 2)
        if ub_arg > 0
        else float("inf")
    )
    r_coop = 0.5 * math.log(v1**2 * v2**2 * (1.0 - rho**2) / (1.0 - theta**2))

    lower = max(r_mu, r_lb)
    wagner_composite = max(r_coop, r_mu)
    if theta <= tt:
        bt_upper = r_mu
        lower = r_mu  # tight branch: both coincide exactly
        gap = 0.0
    else:
        bt_upper = r_ub
        gap = bt_upper - lower
    return BoundSet(
        r_mu=r_mu,
        r_lb=r_lb,
        r_ub=r_ub,
        lower_bound=lower,
        bt_upper=bt_upper,
        wagner_composite=wagner_composite,
        gap=gap,
        theta_tilde=tt,
    )


def gradients(inst, d1, d2):
    """Gradients of the two lower-bound branches in the distortion matrix,
    evaluated at the kink (theta == theta_tilde).

    Convention: entry (i, j) is the derivative along the symmetric
    perturbation E_ij + E_ji (diagonal entries therefore move by 2h under
    step h). With t = |theta_tilde|, s its sign (s = +1 at zero) and
    m = sqrt(d1*d2):

      grad_mu = -1/(1+t)^2 * [[1/d1, s/m], [s/m, 1/d2]]
      grad_lb = (1-t)/(1-t^2)^2 * [[-(1+3t)/d1, s(2t^2+t+1)/m],
                                   [s(2t^2+t+1)/m, -(1+3t)/d2]]

    Both equal -Dk^{-1} Psi Dk^{-1} for the matching subdifferential
    endpoint Psi, so -Dk @ grad @ Dk recovers the endpoints exactly.
    """
    tt_signed = theta_tilde(inst)
    if inst.flipped:
        tt_signed = -tt_signed
    t = abs(tt_signed)
    s = -1.0 if tt_signed < 0 else 1.0
    m = math.sqrt(d1 * d2)
    grad_mu = (-1.0 / (1.0 + t) ** 2) * np.array(
        [[1.0 / d1, s / m], [s / m, 1.0 / d2]]
    )
    scale = (1.0 - t) / (1.0 - t**2) ** 2
    grad_lb = scale * np.array(
        [
            [-(1.0 + 3.0 * t) / d1, s * (2.0 * t**2 + t + 1.0) / m],
            [s * (2.0 * t**2 + t + 1.0) / m, -(1.0 + 3.0 * t) / d2],
        ]
    )
    return grad_mu, grad_lb


def subdiff_segment(sigma, d_diag):
    """Subdifferential segment of the lower bound at the kink of (sigma, d_diag).

    sigma is the 2x2 source covariance, d_diag the pair of diagonal
    distortions; the kink distortion matrix has off-diagonal
    s*|theta_tilde|*sqrt(d1*d2) in the original (unflipped) coordinates.
    """
    sigma = symmetrize(sigma)
    d1, d2 = float(d_diag[0]), float(d_diag[1])
    if d1 <= 0 or d2 <= 0:
        raise InvalidProblemError("distortion diagonal must be positive")
    m = math.sqrt(d1 * d2)
    # built inline rather than via normalize: only the kink matrix (below)
    # needs to be admissible, not the diagonal matrix itself
    s1 = math.sqrt(sigma[0, 0])
    s2 = math.sqrt(sigma[1, 1])
    rho = sigma[0, 1] / (s1 * s2)
    flipped = rho < 0
    inst = TwoTermInstance(
        v1=s1 / math.sqrt(d1),
        v2=s2 / math.sqrt(d2),
        rho=abs(rho),
        theta=0.0,
        flipped=flipped,
    )
    tt = theta_tilde(inst)
    if tt > KINK_SINGULAR_LIMIT:
        raise InvalidProblemError(f"kink too close to singular: |theta_tilde|={tt}")
    s = -1.0 if inst.flipped else 1.0
    d_kink = np.array([[d1, s * tt * m], [s * tt * m, d2]])
    if not psd_leq(d_kink, sigma):
        raise InvalidProblemError("kink distortion matrix exceeds the source covariance")
    endpoint_mu = np.array([[d1, s * m], [s * m, d2]])
    endpoint_lb = np.array(
        [[d1, s * (2.0 * tt - 1.0) * m], [s * (2.0 * tt - 1.0) * m, d2]]
    )
    return SubdiffSegment(
        endpoint_mu=endpoint_mu,
        endpoint_lb=endpoint_lb,
        d_kink=d_kink,
        theta_tilde=s * tt,
    )


def achievability(inst):
    """Explicit test-channel noise pair achieving the bound for theta <= kink.

    Returns (q1, q2, d_tilde, slack) in normalized coordinates; slack is
    the PSD rank-<=1 matrix c*[[1,-1],[-1,1]] by which the achieved
    distortion matrix undershoots the target.
    """
    tt = theta_tilde(inst)
    if inst.theta > tt + 1e-12:
        raise InvalidProblemError(
            f"construction only applies at theta <= theta_tilde ({inst.theta} > {tt})"
        )
    v1, v2, rho, theta = inst.v1, inst.v2, inst.rho, inst.theta
    c12 = 1.0 - rho**2
    # noise variances can leave the operational range in a thin corner
    # (v1 near 1 with v2 large and rho strong flips den1); the distortion
    # identities below are rational in the parameters and hold regardless
    den1 = v1**2 * v2 * c12 - (v2 - rho * v1) * (1.0 + theta)
    den2 = v1 * v2**2 * c12 - (v1 - rho * v2) * (1.0 + theta)
    q1 = v1**2 * v2 * c12 * (1.0 + theta) / den1 if den1 != 0 else math.inf
    q2 = v1 * v2**2 * c12 * (1.0 + theta) / den2 if den2 != 0 else math.inf
    f1 = v1 * v2 * c12 + 2.0 * rho * (1.0 + theta)
    if f1 <= 0:
        raise NumericalError("distortion-matrix denominator is not positive")
    diag = (1.0 + theta) * (v1 * v2 * c12 + rho * (1.0 + theta)) / f1
    off = rho * (1.0 + theta) ** 2 / f1
    d_tilde = np.array([[diag, off], [off, diag]])
    slack = np.array([[1.0, theta], [theta, 1.0]]) - d_tilde
    return q1, q2, d_tilde, slack


def classic_region_sum_rate(sigma_y, d1, d2):
    """Minimum sum-rate of the diagonally-constrained two-source problem (nats)."""
    sigma_y = symmetrize(sigma_y)
    if d1 <= 0 or d2 <= 0:
        raise InvalidProblemError("distortions must be positive")
    s1sq, s2sq = sigma_y[0, 0], sigma_y[1, 1]
    rho = sigma_y[0, 1] / math.sqrt(s1sq * s2sq)
    c12 = 1.0 - rho**2
    beta_max = 1.0 + math.sqrt(1.0 + 4.0 * rho**2 * d1 * d2 / (c12**2 * s1sq * s2sq))
    arg = c12 * beta_max * s1sq * s2sq / (2.0 * d1 * d2)
    return max(0.0, 0.5 * math.log(arg))


def classic_per_rate_bound(sigma_y, d_own, r_other):
    """Single-rate boundary of the diagonally-constrained region (nats):
    the least admissible rate for one source given the other's rate."""
    sigma_y = symmetrize(sigma_y)
    rho = sigma_y[0, 1] / math.sqrt(sigma_y[0, 0] * sigma_y[1, 1])
    arg = (1.0 - rho**2 + rho**2 * math.exp(-2.0 * r_other)) * sigma_y[0, 0] / d_own
    return max(0.0, 0.5 * math.log(arg))


def tight_diagonal_noise(sigma_y, d1, d2):
    """Per-source observation-noise variances certifying two-source tightness.

    Feeding these as a diagonal noise covariance into the diagonal-noise
    tightness check makes any feasible two-source instance pass.
    """
    # per-source targets only; skip normalize(), whose matrix-domination
    # guard rejects diagonal targets that are still individually feasible
    sigma_y = symmetrize(sigma_y)
    if d1 <= 0 or d2 <= 0:
        raise InvalidProblemError("distortions must be positive")
    if d1 > sigma_y[0, 0] or d2 > sigma_y[1, 1]:
        raise InvalidProblemError("per-source distortion exceeds the variance")
    v1 = math.sqrt(sigma_y[0, 0] / d1)
    v2 = math.sqrt(sigma_y[1, 1] / d2)
    rho = abs(sigma_y[0, 1]) / math.sqrt(sigma_y[0, 0] * sigma_y[1, 1])
    if 1.0 - rho < 1e-12:
        raise InvalidProblemError("source correlation too close to 1")
    c12 = 1.0 - rho**2
    n1 = v1**2 * v2 * c12 / (v2 + v1 * rho) * d1
    n2 = v1 * v2**2 * c12 / (v1 + v2 * rho) * d2
    return n1, n2


def pair_bound_and_grad(sigma_pair, gamma_pair):
    """Lower bound for one coupled pair plus its gradient in the pair's
    distortion coordinates (g11, g22, g12).

    Used by the composite-bound optimizer: sigma_pair is the pair's noise
    block (acting as source covariance), gamma_pair the 2x2 distortion
    block. The active branch's analytic gradient is returned; at a branch
    tie either side is a valid subgradient.
    """
    s = symmetrize(sigma_pair)
    g = symmetrize(gamma_pair)
    g11, g22, g12 = g[0, 0], g[1, 1], g[0, 1]
    if g11 <= 0 or g22 <= 0:
        raise InvalidProblemError("pair distortion block needs a positive diagonal")
    rho_s = s[0, 1] / math.sqrt(s[0, 0] * s[1, 1])
    sgn = -1.0 if rho_s < 0 else 1.0
    rho = abs(rho_s)
    if 1.0 - rho < 1e-12:
        raise InvalidProblemError("pair noise block is singular (|rho| ~ 1)")
    u = math.sqrt(g11 * g22)
    t = u + sgn * g12
    r = u - sgn * g12
    if t <= 0 or r <= 0:
        raise InvalidProblemError("pair distortion block is not positive definite")
    root_s = math.sqrt(s[0, 0] * s[1, 1])
    c1 = root_s * (1.0 - rho**2)
    c2 = 2.0 * rho
    val_mu = 0.5 * math.log(root_s) + 0.5 * math.log(c1 + c2 * t) - math.log(t)
    val_lb = (
        0.5 * math.log(root_s**3 * (1.0 - rho**2) ** 2)
        - math.log(r)
        - 0.5 * math.log(c1 + c2 * t)
    )
    du_d11 = u / (2.0 * g11)
    du_d22 = u / (2.0 * g22)
    if val_mu >= val_lb:
        dt = 0.5 * c2 / (c1 + c2 * t) - 1.0 / t
        grad = (dt * du_d11, dt * du_d22, sgn * dt)
        return val_mu, grad
    dt = -0.5 * c2 / (c1 + c2 * t)
    dr = -1.0 / r
    grad = ((dt + dr) * du_d11, (dt + dr) * du_d22, sgn * (dt - dr))
    return val_lb, grad
