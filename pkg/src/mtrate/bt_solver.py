"""Minimum sum-rate solver for the L-terminal quadratic Gaussian problem.

The test-channel noise is diagonal with precisions w_j >= 0; the achieved
distortion matrix is D~ = (Sigma_Y^{-1} + diag(w))^{-1} and the sum-rate is
(1/2) log(det Sigma_Y / det D~) in nats. The solver drives the active
diagonal entries of D~ onto their targets by a damped Newton iteration,
dropping constraints whose precision would cross below zero (those targets
end up satisfied with slack, the degraded case) and re-adding any inactive
constraint that becomes violated.

A closed-form path covers block-circulant covariances with equal targets,
where the optimum is Sigma_Y star qI with a water-filled scalar q.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidProblemError, NumericalError
from .matlib import (
    block_circulant_eigvals,
    is_block_circulant,
    logdet_pd,
    pd_inverse,
    star,
    symmetrize,
)
from .report import build_report

MAX_ITER = 200
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class MTProblem:
    """Source covariance plus per-source distortion targets."""

    sigma_y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        sigma_y = symmetrize(self.sigma_y)
        d = np.asarray(self.d, dtype=float).ravel()
        object.__setattr__(self, "sigma_y", sigma_y)
        object.__setattr__(self, "d", d)
        if d.shape[0] != sigma_y.shape[0]:
            raise InvalidProblemError(
                f"distortion vector length {d.shape[0]} vs covariance dim {sigma_y.shape[0]}"
            )
        if np.any(d <= 0):
            raise InvalidProblemError("distortion targets must be positive")
        if np.any(d > np.diag(sigma_y)):
            raise InvalidProblemError(
                "distortion target exceeds the source variance (vacuous constraint)"
            )
        try:
            np.linalg.cholesky(sigma_y)
        except np.linalg.LinAlgError as exc:
            raise InvalidProblemError(f"source covariance is not PD: {exc}") from exc

    @property
    def dim(self):
        return self.sigma_y.shape[0]


@dataclass(frozen=True)
class BTSolution:
    """Solver output: distortion matrix, noise precisions, active set, rate."""

    d_tilde: np.ndarray
    w: np.ndarray
    active: np.ndarray
    sum_rate: float
    converged: bool
    residual: float
    iterations: int = field(default=0, compare=False)


def _d_tilde_of(sigma_inv, w):
    return pd_inverse(sigma_inv + np.diag(w))


def sum_rate_at(p, w):
    """Objective value at arbitrary noise precisions w >= 0 (nats)."""
    w = np.asarray(w, dtype=float).ravel()
    if np.any(w < 0):
        raise InvalidProblemError("noise precisions must be non-negative")
    sigma_inv = pd_inverse(p.sigma_y)
    dt = _d_tilde_of(sigma_inv, w)
    return 0.5 * (logdet_pd(p.sigma_y) - logdet_pd(dt))


def solve(p):
    """Active-set damped Newton on the diagonal matching system.

    Active constraints satisfy [D~]_jj = d_j; the Jacobian of the active
    residual in w is -(D~ (.) D~) restricted to active coordinates.
    """
    dim = p.dim
    sigma_inv = pd_inverse(p.sigma_y)
    w = np.maximum(0.0, 1.0 / p.d - 1.0 / np.diag(p.sigma_y))
    active = np.ones(dim, dtype=bool)

    def residual_of(w_vec, act):
        dt = _d_tilde_of(sigma_inv, w_vec)
        res = np.diag(dt) - p.d
        res_act = res[act]
        return dt, res, float(np.max(np.abs(res_act))) if act.any() else 0.0

    dt, res, res_norm = residual_of(w, active)
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        # re-admit violated inactive constraints
        violated = (~active) & (res > RESIDUAL_TOL)
        if violated.any():
            active = active | violated
            dt, res, res_norm = residual_of(w, active)
        if res_norm <= RESIDUAL_TOL:
            break
        idx = np.nonzero(active)[0]
        jac = -(dt * dt)[np.ix_(idx, idx)]
        try:
            step = np.linalg.solve(jac, -res[idx])
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular Newton system: {exc}") from exc

        # limit the step to the w >= 0 boundary; a blocked coordinate
        # leaves the active set (its target will hold with slack)
        alpha = 1.0
        blocking = -1
        for pos, j in enumerate(idx):
            if step[pos] < 0 and w[j] + step[pos] < 0:
                cand = w[j] / -step[pos]
                if cand < alpha:
                    alpha = cand
                    blocking = j
        if blocking >= 0:
            w_new = w.copy()
            w_new[idx] = np.maximum(0.0, w_new[idx] + alpha * step)
            w_new[blocking] = 0.0
            active = active.copy()
            active[blocking] = False
            w = w_new
            dt, res, res_norm = residual_of(w, active)
            continue

        # damped step: halve until the active residual decreases
        accepted = False
        for _ in range(40):
            w_try = w.copy()
            w_try[idx] = w[idx] + alpha * step
            dt_try, res_try, rn_try = residual_of(w_try, active)
            if rn_try < res_norm:
                w, dt, res, res_norm = w_try, dt_try, res_try, rn_try
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            raise NumericalError(
                f"line search stalled at residual {res_norm:.3e} (iteration {iterations})"
            )
    else:
        raise NumericalError(
            f"no convergence after {MAX_ITER} iterations (residual {res_norm:.3e})"
        )

    if np.any(np.diag(dt) > p.d + 1e-8):
        raise NumericalError("inactive constraint violated at the returned point")
    rate = 0.5 * (logdet_pd(p.sigma_y) - logdet_pd(dt))
    return BTSolution(
        d_tilde=dt,
        w=w,
        active=active,
        sum_rate=rate,
        converged=True,
        residual=res_norm,
        iterations=iterations,
    )


def solve_block_circulant(p):
    """Closed-form path: water-filled q, D~ = Sigma_Y star qI."""
    if not is_block_circulant(p.sigma_y, tol=1e-8):
        raise InvalidProblemError("covariance is not block-circulant")
    if not np.allclose(p.d, p.d[0], rtol=0, atol=1e-12):
        raise InvalidProblemError("closed form needs equal distortion targets")
    dim = p.dim
    d_val = float(p.d[0])
    lam = block_circulant_eigvals(p.sigma_y)
    if np.any(lam <= 0):
        raise InvalidProblemError("covariance is not PD (non-positive eigenvalue)")
    total = dim * d_val
    if total >= float(np.sum(lam)) * (1.0 - 1e-12):
        raise InvalidProblemError("distortion target not below the feasible mean")

    def fill(q):
        return float(np.sum(lam * q / (lam + q))) - total

    hi = 1.0
    while fill(hi) <= 0:
        hi *= 2.0
        if hi > 1e18:
            raise NumericalError("water-fill bracket expansion failed")
    q = brentq(fill, 1e-12, hi, xtol=1e-14, rtol=1e-15)
    d_tilde = star(p.sigma_y, q * np.eye(dim))
    w = np.full(dim, 1.0 / q)
    rate = 0.5 * float(np.sum(np.log((lam + q) / q)))
    return BTSolution(
        d_tilde=d_tilde,
        w=w,
        active=np.ones(dim, dtype=bool),
        sum_rate=rate,
        converged=True,
        residual=abs(fill(q)),
    )


def verify(p, sol, tol=1e-8):
    """Independent re-check of a solution's structure and optimality residuals."""
    if sol.d_tilde.shape != p.sigma_y.shape:
        raise InvalidProblemError("solution/problem dimension mismatch")
    sigma_inv = pd_inverse(p.sigma_y)
    dt_inv = pd_inverse(sol.d_tilde)
    diff = dt_inv - sigma_inv
    off = diff - np.diag(np.diag(diff))
    residuals = {
        "noise_precision_structure": float(np.max(np.abs(off))),
        "reconstruction": float(
            np.max(np.abs(sol.d_tilde - _d_tilde_of(sigma_inv, sol.w)))
        ),
        "complementarity": float(
            np.max(np.abs(sol.w * (np.diag(sol.d_tilde) - p.d)))
        ),
        "sum_rate_formula": abs(
            sol.sum_rate - 0.5 * (logdet_pd(p.sigma_y) - logdet_pd(sol.d_tilde))
        ),
    }
    margins = {
        "dual_feasibility": float(np.min(sol.w)),
        "distortion_constraints": float(np.min(p.d - np.diag(sol.d_tilde))),
    }
    return build_report(residuals, margins, tol)
