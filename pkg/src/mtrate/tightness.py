"""Certificate checks for sum-rate tightness of the quantize-and-bin bound.

A tightness certificate is a set of Lagrange multipliers showing the
composite lower bound of the remote-source model is stationary at the
solver's optimum, which pins the minimum sum-rate exactly. This module
verifies a full multiplier set, builds and checks the simplified
certificate that assumes all distortion constraints are active, runs the
diagonal-noise sufficient condition and its block-circulant variant, and
searches a noise pattern for a certifying covariance.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import two_terminal
from .bt_solver import solve, solve_block_circulant
from .errors import InvalidProblemError
from .matlib import (
    block_submatrix,
    is_block_circulant,
    pd_inverse,
    symmetrize,
)
from .remote_model import NoisePattern, gamma_tilde
from .report import build_report, not_applicable

ACTIVE_REL_TOL = 1e-6


@dataclass(frozen=True)
class Certificate:
    """Multiplier set: lam for the surrogate coupling, omega for the
    source-covariance cap, one theta per coupled pair, pi for the
    distortion targets (diagonal, stored as a vector)."""

    lam: np.ndarray
    omega: np.ndarray
    thetas: tuple
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", symmetrize(self.lam))
        object.__setattr__(self, "omega", symmetrize(self.omega))
        object.__setattr__(self, "thetas", tuple(symmetrize(t) for t in self.thetas))
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float).ravel())
        n = self.lam.shape[0]
        if self.omega.shape != (n, n) or self.pi.shape != (n,):
            raise InvalidProblemError("certificate blocks have mismatched shapes")
        for t in self.thetas:
            if t.shape != (2, 2):
                raise InvalidProblemError("pair multipliers must be 2x2")


def _gamma_for(p, noise, sol, conform_tol=1e-6):
    return gamma_tilde(p, noise, sol.d_tilde, conform_tol=conform_tol)


def verify_theorem2(p, noise, sol, cert, tol=1e-8):
    """Check the full KKT system for the composite bound at the solver's
    optimum: stationarity in the distortion matrix, a subdifferential
    inclusion per coupled pair, singleton matching, complementary
    slackness for every multiplier, and positive semidefiniteness."""
    if len(cert.thetas) != noise.pattern.k:
        raise InvalidProblemError("certificate has wrong number of pair multipliers")
    d_tilde = sol.d_tilde
    try:
        gt = _gamma_for(p, noise, sol)
    except InvalidProblemError as exc:
        return not_applicable(f"surrogate undefined at the optimum: {exc}")
    gamma = gt.gamma
    dt_inv = pd_inverse(d_tilde)
    sy_inv = pd_inverse(p.sigma_y)

    residuals = {}
    margins = {}
    notes = []

    # stationarity in the distortion matrix
    lhs = d_tilde @ np.diag(cert.pi) @ d_tilde - d_tilde + gamma
    residuals["stationarity"] = float(np.max(np.abs(lhs - (cert.lam - cert.omega))))

    # pair subdifferential inclusions
    for j in range(1, noise.pattern.k + 1):
        nk = block_submatrix(noise.sigma_n, noise.pattern, j)
        gk = block_submatrix(gamma, noise.pattern, j)
        lam_th = block_submatrix(cert.lam, noise.pattern, j) + cert.thetas[j - 1]
        try:
            seg = two_terminal.subdiff_segment(nk, (gk[0, 0], gk[1, 1]))
        except InvalidProblemError as exc:
            return not_applicable(f"pair {j} has no subdifferential segment: {exc}")
        residuals[f"pair{j}_diag"] = float(
            max(
                abs(lam_th[0, 0] - seg.d_kink[0, 0]),
                abs(lam_th[1, 1] - seg.d_kink[1, 1]),
            )
        )
        lo = min(seg.endpoint_mu[0, 1], seg.endpoint_lb[0, 1])
        hi = max(seg.endpoint_mu[0, 1], seg.endpoint_lb[0, 1])
        margins[f"pair{j}_segment_lo"] = float(lam_th[0, 1] - lo)
        margins[f"pair{j}_segment_hi"] = float(hi - lam_th[0, 1])
        residuals[f"pair{j}_slack"] = float(
            np.max(np.abs(cert.thetas[j - 1] @ (nk - gk)))
        )
        margins[f"pair{j}_psd"] = float(np.linalg.eigvalsh(cert.thetas[j - 1])[0])

    # singleton matching
    for i in noise.pattern.singletons():
        residuals[f"singleton_{i + 1}"] = float(abs(cert.lam[i, i] - gamma[i, i]))

    # complementary slackness for the cap and target multipliers
    residuals["cap_slack"] = float(np.max(np.abs(cert.omega @ (sy_inv - dt_inv))))
    residuals["target_slack"] = float(
        np.max(np.abs(cert.pi * (np.diag(d_tilde) - p.d)))
    )

    margins["lam_psd"] = float(np.linalg.eigvalsh(cert.lam)[0])
    margins["omega_psd"] = float(np.linalg.eigvalsh(cert.omega)[0])
    margins["pi_nonneg"] = float(np.min(cert.pi))

    return build_report(residuals, margins, tol, notes="; ".join(notes))


def _pi_vector(d_tilde, d_targets):
    """Multipliers for the distortion targets when every target is active:
    the row reading of (d_tilde o d_tilde) pi = d_targets."""
    return np.linalg.solve(d_tilde * d_tilde, d_targets)


def corollary1_certificate(p, noise, sol):
    """Build the simplified certificate (omega and thetas vanish)."""
    gt = _gamma_for(p, noise, sol)
    pi = _pi_vector(sol.d_tilde, p.d)
    lam = sol.d_tilde @ np.diag(pi) @ sol.d_tilde - sol.d_tilde + gt.gamma
    zeros = np.zeros_like(lam)
    thetas = tuple(np.zeros((2, 2)) for _ in range(noise.pattern.k))
    return Certificate(lam=lam, omega=zeros, thetas=thetas, pi=pi)


def check_corollary1(p, noise, sol=None, tol=1e-8):
    """Simplified tightness check: with all distortion targets active and
    strictly positive target multipliers implied, tightness holds when the
    assembled coupling multiplier is PSD and each pair entry clears the
    lower subdifferential endpoint."""
    if sol is None:
        sol = solve(p)
    d_tilde = sol.d_tilde
    slack = p.d - np.diag(d_tilde)
    if np.any(slack > ACTIVE_REL_TOL * p.d):
        return not_applicable(
            "a distortion target is inactive at the optimum",
            margins={"min_target_slack": float(np.max(slack))},
        )
    w_min = float(np.min(sol.w))
    if w_min <= 0.0:
        return not_applicable(
            "the optimal noise precision has a zero coordinate",
            margins={"min_precision": w_min},
        )
    try:
        gt = _gamma_for(p, noise, sol)
    except InvalidProblemError as exc:
        return not_applicable(f"surrogate undefined at the optimum: {exc}")
    gamma = gt.gamma
    pi = _pi_vector(d_tilde, p.d)
    lam = d_tilde @ np.diag(pi) @ d_tilde - d_tilde + gamma

    residuals = {}
    margins = {"lam_psd": float(np.linalg.eigvalsh(lam)[0])}
    for j in range(1, noise.pattern.k + 1):
        ia, ib = noise.pattern.pairs()[j - 1]
        g12 = gamma[ia, ib]
        sgn = -1.0 if g12 < 0 else 1.0
        bound = 2.0 * abs(g12) - math.sqrt(gamma[ia, ia] * gamma[ib, ib])
        margins[f"pair{j}_margin"] = float(sgn * lam[ia, ib] - bound)
    return build_report(residuals, margins, tol)


def check_wang(p, sigma_n, sol=None, tol=1e-8):
    """Diagonal-noise sufficient condition for sum-rate tightness.

    sigma_n is a diagonal noise covariance with 0 < sigma_n <= sigma_y in
    the PSD order; the condition compares the target multipliers against
    the curvature of the induced remote estimation problem.
    """
    sigma_n = symmetrize(sigma_n)
    off = sigma_n - np.diag(np.diag(sigma_n))
    if np.max(np.abs(off)) > 1e-12 * (1.0 + np.max(np.abs(sigma_n))):
        raise InvalidProblemError("noise covariance must be diagonal")
    dn = np.diag(sigma_n)
    if np.any(dn <= 0):
        raise InvalidProblemError("noise variances must be positive")
    gap_min = float(np.linalg.eigvalsh(p.sigma_y - sigma_n)[0])
    if gap_min < -1e-10 * (1.0 + np.max(np.abs(p.sigma_y))):
        raise InvalidProblemError("noise covariance exceeds the source covariance")
    if sol is None:
        sol = solve(p)
    d_tilde = sol.d_tilde
    slack = p.d - np.diag(d_tilde)
    if np.any(slack > ACTIVE_REL_TOL * p.d):
        return not_applicable(
            "a distortion target is inactive at the optimum",
            margins={"min_target_slack": float(np.max(slack))},
        )
    dt_inv = pd_inverse(d_tilde)
    combo = dt_inv + np.diag(1.0 / dn) - pd_inverse(p.sigma_y)
    gamma = pd_inverse(combo)
    pi = _pi_vector(d_tilde, p.d)
    lam_w = d_tilde @ (np.diag(pi) - dt_inv + dt_inv @ gamma @ dt_inv) @ d_tilde
    residuals = {
        "diag_match": float(np.max(np.abs(np.diag(lam_w) - np.diag(gamma))))
    }
    margin = float(np.linalg.eigvalsh(lam_w)[0])
    return build_report(residuals, {"condition_psd": margin}, tol)


def wang_block_circulant_parts(p, sol=None):
    """Raw pieces of the block-circulant condition: the scalar on the
    left, the comparison matrix on the right, and the row-sum spread that
    justifies collapsing the left side to a scalar."""
    if not is_block_circulant(p.sigma_y):
        raise InvalidProblemError("source covariance is not block circulant")
    if sol is None:
        sol = solve_block_circulant(p)
    d_tilde = sol.d_tilde
    row_sums = np.linalg.solve(d_tilde * d_tilde, p.d)
    lhs_scalar = float(np.mean(row_sums))
    spread = float(np.max(row_sums) - np.min(row_sums))
    lam_min = float(np.linalg.eigvalsh(p.sigma_y)[0])
    dt_inv = pd_inverse(d_tilde)
    combo = dt_inv + (1.0 / lam_min) * np.eye(p.dim) - pd_inverse(p.sigma_y)
    rhs = dt_inv - dt_inv @ pd_inverse(combo) @ dt_inv
    return lhs_scalar, rhs, spread


def check_wang_block_circulant(p, sol=None, tol=1e-8):
    """Block-circulant variant of the diagonal-noise condition with the
    noise level set to the smallest source eigenvalue. The left side
    collapses to a scalar matrix because the optimal distortion matrix
    inherits the block-circulant symmetry."""
    lhs_scalar, rhs, spread = wang_block_circulant_parts(p, sol=sol)
    margin = float(np.linalg.eigvalsh(lhs_scalar * np.eye(p.dim) - rhs)[0])
    return build_report(
        {"row_sum_spread": spread},
        {"condition_psd": margin},
        tol,
        notes=f"lhs scalar {lhs_scalar:.6f}",
    )


def _pattern_param_count(pattern):
    return 3 * pattern.k + len(pattern.singletons())


def _params_to_noise(x, pattern):
    n = pattern.dim
    m = np.zeros((n, n))
    pos = 0
    for ia, ib in pattern.pairs():
        m[ia, ia] = x[pos]
        m[ib, ib] = x[pos + 1]
        m[ia, ib] = m[ib, ia] = x[pos + 2]
        pos += 3
    for i in pattern.singletons():
        m[i, i] = x[pos]
        pos += 1
    return m


def _noise_to_params(m, pattern):
    x = []
    for ia, ib in pattern.pairs():
        x.extend([m[ia, ia], m[ib, ib], m[ia, ib]])
    for i in pattern.singletons():
        x.append(m[i, i])
    return np.array(x)


def search_noise(p, pattern, budget=2000, seed=0):
    """Search the pattern for a noise covariance whose simplified
    certificate has the best margin. Returns (noise, report); the noise
    is None when no feasible candidate was found within the budget.

    The objective is the smallest certificate margin; infeasible
    candidates are scored by a penalty on the constraint violation so the
    simplex can climb back into the feasible set.
    """
    sol = solve(p)
    sy_max = float(np.max(np.abs(p.sigma_y)))

    def margin_of(x):
        m = _params_to_noise(x, pattern)
        lam_n = float(np.linalg.eigvalsh(m)[0]) if p.dim else 0.0
        gap = float(np.linalg.eigvalsh(p.sigma_y - m)[0])
        if lam_n <= 1e-12 * (1.0 + sy_max) or gap < 0.0:
            viol = max(0.0, -lam_n) + max(0.0, -gap)
            return None, -10.0 - viol / (1.0 + sy_max)
        try:
            noise = NoisePattern(pattern=pattern, sigma_n=m)
            report = check_corollary1(p, noise, sol=sol)
        except (InvalidProblemError, np.linalg.LinAlgError):
            return None, -10.0
        if report.verdict == "not-applicable":
            return report, -5.0
        return report, min(report.margins.values())

    evals = [0]

    def neg_objective(x):
        evals[0] += 1
        _, margin = margin_of(x)
        return -margin

    rng = np.random.default_rng(seed)
    lam_min = float(np.linalg.eigvalsh(p.sigma_y)[0])
    starts = []
    for alpha in (0.2, 0.4, 0.6, 0.8, 0.95):
        starts.append(_noise_to_params(alpha * lam_min * np.eye(p.dim), pattern))
    # noise aligned with the source correlation inside each block; scaled
    # copies of the blocked covariance stay PD and below sigma_y
    blocked = _params_to_noise(_noise_to_params(p.sigma_y, pattern), pattern)
    for beta in (0.25, 0.5, 0.75):
        starts.append(_noise_to_params(beta * blocked, pattern))
    best_x = None
    best_margin = -np.inf
    per_restart = max(50, budget // len(starts))
    for x0 in starts:
        if evals[0] >= budget:
            break
        x0 = x0 * (1.0 + 0.05 * rng.standard_normal(x0.shape))
        res = minimize(
            neg_objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": min(per_restart, max(1, budget - evals[0])),
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        if -res.fun > best_margin:
            best_margin = -res.fun
            best_x = res.x
    if best_x is None or best_margin <= -4.999:
        return None, not_applicable("no certifiable noise found within the budget")
    report, _ = margin_of(best_x)
    noise = NoisePattern(pattern=pattern, sigma_n=_params_to_noise(best_x, pattern))
    return noise, report
