"""Hidden-source factorization of a noisy observation model and the
composite sum-rate lower bound built on it.

Given a source covariance and a pattern-structured noise covariance, the
observations decompose as Y = H^T X + N with X a vector of independent
hidden sources recovered from the spectrum of Sigma_Y - Sigma_N. The
composite bound combines a log-det term for estimating X from the coded
observations, a two-source bound per coupled noise pair, and scalar
rate-distortion terms for the singleton coordinates. Minimizing it over
the feasible (distortion matrix, conditional-covariance surrogate) pairs
yields a certified lower bound on the achievable sum-rate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import two_terminal
from .errors import InvalidProblemError, NumericalError
from .matlib import (
    BlockPattern,
    block_submatrix,
    conforms_to_pattern,
    is_psd,
    pd_inverse,
    symmetrize,
)

RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class NoisePattern:
    """Pattern-structured observation-noise covariance."""

    pattern: BlockPattern
    sigma_n: np.ndarray

    def __post_init__(self):
        sigma_n = symmetrize(self.sigma_n)
        object.__setattr__(self, "sigma_n", sigma_n)
        if sigma_n.shape != (self.pattern.dim, self.pattern.dim):
            raise InvalidProblemError(
                f"noise covariance shape {sigma_n.shape} vs pattern dim {self.pattern.dim}"
            )
        try:
            np.linalg.cholesky(sigma_n)
        except np.linalg.LinAlgError as exc:
            raise InvalidProblemError(f"noise covariance is not PD: {exc}") from exc
        if not conforms_to_pattern(sigma_n, self.pattern, tol=1e-9):
            raise InvalidProblemError("noise covariance has entries outside the pattern")

    @property
    def dim(self):
        return self.pattern.dim


@dataclass(frozen=True)
class RemoteModel:
    """Hidden-source decomposition: Sigma_Y ~= H^T Sigma_X H + Sigma_N.

    sigma_x holds the kept spectrum magnitudes (descending); psd_defect
    records how far Sigma_Y - Sigma_N is from PSD (0 for a clean model).
    When the defect is nonzero the reconstruction identity holds only up
    to the defect; downstream bounds treat the model as the printed-data
    approximation it is.
    """

    m: int
    sigma_x: np.ndarray
    h: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    psd_defect: float = 0.0


def build(p, noise):
    """Factor Sigma_Y - Sigma_N into hidden sources.

    Keeps spectrum magnitudes above RANK_CUTOFF * |trace|, sorted
    descending; rows of h are the matching eigenvectors with each row's
    first nonzero component positive. a maps observations to the best
    linear estimate of X; b is the estimation error covariance.
    """
    if noise.dim != p.dim:
        raise InvalidProblemError("noise and problem dimensions differ")
    diff = symmetrize(p.sigma_y - noise.sigma_n)
    lam, vec = np.linalg.eigh(diff)
    defect = max(0.0, -float(lam[0]))
    cutoff = RANK_CUTOFF * abs(float(np.trace(diff)))
    order = np.argsort(np.abs(lam))[::-1]
    keep = [i for i in order if abs(lam[i]) > cutoff]
    m = len(keep)
    sigma_x = np.abs(lam[keep])
    h = vec[:, keep].T.copy()
    for r in range(m):
        row = h[r]
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            h[r] = -row
    sigma_y_inv = pd_inverse(p.sigma_y)
    sx = np.diag(sigma_x) if m else np.zeros((0, 0))
    a = sx @ h @ sigma_y_inv
    b = sx - sx @ h @ sigma_y_inv @ h.T @ sx
    b = 0.5 * (b + b.T) if m else b
    return RemoteModel(m=m, sigma_x=sigma_x, h=h, a=a, b=b, psd_defect=defect)


@dataclass(frozen=True)
class GammaTilde:
    """Conditional-covariance surrogate (D~^{-1} + Sigma_N^{-1} - Sigma_Y^{-1})^{-1}."""

    gamma: np.ndarray
    pattern: BlockPattern

    def pair_block(self, j):
        return block_submatrix(self.gamma, self.pattern, j)

    def singleton_value(self, i):
        return float(self.gamma[i, i])


def gamma_tilde(p, noise, d_tilde, conform_tol=1e-6):
    """Evaluate the surrogate at a distortion matrix and validate its
    pattern structure (automatic when d_tilde comes from the solver)."""
    d_tilde = symmetrize(d_tilde)
    combo = pd_inverse(d_tilde) + pd_inverse(noise.sigma_n) - pd_inverse(p.sigma_y)
    try:
        gamma = pd_inverse(combo)
    except NumericalError as exc:
        raise NumericalError(f"surrogate combination is singular: {exc}") from exc
    if not conforms_to_pattern(gamma, noise.pattern, tol=conform_tol):
        raise InvalidProblemError("surrogate does not follow the noise pattern")
    return GammaTilde(gamma=gamma, pattern=noise.pattern)


def _constraint_violation(p, noise, d, gamma_mat):
    """Worst violation of the composite-bound constraint set (<= 0 is feasible)."""
    worst = -np.inf
    worst = max(worst, float(np.max(np.diag(d) - p.d)))
    lam_d_min = float(np.linalg.eigvalsh(d)[0])
    if lam_d_min <= 0.0:
        return max(worst, -lam_d_min + 1e-12)
    worst = max(worst, -float(np.linalg.eigvalsh(p.sigma_y - d)[0]))
    for j in range(1, noise.pattern.k + 1):
        gk = block_submatrix(gamma_mat, noise.pattern, j)
        nk = block_submatrix(noise.sigma_n, noise.pattern, j)
        worst = max(worst, -float(np.linalg.eigvalsh(gk)[0]) + 1e-12)
        worst = max(worst, -float(np.linalg.eigvalsh(nk - gk)[0]))
    for i in noise.pattern.singletons():
        worst = max(worst, 1e-12 - float(gamma_mat[i, i]))
        worst = max(worst, float(gamma_mat[i, i]) - noise.sigma_n[i, i])
    try:
        coupling = (
            pd_inverse(d) + pd_inverse(noise.sigma_n) - pd_inverse(p.sigma_y)
        )
        worst = max(
            worst, -float(np.linalg.eigvalsh(pd_inverse(coupling) - gamma_mat)[0])
        )
    except NumericalError:
        return np.inf
    return worst


def lower_bound_eval(p, noise, rm, d, gamma):
    """Composite lower bound value (nats) at a feasible (d, gamma) pair.

    gamma may be a GammaTilde or a raw pattern-structured matrix.
    """
    d = symmetrize(d)
    gamma_mat = gamma.gamma if isinstance(gamma, GammaTilde) else symmetrize(gamma)
    if not conforms_to_pattern(gamma_mat, noise.pattern, tol=1e-6):
        raise InvalidProblemError("gamma does not follow the noise pattern")
    violations = []
    if np.any(np.diag(d) > p.d + 1e-8):
        violations.append("diag(d) exceeds the distortion targets")
    if not is_psd(p.sigma_y - d, tol=1e-8):
        violations.append("d exceeds the source covariance")
    viol = _constraint_violation(p, noise, d, gamma_mat)
    if viol > 1e-6:
        violations.append(f"constraint violation {viol:.3e}")
    if violations:
        raise InvalidProblemError("; ".join(violations))
    return _eval_terms(p, noise, rm, d, gamma_mat)


def _eval_terms(p, noise, rm, d, gamma_mat):
    total = 0.0
    if rm.m:
        est_cov = rm.a @ d @ rm.a.T + rm.b
        sign, logdet = np.linalg.slogdet(est_cov)
        if sign <= 0:
            raise NumericalError("estimation covariance lost definiteness")
        total += 0.5 * (float(np.sum(np.log(rm.sigma_x))) - logdet)
    for j in range(1, noise.pattern.k + 1):
        nk = block_submatrix(noise.sigma_n, noise.pattern, j)
        gk = block_submatrix(gamma_mat, noise.pattern, j)
        val, _ = two_terminal.pair_bound_and_grad(nk, gk)
        total += val
    for i in noise.pattern.singletons():
        total += 0.5 * math.log(noise.sigma_n[i, i] / gamma_mat[i, i])
    return total


def _term1_grad(rm, d):
    """Trace-convention gradient of the log-det estimation term in d."""
    if not rm.m:
        return np.zeros_like(d)
    est_cov = rm.a @ d @ rm.a.T + rm.b
    inv = pd_inverse(est_cov)
    return -0.5 * rm.a.T @ inv @ rm.a


def lower_bound_optimize(p, noise, iters=5000, seed=0):
    """Minimize the composite bound over the feasible set by projected
    subgradient descent, starting from the solver's optimal point.

    Returns (best value, best d, best gamma matrix). The starting point is
    feasible with value equal to the solver's sum-rate, so the returned
    value never exceeds it (up to line-search noise).
    """
    from .bt_solver import solve

    sol = solve(p)
    gt = gamma_tilde(p, noise, sol.d_tilde)
    rm = build(p, noise)
    d = sol.d_tilde.copy()
    gamma_mat = gt.gamma.copy()
    dim = p.dim
    pairs = noise.pattern.pairs()
    singles = noise.pattern.singletons()

    def value_of(d_cur, g_cur):
        return _eval_terms(p, noise, rm, d_cur, g_cur)

    best_val = value_of(d, gamma_mat)
    best_d = d.copy()
    best_g = gamma_mat.copy()
    step_scale = 0.1 * max(abs(best_val), 1e-3)
    last_d, last_g = d.copy(), gamma_mat.copy()

    for t in range(1, iters + 1):
        # subgradient in (d upper triangle, pair blocks, singleton values)
        g_tr = _term1_grad(rm, d)
        d_step = np.zeros_like(d)
        for i in range(dim):
            for j in range(i, dim):
                coord = g_tr[i, i] if i == j else 2.0 * g_tr[i, j]
                d_step[i, j] += coord
                if i != j:
                    d_step[j, i] += coord
        g_step = np.zeros_like(gamma_mat)
        for jdx, (ia, ib) in enumerate(pairs, start=1):
            nk = block_submatrix(noise.sigma_n, noise.pattern, jdx)
            gk = block_submatrix(gamma_mat, noise.pattern, jdx)
            _, (d11, d22, d12) = two_terminal.pair_bound_and_grad(nk, gk)
            g_step[ia, ia] += d11
            g_step[ib, ib] += d22
            g_step[ia, ib] += d12
            g_step[ib, ia] += d12
        for i in singles:
            g_step[i, i] += -0.5 / gamma_mat[i, i]

        norm = math.sqrt(float(np.sum(d_step**2)) + float(np.sum(g_step**2)))
        if norm < 1e-14:
            break
        eta = step_scale / (norm * math.sqrt(t))
        d_try = d - eta * d_step
        g_try = gamma_mat - eta * g_step

        # projection: fall back toward the last feasible iterate
        ok = False
        for _ in range(30):
            if _constraint_violation(p, noise, d_try, g_try) <= 1e-10:
                ok = True
                break
            d_try = 0.5 * (d_try + last_d)
            g_try = 0.5 * (g_try + last_g)
        if not ok:
            d_try, g_try = last_d.copy(), last_g.copy()
        d, gamma_mat = d_try, g_try
        last_d, last_g = d.copy(), gamma_mat.copy()
        val = value_of(d, gamma_mat)
        if val < best_val:
            best_val = val
            best_d = d.copy()
            best_g = gamma_mat.copy()

    return best_val, best_d, best_g
