"""Detection and removal of degraded observation coordinates.

A coordinate j is a degraded copy of i when Y_j = Y_i + Z_j with Z_j
independent of everything else; in covariance terms column j matches
column i away from the pair, the cross entry equals the leader variance,
and the own variance exceeds it. When the extra distortion budget covers
the added noise, dropping j leaves the minimum sum-rate unchanged, so
the problem reduces to its leader coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .bt_solver import MTProblem, solve
from .errors import InvalidProblemError

REL_TOL = 1e-6


@dataclass(frozen=True)
class BDStructure:
    """Grouping of coordinates by leader.

    partition lists each group as a tuple of 0-based coordinates with the
    leader first; leaders repeats the group heads; sigma_z maps each
    follower to the variance of its added noise.
    """

    partition: tuple
    leaders: tuple
    sigma_z: dict
    induced_sigma_y: np.ndarray
    induced_d: np.ndarray


def _is_degraded_copy(sigma, d, i, j, scale):
    """True when coordinate j is coordinate i plus independent noise and
    its distortion target is implied by the leader's."""
    n = sigma.shape[0]
    tol = REL_TOL * scale
    for r in range(n):
        if r == i or r == j:
            continue
        if abs(sigma[r, j] - sigma[r, i]) > tol:
            return False
    if abs(sigma[i, j] - sigma[i, i]) > tol:
        return False
    var_z = sigma[j, j] - sigma[i, i]
    if var_z <= tol:
        # exact duplicates stay separate; they carry no extra noise
        return False
    if d[j] < d[i] + var_z - tol:
        return False
    return True


def detect(p):
    """Greedy grouping by ascending leader index; None when every
    coordinate stands alone."""
    sigma = p.sigma_y
    n = p.dim
    scale = 1.0 + float(np.max(np.abs(sigma)))
    leader_of = list(range(n))
    for j in range(n):
        for i in range(n):
            if i == j or leader_of[i] != i:
                continue
            if leader_of[j] != j:
                break
            if _is_degraded_copy(sigma, p.d, i, j, scale):
                leader_of[j] = i
                break
    groups = {}
    for idx in range(n):
        groups.setdefault(leader_of[idx], []).append(idx)
    if all(len(g) == 1 for g in groups.values()):
        return None
    leaders = tuple(sorted(groups))
    partition = tuple(tuple(sorted(groups[ld])) for ld in leaders)
    sigma_z = {}
    for ld in leaders:
        for member in groups[ld]:
            if member != ld:
                sigma_z[member] = float(sigma[member, member] - sigma[ld, ld])
    keep = list(leaders)
    induced_sigma_y = sigma[np.ix_(keep, keep)].copy()
    induced_d = p.d[keep].copy()
    return BDStructure(
        partition=partition,
        leaders=leaders,
        sigma_z=sigma_z,
        induced_sigma_y=induced_sigma_y,
        induced_d=induced_d,
    )


def reduce(p, bd):
    """Problem on the leader coordinates only."""
    if bd is None:
        raise InvalidProblemError("no degraded structure to reduce by")
    return MTProblem(sigma_y=bd.induced_sigma_y, d=bd.induced_d)


def bt_sum_rate_preserved(p, bd=None, tol=1e-6):
    """Check that dropping the degraded coordinates leaves the minimum
    sum-rate unchanged. Trivially true when there is nothing to drop."""
    if bd is None:
        bd = detect(p)
    if bd is None:
        return True
    full = solve(p).sum_rate
    reduced = solve(reduce(p, bd)).sum_rate
    return abs(full - reduced) <= tol * (1.0 + abs(full))
