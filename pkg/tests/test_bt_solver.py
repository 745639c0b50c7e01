"""Sum-rate solver: frozen example solves, optimality re-checks, and the
closed-form circulant path against the generic active-set path."""

import numpy as np
import pytest

from mtrate import fixtures
from mtrate.bt_solver import (
    BTSolution,
    MTProblem,
    solve,
    solve_block_circulant,
    sum_rate_at,
    verify,
)
from mtrate.errors import InvalidProblemError
from mtrate.two_terminal import classic_region_sum_rate


def rand_spd(rng, n, scale=1.0):
    a = rng.normal(size=(n, n))
    return scale * (a @ a.T + n * np.eye(n))


def bc_block(a, b):
    return np.array([[a, b], [b, a]])


def rand_block_circulant(rng, m):
    # circulant over m positions of 2x2 equal-diagonal blocks, bumped PD
    s0 = bc_block(1.0, rng.uniform(-0.3, 0.3))
    s1 = bc_block(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
    mat = np.kron(np.eye(m), s0)
    neigh = np.zeros((m, m))
    for t in range(m):
        neigh[t, (t + 1) % m] = 1.0
        neigh[t, (t - 1) % m] = 1.0
    mat += np.kron(neigh, s1) * 0.5
    mat = 0.5 * (mat + mat.T)
    lam = np.linalg.eigvalsh(mat)
    if lam[0] < 0.1:
        mat += (0.1 - lam[0]) * np.eye(2 * m)
    return mat


def test_problem_validation():
    sigma = np.eye(2)
    with pytest.raises(InvalidProblemError):
        MTProblem(sigma_y=sigma, d=np.array([0.1, 0.1, 0.1]))
    with pytest.raises(InvalidProblemError):
        MTProblem(sigma_y=sigma, d=np.array([0.1, 0.0]))
    with pytest.raises(InvalidProblemError):
        MTProblem(sigma_y=sigma, d=np.array([0.1, 1.5]))
    with pytest.raises(InvalidProblemError):
        MTProblem(sigma_y=np.array([[1.0, 2.0], [2.0, 1.0]]), d=np.array([0.1, 0.1]))


def test_example1_solution_frozen():
    sol = solve(fixtures.problem_1())
    assert sol.converged and sol.residual < 1e-10
    assert abs(sol.sum_rate - fixtures.EXPECTED_1["sum_rate"]) < 1e-6
    assert np.allclose(sol.w, fixtures.EXPECTED_1["w"], atol=1e-6)
    # the last source drops out of the precision allocation entirely
    assert sol.w[3] == 0.0
    assert list(sol.active) == [True, True, True, False]
    assert np.max(np.abs(sol.d_tilde - fixtures.D_TILDE_1_PRINTED)) < 5e-4
    assert abs(sol.d_tilde[3, 3] - 0.4) < 5e-4


def test_example3_solution_frozen():
    sol = solve(fixtures.problem_3())
    assert sol.converged
    assert abs(sol.sum_rate - fixtures.EXPECTED_3["sum_rate"]) < 1e-6
    assert np.allclose(sol.w, fixtures.EXPECTED_3["w"], atol=1e-6)
    assert np.allclose(sol.d_tilde, fixtures.EXPECTED_3["d_tilde"], atol=1e-6)
    assert sol.active.all()


def test_sum_rate_at_basics():
    p = fixtures.problem_3()
    assert abs(sum_rate_at(p, np.zeros(3))) < 1e-12
    sol = solve(p)
    assert abs(sum_rate_at(p, sol.w) - sol.sum_rate) < 1e-12
    rng = np.random.default_rng(3)
    w = rng.uniform(0.1, 2.0, size=3)
    base = sum_rate_at(p, w)
    for i in range(3):
        bumped = w.copy()
        bumped[i] += 0.5
        assert sum_rate_at(p, bumped) > base
    with pytest.raises(InvalidProblemError):
        sum_rate_at(p, np.array([0.1, -0.1, 0.1]))


def test_verify_accepts_solver_output():
    for p in (fixtures.problem_1(), fixtures.problem_2(), fixtures.problem_3()):
        rep = verify(p, solve(p))
        assert rep.passed, rep.to_dict()


def test_verify_rejects_corruptions():
    p = fixtures.problem_3()
    sol = solve(p)
    bent = sol.d_tilde.copy()
    bent[0, 1] += 1e-3
    bad = BTSolution(
        d_tilde=bent,
        w=sol.w,
        active=sol.active,
        sum_rate=sol.sum_rate,
        converged=True,
        residual=0.0,
    )
    rep = verify(p, bad)
    assert not rep.passed
    assert rep.residuals["reconstruction"] > 1e-4

    # all-zero precisions satisfy the structure but violate the targets
    idle = BTSolution(
        d_tilde=p.sigma_y.copy(),
        w=np.zeros(3),
        active=np.zeros(3, dtype=bool),
        sum_rate=0.0,
        converged=True,
        residual=0.0,
    )
    rep = verify(p, idle)
    assert not rep.passed
    assert rep.residuals["noise_precision_structure"] < 1e-12
    assert rep.margins["distortion_constraints"] < 0


def test_two_source_solve_matches_closed_form():
    # with both targets binding the solver must land on the known
    # two-source sum-rate expression
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(40):
        s1, s2 = rng.uniform(0.5, 2.0, size=2)
        rho = rng.uniform(0.0, 0.9)
        sigma = np.array(
            [[s1**2, rho * s1 * s2], [rho * s1 * s2, s2**2]]
        )
        d = rng.uniform(0.05, 0.5, size=2) * np.diag(sigma)
        p = MTProblem(sigma_y=sigma, d=d)
        sol = solve(p)
        assert verify(p, sol).passed
        if not sol.active.all():
            continue
        want = classic_region_sum_rate(sigma, d[0], d[1])
        assert abs(sol.sum_rate - want) < 1e-9
        checked += 1
    assert checked > 25


def test_block_circulant_identity_covariance():
    delta = 0.2
    p = MTProblem(sigma_y=np.eye(4), d=np.full(4, delta))
    sol = solve_block_circulant(p)
    assert abs(sol.w[0] - (1.0 - delta) / delta) < 1e-12
    assert np.allclose(sol.d_tilde, delta * np.eye(4), atol=1e-12)
    assert abs(sol.sum_rate - 2.0 * np.log(1.0 / delta)) < 1e-12


def test_block_circulant_rejects_bad_inputs():
    with pytest.raises(InvalidProblemError):
        solve_block_circulant(fixtures.problem_1())
    p = MTProblem(sigma_y=np.eye(4), d=np.array([0.2, 0.2, 0.2, 0.3]))
    with pytest.raises(InvalidProblemError):
        solve_block_circulant(p)


def test_cross_solver_agreement():
    p2 = fixtures.problem_2()
    closed = solve_block_circulant(p2)
    generic = solve(p2)
    assert abs(closed.sum_rate - generic.sum_rate) < 1e-6
    assert np.max(np.abs(closed.d_tilde - generic.d_tilde)) < 1e-6
    assert abs(1.0 / closed.w[0] - fixtures.EXPECTED_2["q"]) < 1e-6
    assert abs(closed.sum_rate - fixtures.EXPECTED_2["sum_rate"]) < 1e-6
    assert np.max(np.abs(closed.d_tilde - fixtures.D_TILDE_2_PRINTED)) < 5e-4

    rng = np.random.default_rng(7)
    for m in (2, 3):
        sigma = rand_block_circulant(rng, m)
        d_val = 0.3 * float(np.min(np.diag(sigma)))
        p = MTProblem(sigma_y=sigma, d=np.full(2 * m, d_val))
        closed = solve_block_circulant(p)
        generic = solve(p)
        assert abs(closed.sum_rate - generic.sum_rate) < 1e-6
        assert np.max(np.abs(closed.d_tilde - generic.d_tilde)) < 1e-6
