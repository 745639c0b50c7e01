"""Detection and removal of coordinates that are noisy copies of another
coordinate with an implied distortion target."""

import numpy as np
import pytest

from mtrate import fixtures
from mtrate.bd_reduce import bt_sum_rate_preserved, detect, reduce
from mtrate.bt_solver import MTProblem, solve
from mtrate.errors import InvalidProblemError


def degraded_pair_problem(var_z=0.3, follower_d=0.7):
    # coordinate 2 observes coordinate 0 through extra noise of variance
    # var_z; its target is implied once follower_d >= 0.3 + var_z
    sigma = np.array(
        [
            [1.0, 0.8, 1.0],
            [0.8, 1.0, 0.8],
            [1.0, 0.8, 1.0 + var_z],
        ]
    )
    d = np.array([0.3, 0.4, follower_d])
    return MTProblem(sigma_y=sigma, d=d)


def test_example1_structure_frozen():
    p = fixtures.problem_1()
    bd = detect(p)
    assert bd is not None
    assert bd.partition == fixtures.EXPECTED_1["bd_partition"]
    assert bd.leaders == (0, 1, 2)
    assert set(bd.sigma_z) == {3}
    assert abs(bd.sigma_z[3] - fixtures.EXPECTED_1["bd_sigma_z"]) < 1e-6
    assert np.allclose(bd.induced_sigma_y, p.sigma_y[:3, :3], atol=1e-12)
    assert np.allclose(bd.induced_d, p.d[:3], atol=1e-12)


def test_examples_without_structure():
    assert detect(fixtures.problem_2()) is None
    assert detect(fixtures.problem_3()) is None


def test_constructed_degraded_copy():
    p = degraded_pair_problem()
    bd = detect(p)
    assert bd is not None
    assert bd.partition == ((0, 2), (1,))
    assert bd.leaders == (0, 1)
    assert abs(bd.sigma_z[2] - 0.3) < 1e-12

    # a tighter follower target than the leader's implies real work: no
    # reduction applies
    assert detect(degraded_pair_problem(follower_d=0.55)) is None


def test_reduce_and_rate_preservation():
    p1 = fixtures.problem_1()
    bd1 = detect(p1)
    small = reduce(p1, bd1)
    assert small.dim == 3
    assert abs(solve(small).sum_rate - solve(p1).sum_rate) < 1e-9
    assert bt_sum_rate_preserved(p1)

    p = degraded_pair_problem()
    assert bt_sum_rate_preserved(p)
    # nothing to drop is trivially preserved
    assert bt_sum_rate_preserved(fixtures.problem_3())
    with pytest.raises(InvalidProblemError):
        reduce(p, None)
