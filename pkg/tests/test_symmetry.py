import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import problem
from radvar.catalog import get_example
from radvar.errors import DimensionMismatch, GridMismatch
from radvar.problem import frad_value
from radvar.symmetry import BallFunction, directional_profile, functional_2d, symmetrization_report


def _radial(R=2.0, n_r=32, n_t=16):
    return BallFunction.from_function(R, n_r, n_t, lambda r, t: (r**2 - R**2) * np.ones_like(t))


def test_radial_slices_identical():
    u = _radial()
    first = directional_profile(u, 0).u
    for j in range(u.n_theta):
        np.testing.assert_array_equal(directional_profile(u, j).u, first)


def test_cosine_slice_vanishes_at_quarter_turn():
    u = BallFunction.from_function(1.0, 20, 16, lambda r, t: r * (1 - r) * np.cos(t))
    j = 4  # theta = pi / 2
    assert u.thetas[j] == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(directional_profile(u, j).u, 0.0, atol=1e-15)


def test_slice_is_column():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(9, 7))
    vals[0] = vals[0, 0]
    vals[-1] = 0.0
    u = BallFunction(1.0, vals)
    np.testing.assert_allclose(directional_profile(u, 3).u, vals[:, 3])


def test_ball_function_validation():
    with pytest.raises(GridMismatch):
        BallFunction(1.0, np.ones((5, 4)))  # non-zero boundary
    bad = np.zeros((5, 4))
    bad[0] = [0, 1, 2, 3]
    with pytest.raises(GridMismatch):
        BallFunction(1.0, bad)


def test_functional_radial_equals_slice_energy():
    prob = get_example("example2", n=32)
    u = _radial()
    F = functional_2d(prob, u)
    assert F == pytest.approx(2 * math.pi * frad_value(prob, directional_profile(u, 0)), rel=1e-13)


def test_functional_zero():
    prob = problem(N=2, R=1.0, g={"kind": "pwl", "breakpoints": [0, 1], "values": [0.2, 1.2]},
                   h={"kind": "affine", "slope": 0.5, "intercept": 0.1})
    u = BallFunction(1.0, np.zeros((11, 8)))
    r = np.linspace(0, 1, 11)
    mid = 0.5 * (r[1:] + r[:-1])
    ref = 2 * math.pi * float(np.sum(mid * (0.2 + 0.1) * np.diff(r)))
    assert functional_2d(prob, u) == pytest.approx(ref, rel=1e-13)


def test_functional_needs_plane():
    with pytest.raises(DimensionMismatch):
        functional_2d(problem(N=3), BallFunction(1.0, np.zeros((4, 4))))


def test_cos_squared_profile_mean_inequality():
    prob = get_example("example2", n=32)
    u = BallFunction.from_function(2.0, 48, 48, lambda r, t: -(2.0 - r) * (r / 2.0) * np.cos(t) ** 2 - (2.0 - r))
    rep = symmetrization_report(prob, u)
    assert rep.mean <= rep.F + 1e-10 * abs(rep.F)


def test_report_radial_equality():
    prob = get_example("example2", n=32)
    rep = symmetrization_report(prob, _radial())
    assert rep.spread <= 1e-12
    assert rep.mean == pytest.approx(rep.F, rel=1e-13)
    assert rep.strict_fraction == 0.0


def test_report_non_radial_strict_witness():
    prob = problem(N=2, R=1.0)  # g = s^2 / 2 is strictly increasing in s
    u = BallFunction.from_function(1.0, 32, 32, lambda r, t: (r - 1.0) * (1 + 0.3 * r * np.cos(t)))
    rep = symmetrization_report(prob, u)
    assert rep.mean_ok and rep.exists_ok
    assert rep.mean < rep.F
    assert rep.strict_fraction > 0.5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_mean_inequality_random(seed):
    rng = np.random.default_rng(seed)
    prob = get_example("example2", n=16)
    vals = rng.normal(0.0, 1.0, size=(17, 12)).cumsum(axis=0)
    vals = vals - vals[-1]
    vals[0] = vals[0].mean()
    vals[-1] = 0.0
    rep = symmetrization_report(prob, BallFunction(2.0, vals))
    assert rep.mean <= rep.F + 1e-12 * max(1.0, abs(rep.F))
    assert rep.best_value <= rep.F + 1e-12 * max(1.0, abs(rep.F))
