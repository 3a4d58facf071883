import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import problem
from oracles import enumerate_minimum, quantized_minimum, round_to_lattice
from radvar.problem import DiscreteProfile, frad_value, uniform_grid


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3), st.floats(0.1, 1.5), st.floats(-0.3, 0.3), st.sampled_from(["affine", "softplus", "sine"]))
def test_dynamic_programme_equals_enumeration(N, L, shift, kind):
    h = {"affine": {"kind": "affine", "slope": L},
         "softplus": {"kind": "softplus", "scale": L, "shift": shift},
         "sine": {"kind": "sine", "amp": L, "freq": 2.0, "phase": shift}}[kind]
    prob = problem(N=N, R=1.0, h=h)
    grid = uniform_grid(1.0, 3)
    dp_val, dp_s = quantized_minimum(prob, grid, 1.0, K=5)
    en_val, _ = enumerate_minimum(prob, grid, 1.0, K=5)
    assert abs(dp_val - en_val) <= 1e-13
    assert abs(frad_value(prob, DiscreteProfile(grid, dp_s)) - dp_val) <= 1e-13


def test_rounding_stays_on_lattice():
    s = round_to_lattice([0.26, -3.0, 0.0], 1.0, K=4)
    np.testing.assert_allclose(s, [0.25, -1.0, 0.0])
