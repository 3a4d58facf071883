import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_conjugate
from radvar import convexfun as cf
from radvar.errors import (
    DegenerateG,
    InconsistentParams,
    NonConvexData,
    NotSuperlinear,
    OutsideDomain,
    OutsideDualDomain,
    RatioUnreachable,
    TooFewSamples,
)


@st.composite
def pwl_functions(draw, max_pieces=6, allow_bounded=True):
    k = draw(st.integers(1, max_pieces))
    widths = draw(st.lists(st.floats(0.05, 3.0), min_size=k, max_size=k))
    incs = draw(st.lists(st.floats(0.0, 2.0), min_size=k, max_size=k))
    v0 = draw(st.floats(-2.0, 2.0))
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    slopes = np.cumsum(incs)
    values = v0 + np.concatenate([[0.0], np.cumsum(slopes * np.asarray(widths))])
    bounded = allow_bounded and draw(st.booleans())
    return cf.make_pwl(breaks, values, float(breaks[-1]) if bounded else None)


# --------------------------------------------------------------------------
# construction


def test_make_pwl_valid_slopes():
    f = cf.make_pwl([0, 1, 2], [0, 0, 1])
    assert f(0.5) == 0.0
    assert f(1.5) == pytest.approx(0.5)
    assert f(3.0) == pytest.approx(2.0)  # last slope continues


def test_make_pwl_rejects_decreasing_slopes():
    with pytest.raises(NonConvexData):
        cf.make_pwl([0, 1, 2], [0, 1, 1])


def test_make_pwl_indicator_tail():
    f = cf.make_pwl([0, 1], [0, 1], domain_end=1.0)
    assert f(1.0) == 1.0
    assert math.isinf(f(1.0 + 1e-9))
    assert math.isinf(f(-1.5))


def test_make_pwl_needs_nonnegative_first_slope():
    with pytest.raises(NonConvexData):
        cf.make_pwl([0, 1], [0, -1])


def test_even_extension():
    f = cf.make_pwl([0, 1, 3], [0, 0.5, 2.5])
    s = np.linspace(-4, 4, 81)
    np.testing.assert_allclose(f(s), f(-s))


# --------------------------------------------------------------------------
# subgradients


def test_subgradient_abs_at_zero():
    iv = cf.subgradient(cf.Power(1.0, 1.0), 0.0)
    assert (iv.lo, iv.hi) == (-1.0, 1.0)


def test_subgradient_smooth_point():
    iv = cf.subgradient(cf.Power(0.5, 2.0), 3.0)
    assert iv.lo == pytest.approx(3.0) and iv.hi == pytest.approx(3.0)


def test_subgradient_at_constraint_boundary():
    f = cf.Power(0.5, 2.0).restrict(2.0)
    iv = cf.subgradient(f, 2.0)
    assert iv.lo == pytest.approx(2.0)
    assert math.isinf(iv.hi)


def test_subgradient_outside_domain_raises():
    with pytest.raises(OutsideDomain):
        cf.subgradient(cf.make_pwl([0, 1], [0, 1], 1.0), 1.5)


def test_subgradient_pwl_kink():
    f = cf.make_pwl([0, 1, 2], [0, 0, 1])
    iv = cf.subgradient(f, 1.0)
    assert iv.to_list() == [0.0, 1.0]


# --------------------------------------------------------------------------
# conjugates


def test_conjugate_quadratic_self_dual():
    fs = cf.conjugate(cf.Power(0.5, 2.0))
    p = np.linspace(-3, 3, 61)
    np.testing.assert_allclose(fs(p), p**2 / 2, atol=1e-12)


def test_conjugate_abs_is_indicator():
    fs = cf.conjugate(cf.Power(1.0, 1.0))
    assert fs(0.5) == 0.0 and fs(-1.0) == 0.0
    assert math.isinf(fs(1.5))


def test_conjugate_hinge_against_brute_force():
    f = cf.make_pwl([0, 1, 2], [0, 0, 1])
    fs = f.conjugate()
    p = np.linspace(-0.99, 0.99, 23)
    # oracle: sup over s of p s - max(0, |s| - 1)
    np.testing.assert_allclose(fs(p), brute_conjugate(f, p), atol=1e-9)
    np.testing.assert_allclose(fs(p), np.abs(p), atol=1e-12)
    assert math.isinf(fs(1.5))


def test_conjugate_power_closed_form():
    f = cf.Power(2.0, 3.0)
    p = np.array([0.3, 1.0, 2.7])
    np.testing.assert_allclose(f.conjugate()(p), brute_conjugate(f, p, s_max=5.0), rtol=1e-7)


def test_numeric_conjugate_xlog_matches_brute_force():
    f = cf.XLog(1.0)
    p = np.array([0.2, 1.0, 3.0])
    np.testing.assert_allclose(f.conjugate()(p), brute_conjugate(f, p, s_max=30.0), atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(pwl_functions())
def test_fenchel_moreau_involution(f):
    assert f.conjugate().conjugate().allclose(f, 1e-12)


@settings(max_examples=60, deadline=None)
@given(pwl_functions(), st.floats(-6, 6), st.floats(-6, 6))
def test_young_fenchel(f, s, p):
    fs = f.conjugate()
    lhs = f(s) + fs(p)
    assert lhs >= p * s - 1e-10 * (1 + abs(p * s))


@settings(max_examples=40, deadline=None)
@given(pwl_functions(allow_bounded=False), st.floats(0.0, 5.0))
def test_subgradient_inversion(f, x):
    iv = cf.subgradient(f, x)
    p = iv.select("mid")
    back = cf.inverse_subgradient(f, p)
    assert back.contains(x, tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(pwl_functions(allow_bounded=False), st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_dual_monotonicity(f, p, q):
    p, q = sorted((p, q))
    if p == q or q >= f.asymptotic_slope:
        return
    a, b = f.inverse_subgradient(p), f.inverse_subgradient(q)
    assert a.hi <= b.lo + 1e-12


# --------------------------------------------------------------------------
# inverse subgradient


def test_inverse_subgradient_identity():
    iv = cf.inverse_subgradient(cf.Power(0.5, 2.0), 4.0)
    assert iv.lo == pytest.approx(4.0) and iv.hi == pytest.approx(4.0)


def test_inverse_subgradient_abs_interior():
    iv = cf.inverse_subgradient(cf.Power(1.0, 1.0), 0.5)
    assert iv.to_list() == [0.0, 0.0]


def test_inverse_subgradient_hinge():
    f = cf.make_pwl([0, 1, 2], [0, 0, 1])
    iv = cf.inverse_subgradient(f, 0.5)
    # oracle: argmax of 0.5 s - f(s) by grid scan
    s = np.linspace(0, 3, 30001)
    arg = s[np.argmax(0.5 * s - f(s))]
    assert iv.lo == pytest.approx(arg, abs=1e-4) and iv.hi == pytest.approx(1.0)


def test_inverse_subgradient_outside_dual_domain():
    with pytest.raises(OutsideDualDomain):
        cf.inverse_subgradient(cf.Power(1.0, 1.0), 1.5)


def test_prox_quadratic_closed_form():
    f = cf.Power(0.5, 2.0)
    v = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_allclose(f.prox(v, 0.5), v / 1.5)


@settings(max_examples=30, deadline=None)
@given(pwl_functions(), st.floats(-5, 5), st.floats(0.01, 3.0))
def test_pwl_prox_minimizes(f, v, t):
    x = float(f.prox(np.array([v]), t)[0])
    obj = lambda y: f(y) + (y - v) ** 2 / (2 * t)  # noqa: E731
    ys = np.linspace(-8, 8, 16001)
    assert obj(x) <= float(np.min(obj(ys))) + 1e-7


# --------------------------------------------------------------------------
# envelopes


def test_envelope_of_convex_data_is_identity():
    s = np.array([0.0, 1.0, 2.0, 3.0])
    v = np.array([0.0, 0.5, 2.0, 4.5])
    env, P = cf.convex_envelope(np.column_stack([s, v]))
    np.testing.assert_allclose(env(s), v)
    np.testing.assert_allclose(P.P, s)


def test_envelope_small_example():
    env, P = cf.convex_envelope([(0, 0), (1, 1), (2, 1), (3, 3)])
    np.testing.assert_allclose(P.P, [0, 2, 3])
    assert env(1.0) == pytest.approx(0.5)
    assert env(2.5) == pytest.approx(2.0)


def test_envelope_double_well_flat_between_zeros():
    s = np.round(np.arange(0, 301) * 0.01, 10)
    v = s**2 * (s - 1) ** 2
    env, P = cf.convex_envelope(np.column_stack([s, v]))
    inner = s[s <= 1]
    np.testing.assert_allclose(env(inner), 0.0, atol=1e-15)
    low = P.P[P.P <= 1.0 + 1e-12]
    np.testing.assert_allclose(low, [0.0, 1.0], atol=0.01)


def test_envelope_too_few_samples():
    with pytest.raises(TooFewSamples):
        cf.convex_envelope([(0, 0)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=30))
def test_envelope_is_below_and_touches_at_P(vals):
    s = np.arange(len(vals), dtype=float) * 0.5
    v = np.asarray(vals)
    env, P = cf.convex_envelope(np.column_stack([s, v]))
    assert np.all(env(s) <= v + 1e-12)
    # the envelope is a minorant that is convex along the grid
    d = np.diff(env(s)) / 0.5
    assert np.all(np.diff(d) >= -1e-9)
    for x in P.P:
        k = int(round(x / 0.5))
        assert env(x) == pytest.approx(v[k], abs=1e-12)


def test_extremal_distance():
    P = cf.ExtremalSet(np.array([0.0, 1.0, 2.5]))
    np.testing.assert_allclose(P.distance([0.4, 1.9, -2.4, 3.0]), [0.4, 0.6, 0.1, 0.5])


# --------------------------------------------------------------------------
# growth gauges


def test_nagumo_superlinear():
    nag = cf.nagumo_from_g(lambda r: cf.Power(0.5, 2.0), [0.1, 1.0, 2.0])
    assert math.isinf(nag.asymptotic_slope)
    np.testing.assert_allclose(nag.psi(np.array([1.0, 3.0])), [0.5, 4.5])


def test_nagumo_linear_growth():
    nag = cf.nagumo_from_g(lambda r: cf.Power(1.0, 1.0), [0.0, 1.0])
    assert nag.asymptotic_slope == 1.0 and nag.s0 == 0.0


def test_nagumo_radial_minimum():
    nag = cf.nagumo_from_g(lambda r: cf.Power(1.0 + r, 1.0), np.linspace(0, 2, 21))
    assert nag.asymptotic_slope == pytest.approx(1.0)
    assert nag.psi(2.0) == pytest.approx(2.0)


def test_nagumo_pwl_minimum_over_r():
    fa = cf.make_pwl([0, 1, 2], [0, 0.5, 2.0])
    fb = cf.make_pwl([0, 1, 2], [0, 0.2, 2.5])
    nag = cf.nagumo_from_g(lambda r: fa if r < 0.5 else fb, [0.0, 1.0])
    # oracle: the minimum is fb up to s=1.375 and fa after; its envelope
    # is 0.2 s up to the kink of fb, then the parallel of fa's tail
    s = np.linspace(0, 50, 5001)
    ref = np.maximum(0.2 * s, 0.2 + 1.5 * (s - 1.0))
    np.testing.assert_allclose(nag.psi(s), ref, atol=1e-12)
    assert np.all(nag.psi(s) <= np.minimum(fa(s), fb(s)) + 1e-12)
    assert nag.asymptotic_slope == 1.5


def test_nagumo_degenerate():
    with pytest.raises(DegenerateG):
        cf.nagumo_from_g(lambda r: cf.make_pwl([0, 1], [0, 0]), [0.0, 1.0])


def test_ratio_root_examples():
    q = cf.nagumo_from_g(lambda r: cf.Power(0.5, 2.0), [1.0])
    assert cf.ratio_root(q, 4.0) == pytest.approx(8.0, abs=1e-12)
    sq = cf.nagumo_from_g(lambda r: cf.Power(1.0, 2.0), [1.0])
    assert cf.ratio_root(sq, 2.0) == pytest.approx(2.0, abs=1e-12)
    assert cf.ratio_root(sq, 1e-9) == pytest.approx(0.0, abs=1e-8)


def test_ratio_root_against_brentq():
    from scipy.optimize import brentq

    f = cf.make_pwl([0, 1, 2, 4], [0, 0, 1, 5])
    nag = cf.nagumo_from_g(lambda r: f, [0.0])
    for m in (0.1, 0.5, 1.2):
        ref = brentq(lambda x: float(f(x)) / x - m, 1.0 + 1e-12, 1e3)
        assert cf.ratio_root(nag, m) == pytest.approx(ref, abs=1e-10)


def test_ratio_root_unreachable():
    nag = cf.nagumo_from_g(lambda r: cf.Power(1.0, 1.0), [0.0])
    with pytest.raises(RatioUnreachable):
        cf.ratio_root(nag, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(1.2, 4.0), st.floats(0.01, 10.0))
def test_ratio_root_solves_equation(c, q, m):
    nag = cf.nagumo_from_g(lambda r: cf.Power(c, q), [0.0])
    sig = cf.ratio_root(nag, m)
    assert float(nag.psi(sig)) / sig == pytest.approx(m, rel=1e-9)


# --------------------------------------------------------------------------
# Phi_a and gluing


def test_phi_a_square():
    f = cf.build_phi_a(cf.Power(1.0, 2.0), 2.0)
    assert f(2.0) == 0.0 and f(3.0) == pytest.approx(5.0)
    assert cf.in_phi_a(f, 2.0) == []


def test_phi_a_zero_threshold():
    f = cf.build_phi_a(cf.Power(1.0, 2.0), 0.0)
    assert f(1.5) == pytest.approx(2.25)


def test_phi_a_xlog_slope_scan():
    f = cf.build_phi_a(cf.XLog(1.0), 1.0)
    s = np.linspace(0, 10, 2001)
    assert f(1.0) == 0.0
    assert np.all(np.diff(np.diff(f(s))) >= -1e-12)


def test_phi_a_needs_superlinear():
    with pytest.raises(NotSuperlinear):
        cf.build_phi_a(cf.Power(1.0, 1.0), 1.0)


def test_in_phi_a_reports_failures():
    assert "zero on [0,a]" in cf.in_phi_a(cf.Power(1.0, 2.0), 1.0)
    assert "superlinear" in cf.in_phi_a(cf.make_pwl([0, 1], [0, 0]), 1.0)


def test_glued_linear_growth():
    params = cf.GluingParams(m0=1.0, delta=1.0 / 3.0, sigma_hat=0.0, sigma1=1.0, zeta=1.0)
    g = cf.build_glued(cf.Power(2.0, 1.0), params)
    assert params.tangent_slope == pytest.approx(4.0 / 3.0)
    assert g(1.0) == pytest.approx(4.0 / 3.0)
    # tangent (4/3) s plus the tail max(s^2 - 1, 0)
    assert g(2.0) == pytest.approx(8.0 / 3.0 + 3.0)


def test_glued_quadratic_slope_continuity():
    params = cf.GluingParams(m0=0.5, delta=0.5, sigma_hat=1.0, sigma1=2.0, zeta=2.0)
    g = cf.build_glued(cf.Power(0.5, 2.0), params)
    assert g.dleft(1.0) == pytest.approx(1.0) and g.dright(1.0) == pytest.approx(1.0)
    s = np.linspace(0, 5, 1001)
    assert np.all(np.diff(np.diff(g(s))) >= -1e-12)


def test_glued_inconsistent():
    with pytest.raises(InconsistentParams):
        cf.build_glued(cf.Power(0.5, 2.0), cf.GluingParams(1.0, 0.1, 3.0, 2.0, 2.0))


def test_interval_helpers():
    iv = cf.Interval(1.0, 3.0)
    assert iv.select("min") == 1.0 and iv.select("mid") == 2.0
    assert iv.negate().to_list() == [-3.0, -1.0]
    assert iv.distance(4.0) == 1.0 and iv.distance(2.0) == 0.0
    assert cf.Interval.empty().is_empty
