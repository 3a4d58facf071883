"""Euler-Lagrange inclusions for radial problems.

The discrete system couples node momenta ``p_i`` (with ``p_0 = 0``) to cell
slopes ``s_i`` (with ``u_n = 0``):

    (p_{i+1} - p_i) / w_i  in  dh(r_i', u_i')                (cellwise)
    r_i'^(1-N) p_i'        in  Gamma(r_i', s_i)

where primes denote cell midpoints, ``w_i`` is the exact ``r^(N-1)`` weight of
cell ``i`` and ``p_i'`` interpolates the momentum linearly in ``r^N``.  Both
relations are exact when ``dh`` is constant on the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convexfun import Interval
from .errors import DualDomainExceeded, NoConvergence, NotConvexH
from .problem import (
    PWA,
    DiscreteProfile,
    HTerm,
    RadialProblem,
    ZeroOrderLagrangian,
    cell_weights,
)

INF = math.inf


@dataclass
class ResidualReport:
    res_h: float
    res_g: float
    momentum_bound_ok: bool
    slope_bound_ok: bool
    max_momentum_ratio: float = 0.0
    max_slope: float = 0.0
    res_h_cells: np.ndarray | None = None
    res_g_cells: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "res_h": self.res_h,
            "res_g": self.res_g,
            "momentum_bound_ok": self.momentum_bound_ok,
            "slope_bound_ok": self.slope_bound_ok,
            "max_momentum_ratio": self.max_momentum_ratio,
            "max_slope": self.max_slope,
        }


@dataclass
class ELPair:
    """Candidate solution ``(u, p)`` of the inclusion system on a grid."""

    grid: np.ndarray
    u: np.ndarray
    p: np.ndarray
    slopes: np.ndarray
    report: ResidualReport | None = None
    status: str = "unchecked"
    iterations: int = 0

    @classmethod
    def from_profile(cls, profile: DiscreteProfile, p) -> "ELPair":
        return cls(profile.grid, profile.u, np.asarray(p, dtype=float), profile.slopes)

    @property
    def profile(self) -> DiscreteProfile:
        return DiscreteProfile(self.grid, self.slopes)


def _mid(grid):
    return 0.5 * (grid[1:] + grid[:-1])


def momentum_mid(grid, p, N: int) -> np.ndarray:
    """Momentum at cell midpoints, interpolated linearly in ``r^N``."""
    grid = np.asarray(grid, dtype=float)
    p = np.asarray(p, dtype=float)
    rN = grid**N
    frac = (_mid(grid) ** N - rN[:-1]) / (rN[1:] - rN[:-1])
    return p[:-1] + (p[1:] - p[:-1]) * frac


def _gamma(prob: RadialProblem, r, s):
    """Vectorized Gamma at signed slopes ``s``: (lo, hi) arrays, empty as lo > hi."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    mu = prob.mu_at(r)
    lo = np.asarray(prob.g.dleft(r, a), dtype=float).copy()
    hi = np.asarray(prob.g.dright(r, a), dtype=float).copy()
    at = np.isfinite(mu) & np.isclose(a, mu, rtol=1e-12, atol=0.0)
    hi[at] = INF
    out = a > mu * (1 + 1e-12)
    lo[out], hi[out] = INF, -INF
    neg = s < 0
    lo[neg], hi[neg] = -hi[neg], -lo[neg]
    return lo, hi


def gamma_interval(prob: RadialProblem, r: float, s: float) -> Interval:
    """``dg(r, s)`` below the constraint, ``[g'_-(r, mu), inf)`` on it, empty above."""
    lo, hi = _gamma(prob, np.array([r]), np.array([abs(s)]))
    return Interval(float(lo[0]), float(hi[0]))


def _select(lo, hi, rule):
    if rule == "min":
        return lo
    if rule == "max":
        return hi
    return 0.5 * (lo + hi)


def momentum_from_profile(
    prob: RadialProblem,
    u: DiscreteProfile,
    selection: str = "mid",
    h: ZeroOrderLagrangian | None = None,
) -> np.ndarray:
    """Node momenta ``p_i = sum_{j<i} w_j sel(dh(r_j', u_j'))`` with ``p_0 = 0``."""
    h = h or prob.h
    mid = u.mid
    lo, hi = h.clarke(mid, u.u_mid)
    w = cell_weights(u.grid, prob.N)
    return np.concatenate([[0.0], np.cumsum(w * _select(lo, hi, selection))])


def slope_from_momentum(prob: RadialProblem, grid, momentum, selection: str = "min") -> np.ndarray:
    """Cell slopes from ``|s| in dg*(r', r'^(1-N) p')``, clamped by the constraint.

    Raises:
        DualDomainExceeded: if an unconstrained cell asks for a slope beyond
            the range of ``dg(r, .)``.
    """
    grid = np.asarray(grid, dtype=float)
    mid = _mid(grid)
    pm = momentum_mid(grid, momentum, prob.N)
    q = mid ** (1 - prob.N) * np.abs(pm)
    lo, hi = prob.g.inverse(mid, q)
    mu = prob.mu_at(mid)
    bad = np.isnan(lo)
    if np.any(bad & ~np.isfinite(mu)):
        i = int(np.argmax(bad & ~np.isfinite(mu)))
        raise DualDomainExceeded(f"r^(1-N)|p| = {q[i]:.6g} outside the dual domain at r = {mid[i]:.6g}")
    lo = np.where(bad, mu, lo)
    hi = np.where(bad, mu, hi)
    s = np.minimum(_select(lo, hi, selection), mu)
    return np.sign(pm) * s


def residuals(prob: RadialProblem, pair: ELPair, tol: float = 1e-6) -> ResidualReport:
    """Distances of a pair to both inclusions plus the a-priori bound flags."""
    grid = np.asarray(pair.grid, dtype=float)
    if not math.isclose(grid[-1], prob.R, rel_tol=1e-12):
        from .errors import GridMismatch

        raise GridMismatch("pair grid does not end at R")
    N = prob.N
    mid = _mid(grid)
    w = cell_weights(grid, N)
    prof = pair.profile
    rN1 = mid ** (N - 1)
    dp = rN1 * np.diff(pair.p) / w
    lo, hi = prob.h.clarke(mid, prof.u_mid)
    res_h = np.maximum(0.0, np.maximum(rN1 * lo - dp, dp - rN1 * hi))
    pm = momentum_mid(grid, pair.p, N)
    glo, ghi = _gamma(prob, mid, pair.slopes)
    with np.errstate(invalid="ignore"):
        res_g = np.maximum(0.0, np.maximum(rN1 * glo - pm, pm - rN1 * ghi))
    res_g = np.where(glo > ghi, INF, res_g)
    rep = prob.report
    ratio = float(np.max(mid ** (1 - N) * np.abs(pm))) if mid.size else 0.0
    smax = float(np.max(np.abs(pair.slopes))) if pair.slopes.size else 0.0
    dr = float(np.max(np.diff(grid)))
    mom_ok = ratio <= rep.M0 + tol
    slope_ok = smax <= rep.sigma0 * (1 + 2 * dr) + tol
    return ResidualReport(
        float(np.max(res_h)), float(np.max(res_g)), bool(mom_ok), bool(slope_ok), ratio, smax, res_h, res_g
    )


def _pair_ok(prob, grid, s, h_selection, res_tol) -> bool:
    prof = DiscreteProfile(grid, s)
    mom = momentum_from_profile(prob, prof, h_selection)
    rep = residuals(prob, ELPair(grid, prof.u, mom, prof.slopes))
    scale = max(1.0, float(np.max(np.abs(mom))))
    return rep.res_h <= res_tol * scale and rep.res_g <= res_tol * scale


def fixed_point_solve(
    prob: RadialProblem,
    grid,
    theta: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 10000,
    init: str = "zero",
    h_selection: str = "mid",
    g_selection: str = "min",
    res_tol: float = 1e-6,
) -> ELPair:
    """Damped Picard iteration ``u -> p -> s`` anchored at ``u(R) = 0``.

    Each cell carries its own damping factor, halved whenever its update
    changes sign and relaxed back towards ``theta`` otherwise.  A pair
    is reported as converged only if both residuals fall below
    ``res_tol * max(1, |p|_inf)``; otherwise ``NoConvergence`` carries the
    final pair.

    Raises:
        NoConvergence: iteration budget exhausted or residuals too large.
        DualDomainExceeded: propagated from ``slope_from_momentum``.
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size - 1
    if init == "zero":
        s = np.zeros(n)
    elif init == "cone":
        s = np.full(n, min(prob.sigma0, 1.0) if math.isfinite(prob.sigma0) else 1.0)
    else:
        s = np.asarray(init, dtype=float).copy()
    u_prev = DiscreteProfile(grid, s).u
    th = np.full(n, float(theta))
    prev_dir = np.zeros(n)
    it = 0
    for it in range(1, max_iter + 1):
        prof = DiscreteProfile(grid, s)
        mom = momentum_from_profile(prob, prof, h_selection)
        s_new = slope_from_momentum(prob, grid, mom, g_selection)
        direction = np.sign(s_new - s)
        # cells whose update flips sign are oscillating: damp them harder
        flip = direction * prev_dir < 0
        th = np.where(flip, 0.5 * th, np.minimum(2.0 * th, theta))
        prev_dir = direction
        step = th if it > 1 else 1.0
        s = (1 - step) * s + step * s_new
        u = DiscreteProfile(grid, s).u
        delta = float(np.max(np.abs(u - u_prev)))
        u_prev = u
        if delta < tol and _pair_ok(prob, grid, s, h_selection, res_tol):
            break
    prof = DiscreteProfile(grid, s)
    mom = momentum_from_profile(prob, prof, h_selection)
    pair = ELPair(grid, prof.u, mom, prof.slopes, iterations=it)
    pair.report = residuals(prob, pair)
    scale = max(1.0, float(np.max(np.abs(mom))))
    ok = pair.report.res_h <= res_tol * scale and pair.report.res_g <= res_tol * scale
    if ok:
        pair.status = "converged"
        return pair
    pair.status = "no-convergence"
    raise NoConvergence(
        f"stopped after {it} iterations: res_h={pair.report.res_h:.3g}, res_g={pair.report.res_g:.3g}",
        result=pair,
    )


# --------------------------------------------------------------------------
# h truncation and the rising-sun rearrangement


class _Mirrored(HTerm):
    def __init__(self, base: HTerm):
        self.base = base
        self.is_convex = base.is_convex
        self.lipschitz = base.lipschitz
        self.kind = f"mirror({base.kind})"

    def value(self, t):
        return self.base.value(-np.asarray(t, dtype=float))

    def dright(self, t):
        return -self.base.dleft(-np.asarray(t, dtype=float))

    def dleft(self, t):
        return -self.base.dright(-np.asarray(t, dtype=float))


class TruncatedTerm(HTerm):
    """``h(m)`` below ``m``, ``h`` on ``[m, 0]``, ``h(0) + K t`` above 0."""

    kind = "truncated"
    is_convex = True

    def __init__(self, base: HTerm, m: float, K: float):
        self.base = base
        self.m = float(m)
        self.K = float(K)
        self.lipschitz = self.K
        self.h0 = float(base.value(np.array(0.0)))
        self.hm = float(base.value(np.array(self.m))) if math.isfinite(self.m) else -INF

    def value(self, t):
        t = np.asarray(t, dtype=float)
        mid = self.base.value(np.clip(t, self.m if math.isfinite(self.m) else t, 0.0))
        return np.where(t > 0, self.h0 + self.K * t, np.where(t <= self.m, self.hm, mid))

    def dright(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.K, np.where(t < self.m, 0.0, self.base.dright(t)))

    def dleft(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, self.K, np.where(t <= self.m, 0.0, self.base.dleft(t)))


@dataclass
class TruncatedH:
    """Truncation of a convex ``h``: flat below ``m``, affine with slope ``K`` above 0.

    When built with ``direction="nonincreasing-at-0"`` the fields refer to the
    mirrored variable ``t -> -t`` and ``htilde`` is mirrored back.
    """

    m: float
    htilde: HTerm
    K: float
    mirrored: bool = False


def truncate_h(h, direction: str = "nondecreasing-at-0") -> TruncatedH:
    """Replace a convex ``h`` by its truncation with the same behaviour near 0.

    Raises:
        NotConvexH: if ``h`` is not convex or has the wrong slope sign at 0
            for the requested direction.
    """
    term = h.term if isinstance(h, ZeroOrderLagrangian) else h
    if isinstance(h, ZeroOrderLagrangian) and not h.is_autonomous:
        raise NotConvexH("truncation needs an r-independent h")
    if not term.is_convex:
        raise NotConvexH("h is not convex")
    mirrored = direction == "nonincreasing-at-0"
    if direction not in ("nondecreasing-at-0", "nonincreasing-at-0"):
        raise ValueError(f"unknown direction {direction!r}")
    work = _Mirrored(term) if mirrored else term
    K = float(work.dleft(np.array(0.0)))
    if K < 0:
        raise NotConvexH(f"h'_-(0) = {K} < 0: use the other direction")
    m = min(float(work.max_argmin()), 0.0)
    if isinstance(work, PWA):
        inner = work.knots[(work.knots > m) & (work.knots < 0)]
        knots = ([m] if math.isfinite(m) else []) + inner.tolist() + [0.0]
        slopes = [0.0] if math.isfinite(m) else [float(work.dleft(np.array(knots[0])))]
        slopes += [float(work.dright(np.array(k))) for k in knots[:-1]] + [K]
        htilde: HTerm = PWA(knots, slopes, float(work.value(np.array(0.0))))
    else:
        htilde = TruncatedTerm(work, m, K)
    if mirrored:
        htilde = _Mirrored(htilde)
    return TruncatedH(m, htilde, K, mirrored)


def rising_sun(u: DiscreteProfile) -> DiscreteProfile:
    """Non-decreasing rearrangement ``u_i -> min_{j >= i} u_j``."""
    vals = np.minimum.accumulate(u.u[::-1])[::-1]
    return DiscreteProfile.from_values(u.grid, vals)
