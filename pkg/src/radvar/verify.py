"""Post-hoc certificates for computed profiles and Euler-Lagrange pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convexfun import ExtremalSet, convex_envelope
from .elsolve import ELPair, momentum_mid, residuals
from .errors import G0Violated, PrereqFailed
from .problem import DiscreteProfile, RadialProblem, cell_weights, frad_value, sigma_profile

__all__ = [
    "BoundCheck",
    "ConvexityCertificate",
    "ExtremalSet",
    "ExtremalityReport",
    "MonotonicityCertificate",
    "check_momentum_bound",
    "check_slope_bound",
    "convexity_certificate",
    "extremality_check",
    "p_monotonicity_certificate",
]


@dataclass
class BoundCheck:
    ok: bool
    margin: float
    value: float
    bound: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "margin": self.margin, "value": self.value, "bound": self.bound}


def _require_residuals(prob, pair: ELPair, which: str, tol: float):
    rep = pair.report or residuals(prob, pair)
    scale = max(1.0, float(np.max(np.abs(pair.p))))
    if "h" in which and rep.res_h > tol * scale:
        raise PrereqFailed(f"res_h = {rep.res_h:.3g} exceeds {tol * scale:.3g}")
    if "g" in which and rep.res_g > tol * scale:
        raise PrereqFailed(f"res_g = {rep.res_g:.3g} exceeds {tol * scale:.3g}")


def check_momentum_bound(
    prob: RadialProblem, pair: ELPair, tol: float = 1e-6, prereq_tol: float | None = 1e-6
) -> BoundCheck:
    """``max r'^(1-N) |p'| <= M0 + tol`` over cell midpoints.

    Raises:
        PrereqFailed: if the pair violates the ``h`` inclusion by more than
            ``prereq_tol`` (skip the gate with ``prereq_tol=None``).
    """
    if prereq_tol is not None:
        _require_residuals(prob, pair, "h", prereq_tol)
    grid = np.asarray(pair.grid, dtype=float)
    mid = 0.5 * (grid[1:] + grid[:-1])
    ratio = float(np.max(mid ** (1 - prob.N) * np.abs(momentum_mid(grid, pair.p, prob.N))))
    M0 = prob.M0
    return BoundCheck(ratio <= M0 + tol, M0 - ratio, ratio, M0)


def check_slope_bound(
    prob: RadialProblem,
    pair: ELPair,
    grid_tol: float | None = None,
    prereq_tol: float | None = 1e-6,
) -> BoundCheck:
    """``|s_i| <= sigma(r_i')`` cellwise and ``max |s_i| <= sigma0``, up to ``grid_tol``.

    The default ``grid_tol`` is ``2 max(dr) sigma0``.

    Raises:
        PrereqFailed: if either inclusion residual exceeds ``prereq_tol``.
    """
    if prereq_tol is not None:
        _require_residuals(prob, pair, "hg", prereq_tol)
    grid = np.asarray(pair.grid, dtype=float)
    mid = 0.5 * (grid[1:] + grid[:-1])
    sig, sigma0 = sigma_profile(prob, mid)
    if grid_tol is None:
        grid_tol = 2 * float(np.max(np.diff(grid))) * sigma0 + 1e-12
    s = np.abs(pair.slopes)
    smax = float(np.max(s)) if s.size else 0.0
    ok = bool(np.all(s <= sig + grid_tol) and smax <= sigma0 + grid_tol)
    return BoundCheck(ok, sigma0 - smax, smax, sigma0)


@dataclass
class ConvexityCertificate:
    r0: float
    second_diff_min: float
    slope_monotone: bool
    plateau_value: float
    passes: bool
    tol: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _plateau_end(u: np.ndarray) -> int:
    m = float(np.min(u))
    thr = 1e-6 * abs(m) if m != 0 else 1e-12
    k = 0
    while k + 1 < u.size and abs(u[k + 1] - m) <= thr:
        k += 1
    return k if abs(u[0] - m) <= thr else 0


def convexity_certificate(u: DiscreteProfile, tol: float = 1e-8) -> ConvexityCertificate:
    """Check that the radial extension ``x -> u(|x|)`` is convex.

    The second differences include the reflection across the origin, which
    requires a non-negative first slope.
    """
    vals = u.u
    k = _plateau_end(vals)
    s = u.slopes
    slope_monotone = bool(np.all(np.diff(s[k:]) >= -tol)) if s.size > k else True
    h = u.dr
    d2 = np.diff(s) / (0.5 * (h[1:] + h[:-1]))
    origin = 2 * s[0] / h[0]
    sd_min = float(min(origin, np.min(d2))) if d2.size else float(origin)
    passes = slope_monotone and sd_min >= -tol
    return ConvexityCertificate(float(u.grid[k]), sd_min, slope_monotone, float(np.min(vals)), passes, tol)


@dataclass
class MonotonicityCertificate:
    passes: bool
    min_lambda: float
    strictly_increasing: bool
    r0: float
    delta: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def p_monotonicity_certificate(
    prob: RadialProblem,
    pair: ELPair,
    delta: float = 0.5,
    tol: float = 1e-8,
    prereq_tol: float | None = 1e-6,
    floor: float = 1e-12,
) -> MonotonicityCertificate:
    """Sign of ``lambda = r p' - (N - 1 + delta) p`` and growth of ``r^(1-N) p``.

    ``p'`` on a cell is ``r'^(N-1) (p_{i+1} - p_i) / w_i`` and ``p`` at the
    midpoint is interpolated linearly in ``r^N``, so ``p = c r^N`` gives
    ``lambda = c r'^N (1 - delta)`` exactly.

    Raises:
        PrereqFailed: if ``h`` is not convex or the pair is not an EL pair
            within ``prereq_tol``.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if not prob.h.is_convex:
        raise PrereqFailed("h must be convex")
    if prereq_tol is not None:
        _require_residuals(prob, pair, "hg", prereq_tol)
    N = prob.N
    grid = np.asarray(pair.grid, dtype=float)
    mid = 0.5 * (grid[1:] + grid[:-1])
    w = cell_weights(grid, N)
    dp = mid ** (N - 1) * np.diff(pair.p) / w
    pm = momentum_mid(grid, pair.p, N)
    lam = mid * dp - (N - 1 + delta) * pm
    k = _plateau_end(pair.profile.u)
    ratio = mid ** (1 - N) * pm
    tail = ratio[k:]
    strict = bool(np.all(np.diff(tail) >= floor)) if tail.size > 1 else True
    lam_min = float(np.min(lam)) if lam.size else 0.0
    return MonotonicityCertificate(lam_min >= -tol and strict, lam_min, strict, float(grid[k]), float(delta))


@dataclass
class ExtremalityReport:
    P: np.ndarray
    max_distance: float
    grid_tol: float
    slopes_ok: bool
    original_value: float | None
    relaxed_value: float | None
    relative_gap: float | None
    values_ok: bool | None

    def to_dict(self) -> dict:
        return {
            "max_distance": self.max_distance,
            "grid_tol": self.grid_tol,
            "slopes_ok": self.slopes_ok,
            "original_value": self.original_value,
            "relaxed_value": self.relaxed_value,
            "relative_gap": self.relative_gap,
            "values_ok": self.values_ok,
            "P_size": int(len(self.P)),
        }


def _interp_raw(s_samples, v_samples, x):
    x = np.abs(np.asarray(x, dtype=float))
    out = np.interp(x, s_samples, v_samples)
    past = x > s_samples[-1]
    if np.any(past):
        slope = (v_samples[-1] - v_samples[-2]) / (s_samples[-1] - s_samples[-2])
        out[past] = v_samples[-1] + slope * (x[past] - s_samples[-1])
    return out


def extremality_check(
    g_samples,
    u: DiscreteProfile,
    prob: RadialProblem | None = None,
    r0: float | None = None,
    grid_tol: float | None = None,
    rel_tol: float = 1e-3,
) -> ExtremalityReport:
    """Distance of the slopes of a relaxed minimizer to the extremal set ``P``.

    With ``prob`` (whose ``g`` is the relaxation) the original and relaxed
    energies of ``u`` are compared as well.  The default ``grid_tol`` is twice
    the sampling step of ``g``.

    Raises:
        G0Violated: if the data and the envelope differ at 0.
    """
    s_samp = np.asarray(g_samples[0], dtype=float)
    v_samp = np.asarray(g_samples[1], dtype=float)
    env, P = convex_envelope(np.column_stack([s_samp, v_samp]))
    if abs(float(env(0.0)) - v_samp[0]) > 1e-12 * max(1.0, abs(v_samp[0])):
        raise G0Violated(f"g(0) = {v_samp[0]} differs from its envelope {float(env(0.0))}")
    if grid_tol is None:
        grid_tol = 2 * float(np.max(np.diff(s_samp)))
    if r0 is None:
        r0 = float(u.grid[_plateau_end(u.u)])
    sel = u.mid >= r0
    dist = P.distance(u.slopes[sel]) if np.any(sel) else np.zeros(0)
    dmax = float(np.max(dist)) if dist.size else 0.0
    orig = relaxed = gap = None
    values_ok = None
    if prob is not None:
        relaxed = frad_value(prob, u)
        w = cell_weights(u.grid, prob.N)
        s = np.abs(u.slopes)
        orig = relaxed + float(np.sum(w * (_interp_raw(s_samp, v_samp, s) - env(s))))
        gap = abs(orig - relaxed) / max(abs(relaxed), 1e-300)
        values_ok = bool(gap <= rel_tol or math.isclose(orig, relaxed, abs_tol=1e-14))
    return ExtremalityReport(P.P, dmax, float(grid_tol), dmax <= grid_tol, orig, relaxed, gap, values_ok)
