"""Direct minimization of the discretized radial functional.

The unknowns are the cell slopes ``s``; node values follow by backward
accumulation from ``u(R) = 0``.  The energy splits into a separable convex
part ``sum_i w_i g(r_i', |s_i|)`` (handled by exact proximal maps) and the
coupling part ``sum_i w_i h(r_i', u_i')``.  Kinks of piecewise-affine ``h``
are mollified with a shrinking box kernel; the reported value is always the
exact discrete energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import convexfun as cf
from .convexfun import ConvexScalar
from .elsolve import rising_sun
from .errors import Infeasible, NonFinite, NotInPhiA, PreconditionFailed
from .problem import DiscreteProfile, RadialProblem, cell_weights, frad_value

INF = math.inf


@dataclass
class SolveOptions:
    """Settings of the proximal-gradient solver.

    Attributes:
        max_iter: Iteration cap per smoothing stage.
        tol: Stop a stage once the largest slope update is below
            ``tol * (1 + max|s|)``.
        restarts: Number of starting profiles (best result kept).
        seed: Seed of the random starting profiles.
        eta0: First smoothing width in ``u`` (``None``: scaled to the data).
        eta_min: Last smoothing width.
        eta_factor: Ratio between consecutive widths.
    """

    max_iter: int = 3000
    tol: float = 1e-10
    restarts: int = 4
    seed: int = 0
    eta0: float | None = None
    eta_min: float = 1e-9
    eta_factor: float = 0.1

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class MinimizeResult:
    profile: DiscreteProfile
    value: float
    start: int = 0
    values: list = field(default_factory=list)
    iterations: int = 0
    warnings: list = field(default_factory=list)

    def __iter__(self):
        yield self.profile
        yield self.value


class _Energy:
    """Cached geometry for one (problem, grid) pair."""

    def __init__(self, prob: RadialProblem, grid):
        self.prob = prob
        self.grid = np.asarray(grid, dtype=float)
        self.mid = 0.5 * (self.grid[1:] + self.grid[:-1])
        self.dr = np.diff(self.grid)
        self.w = cell_weights(self.grid, prob.N)
        self.mu = prob.mu_at(self.mid)
        self.smooth_h = not isinstance(getattr(prob.h.term, "knots", None), np.ndarray)

    def u_mid(self, s):
        incr = s * self.dr
        tail = np.cumsum(incr[::-1])[::-1]
        return -tail + 0.5 * incr

    def h_part(self, s, eta):
        um = self.u_mid(s)
        hv = self.prob.h.value_eta(self.mid, um, eta)
        hd = self.prob.h.grad_eta(self.mid, um, eta)
        val = float(np.sum(self.w * hv))
        wh = self.w * hd
        q = np.cumsum(wh) - 0.5 * wh
        return val, -self.dr * q

    def g_part(self, s):
        return float(np.sum(self.w * self.prob.g.value(self.mid, np.abs(s))))

    def prox(self, v, tau):
        x = self.prob.g.prox(self.mid, v, tau)
        return np.clip(x, -self.mu, self.mu)

    def exact(self, s):
        return frad_value(self.prob, DiscreteProfile(self.grid, s))


def _run_stage(E: _Energy, s, eta, opts: SolveOptions, tau=1.0):
    Hs, grad = E.h_part(s, eta)
    best_total, stale = INF, 0
    it = 0
    for it in range(1, opts.max_iter + 1):
        while True:
            v = s - tau * grad / E.w
            s_new = E.prox(v, tau)
            d = s_new - s
            Hn, grad_n = E.h_part(s_new, eta)
            bound = Hs + float(np.dot(grad, d)) + float(np.sum(E.w * d * d)) / (2 * tau)
            if Hn <= bound + 1e-15 * max(1.0, abs(Hs)) or tau < 1e-16:
                break
            tau *= 0.5
        s, Hs, grad = s_new, Hn, grad_n
        tau = min(2.0 * tau, 1e8)
        if float(np.max(np.abs(d))) <= opts.tol * (1.0 + float(np.max(np.abs(s)))):
            break
        total = Hs + E.g_part(s)
        if total < best_total - 1e-14 * max(1.0, abs(total)):
            best_total, stale = total, 0
        else:
            stale += 1
            if stale >= 100:
                break
    return s, tau, it


def _starts(E: _Energy, opts: SolveOptions):
    prob = E.prob
    n = E.mid.size
    sig = prob.sigma0 if math.isfinite(prob.sigma0) and prob.sigma0 > 0 else 1.0
    out = [np.zeros(n), np.full(n, sig), np.full(n, -sig)]
    rng = np.random.default_rng(opts.seed)
    while len(out) < opts.restarts:
        vals = np.cumsum(rng.normal(0.0, sig, n + 1) * np.append(E.dr, 0.0)[::-1])[::-1]
        prof = rising_sun(DiscreteProfile.from_values(E.grid, vals))
        out.append(np.clip(prof.slopes, -sig, sig))
    return [np.clip(s, -E.mu, E.mu) for s in out[: opts.restarts]]


def minimize(prob: RadialProblem, grid, opts: SolveOptions | None = None) -> MinimizeResult:
    """Minimize the discrete energy over slope vectors with multistarts.

    Each start runs a proximal-gradient method in the metric ``diag(w)``
    with backtracking, through a continuation in the smoothing width of
    ``h``.  The best exact energy over all iterates kept at stage ends wins;
    ties go to the earliest start.

    Raises:
        Infeasible: if the gradient constraint is not positive.
        NonFinite: if no start yields a finite energy.
    """
    opts = opts or SolveOptions()
    E = _Energy(prob, grid)
    if np.any(~(E.mu > 0)):
        raise Infeasible("gradient constraint must be positive")
    warnings = []
    if not prob.report.compatible:
        warnings.append("problem is not compatible (M0 >= M); minimizing anyway")
    if E.smooth_h:
        etas = [0.0]
    else:
        eta = opts.eta0 if opts.eta0 is not None else 1e-2 * max(1.0, prob.R)
        etas = []
        while eta > opts.eta_min * (1 + 1e-9):
            etas.append(eta)
            eta *= opts.eta_factor
        etas.append(opts.eta_min)
    best = None
    values = []
    total = 0
    for k, s in enumerate(_starts(E, opts)):
        tau = 1.0
        cur_best, cur_val = s.copy(), E.exact(s)
        for eta in etas:
            s, tau, it = _run_stage(E, s, eta, opts, tau)
            total += it
            val = E.exact(s)
            if val < cur_val:
                cur_best, cur_val = s.copy(), val
        values.append(cur_val)
        if math.isfinite(cur_val) and (best is None or cur_val < best[1]):
            best = (cur_best, cur_val, k)
    if best is None:
        raise NonFinite("energy is +inf at every start")
    prof = DiscreteProfile(E.grid, best[0])
    return MinimizeResult(prof, best[1], best[2], values, total, warnings)


# --------------------------------------------------------------------------
# superlinear perturbations


def perturb(prob: RadialProblem, lam: float, phi: ConvexScalar, a: float | None = None) -> RadialProblem:
    """Problem with ``g + lam * phi`` in place of ``g``.

    Raises:
        NotInPhiA: if ``phi`` is not zero on ``[0, a]``, convex,
            non-decreasing and superlinear.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if lam == 0:
        return prob
    a = phi.flat_until if a is None else float(a)
    fails = cf.in_phi_a(phi, a)
    if fails:
        raise NotInPhiA(f"phi fails: {', '.join(fails)}")
    g = prob.g.with_extra(cf.scale(phi, lam))
    out = prob.with_g(g)
    out.name = f"{prob.name}+{lam:g}phi"
    return out


@dataclass
class PerturbationReport:
    lambdas: list
    values: list
    unperturbed_values: list
    max_slopes: list
    distances: list
    spread: float
    independent: bool
    slopes_within_a: bool
    a: float
    sigma0: float

    def to_dict(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "values": list(self.values),
            "unperturbed_values": list(self.unperturbed_values),
            "max_slopes": list(self.max_slopes),
            "distances": list(self.distances),
            "spread": self.spread,
            "independent": self.independent,
            "slopes_within_a": self.slopes_within_a,
            "a": self.a,
            "sigma0": self.sigma0,
        }


def perturbation_sweep(
    prob: RadialProblem,
    lambdas,
    a: float,
    grid,
    opts: SolveOptions | None = None,
    phi: ConvexScalar | None = None,
    rel_tol: float = 1e-3,
) -> PerturbationReport:
    """Minimize ``F + lam int r^(N-1) phi_a(|u'|)`` for each ``lam`` and compare.

    Raises:
        PreconditionFailed: if ``a <= sigma0``.
    """
    sigma0 = prob.sigma0
    if not a > sigma0:
        raise PreconditionFailed(f"a={a} must exceed sigma0={sigma0}")
    phi_a = cf.build_phi_a(phi or cf.Power(1.0, 2.0), a)
    vals, plain, smax, profs = [], [], [], []
    for lam in lambdas:
        pp = perturb(prob, float(lam), phi_a, a)
        res = minimize(pp, grid, opts)
        vals.append(res.value)
        plain.append(frad_value(prob, res.profile))
        smax.append(float(np.max(np.abs(res.profile.slopes))))
        profs.append(res.profile.u)
    dist = [float(np.max(np.abs(u - profs[0]))) for u in profs]
    scale = max(abs(v) for v in vals) if vals else 1.0
    spread = (max(vals) - min(vals)) / scale if scale > 0 else 0.0
    return PerturbationReport(
        [float(x) for x in lambdas],
        vals,
        plain,
        smax,
        dist,
        float(spread),
        bool(spread <= rel_tol),
        bool(all(m <= a for m in smax)),
        float(a),
        float(sigma0),
    )
