"""Polar-grid checks of radial symmetrization in the plane.

A BallFunction samples ``u`` on nodes ``(r_i, theta_j)`` of the disc of
radius ``R``.  Each angular column is a radial profile; its radial extension
is the directional radialization of ``u``.  The planar energy uses the same
exact-weight cells as the radial quadrature, so a column's radial extension
has energy exactly ``2 pi`` times the radial functional of that column.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, GridMismatch
from .problem import DiscreteProfile, RadialProblem, cell_weights, frad_value


@dataclass(frozen=True)
class BallFunction:
    """Samples ``values[i, j] = u(r_i, theta_j)`` on a uniform polar grid.

    Row 0 (the centre) must be constant and row ``n_r`` (the boundary) zero.
    """

    R: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 3:
            raise GridMismatch("values must have shape (n_r + 1, n_theta) with n_r >= 1, n_theta >= 3")
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.ptp(v[0]) > 1e-12 * scale:
            raise GridMismatch("u must be single-valued at the centre")
        if np.max(np.abs(v[-1])) > 1e-12 * scale:
            raise GridMismatch("u must vanish on the boundary")
        v = v.copy()
        v[0] = v[0].mean()
        v[-1] = 0.0
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, R: float, n_r: int, n_theta: int, fn: Callable) -> "BallFunction":
        r = np.linspace(0.0, R, n_r + 1)
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        rr, tt = np.meshgrid(r, th, indexing="ij")
        return cls(R, fn(rr, tt))

    @classmethod
    def from_csv(cls, path, R: float | None = None) -> "BallFunction":
        """Read ``r,theta,value`` rows written on a full polar grid."""
        with open(path, newline="") as fh:
            rows = [(float(a), float(b), float(c)) for a, b, c in csv.reader(_skip_header(fh))]
        arr = np.array(rows)
        r = np.unique(arr[:, 0])
        th = np.unique(arr[:, 1])
        vals = np.empty((r.size, th.size))
        vals[np.searchsorted(r, arr[:, 0]), np.searchsorted(th, arr[:, 1])] = arr[:, 2]
        return cls(R if R is not None else float(r[-1]), vals)

    @property
    def n_r(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n_theta(self) -> int:
        return self.values.shape[1]

    @property
    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.n_r + 1)

    @property
    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta


def _skip_header(fh):
    for line in fh:
        if line.strip() and not line[0].isalpha():
            yield line


def directional_profile(u: BallFunction, j: int) -> DiscreteProfile:
    """Radial slice ``r -> u(r, theta_j)``."""
    return DiscreteProfile.from_values(u.radii, u.values[:, j])


def _gradients(u: BallFunction):
    r = u.radii
    dr = np.diff(r)[:, None]
    mid = (0.5 * (r[1:] + r[:-1]))[:, None]
    dth = 2 * np.pi / u.n_theta
    v = u.values
    ur = (v[1:] - v[:-1]) / dr
    dtheta_nodes = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2 * dth)
    ut = 0.5 * (dtheta_nodes[1:] + dtheta_nodes[:-1]) / mid
    return ur, ut, mid[:, 0], dth


def functional_2d(p: RadialProblem, u: BallFunction) -> float:
    """Planar energy on the polar cells, with the same weights as the radial quadrature."""
    if p.N != 2:
        raise DimensionMismatch(f"planar energy needs N = 2, got N = {p.N}")
    if not math.isclose(u.R, p.R, rel_tol=1e-12):
        raise GridMismatch(f"ball radius {u.R} != problem radius {p.R}")
    ur, ut, mid, dth = _gradients(u)
    grad = np.hypot(ur, ut)
    w = cell_weights(u.radii, 2)[:, None]
    um = 0.5 * (u.values[1:] + u.values[:-1])
    rr = np.broadcast_to(mid[:, None], grad.shape)
    dens = p.g.value(rr, grad) + p.h.value(rr, um)
    if p.constrained and np.any(grad > p.mu_at(rr) * (1 + 1e-12)):
        return math.inf
    return float(np.sum(w * dens) * dth)


@dataclass
class SymmetrizationReport:
    F: float
    F_slices: np.ndarray
    mean: float
    best_index: int
    best_value: float
    spread: float
    mean_ok: bool
    exists_ok: bool
    strict_fraction: float
    tol: float

    def to_dict(self) -> dict:
        return {
            "F": self.F,
            "mean": self.mean,
            "best_index": self.best_index,
            "best_value": self.best_value,
            "spread": self.spread,
            "mean_ok": self.mean_ok,
            "exists_ok": self.exists_ok,
            "strict_fraction": self.strict_fraction,
            "tol": self.tol,
            "F_slices": [float(x) for x in self.F_slices],
        }


def symmetrization_report(p: RadialProblem, u: BallFunction, tol: float | None = None) -> SymmetrizationReport:
    """Compare ``F(u)`` with the energies of all directional radializations.

    ``strict_fraction`` is the area fraction of cells where the radial
    derivative is strictly smaller in size than the full gradient.
    """
    F = functional_2d(p, u)
    slices = np.array([2 * np.pi * frad_value(p, directional_profile(u, j)) for j in range(u.n_theta)])
    tol = 1e-10 * max(1.0, abs(F)) if tol is None else tol
    mean = float(np.mean(slices))
    j = int(np.argmin(slices))
    ur, ut, _, _ = _gradients(u)
    strict = np.abs(ur) < np.hypot(ur, ut) - 1e-12
    w = cell_weights(u.radii, 2)[:, None] * np.ones(strict.shape)
    frac = float(np.sum(w * strict) / np.sum(w))
    return SymmetrizationReport(
        F,
        slices,
        mean,
        j,
        float(slices[j]),
        float(np.ptp(slices)),
        bool(mean <= F + tol),
        bool(slices[j] <= F + tol),
        frac,
        float(tol),
    )
