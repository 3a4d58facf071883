"""Independent brute-force oracles used by the test-suite.

The quantized search restricts cell slopes to ``k * delta / dr`` with
``|k| <= K``.  On a uniform grid node values then live on the lattice
``delta * Z`` and the discrete energy is a sum of per-cell terms that depend
only on the right node value and the cell slope, so a backward dynamic
programme over lattice states finds the exact minimum over all
``(2K + 1)^n`` slope vectors.
"""

import itertools

import numpy as np

from radvar.problem import DiscreteProfile, cell_weights, frad_value


def _cell_cost(prob, grid, i, u_right, s):
    r0, r1 = grid[i], grid[i + 1]
    mid = 0.5 * (r0 + r1)
    dr = r1 - r0
    w = (r1**prob.N - r0**prob.N) / prob.N
    um = u_right - 0.5 * s * dr
    a = np.abs(s)
    g = prob.g.value(np.full(a.shape, mid), a)
    if prob.constrained:
        g = np.where(a > prob.mu_at(mid) * (1 + 1e-12), np.inf, g)
    return w * (g + prob.h.value(np.full(a.shape, mid), um))


def quantized_minimum(prob, grid, s_max, K=15):
    """Exact minimum of the discrete energy over lattice slope vectors.

    Returns ``(value, slopes)``.
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size - 1
    dr = np.diff(grid)
    if not np.allclose(dr, dr[0]):
        raise ValueError("quantized oracle needs a uniform grid")
    dr = float(dr[0])
    delta = s_max * dr / K
    ks = np.arange(-K, K + 1)
    slopes = ks * delta / dr
    # state j <-> u = j * delta, j in [-K n, K n]; start from u_n = 0
    offset = K * n
    size = 2 * K * n + 1
    cost = np.full(size, np.inf)
    cost[offset] = 0.0
    choice = np.zeros((n, size), dtype=int)
    for i in range(n - 1, -1, -1):
        new = np.full(size, np.inf)
        live = np.nonzero(np.isfinite(cost))[0]
        for j in live:
            u_right = (j - offset) * delta
            c = cost[j] + _cell_cost(prob, grid, i, u_right, slopes)
            tgt = j - ks  # u_left = u_right - s dr
            better = c < new[tgt]
            new[tgt[better]] = c[better]
            choice[i, tgt[better]] = ks[better]
        cost = new
    j = int(np.argmin(cost))
    best = float(cost[j])
    out = np.zeros(n)
    for i in range(n):
        k = choice[i, j]
        out[i] = k * delta / dr
        j = j + k
    return best, out


def enumerate_minimum(prob, grid, s_max, K=15):
    """Literal enumeration of all lattice slope vectors (small ``n`` only)."""
    grid = np.asarray(grid, dtype=float)
    n = grid.size - 1
    dr = float(grid[1] - grid[0])
    vals = np.arange(-K, K + 1) * (s_max * dr / K) / dr
    best, arg = np.inf, None
    for combo in itertools.product(vals, repeat=n):
        v = frad_value(prob, DiscreteProfile(grid, np.array(combo)))
        if v < best:
            best, arg = v, np.array(combo)
    return best, arg


def round_to_lattice(slopes, s_max, K=15):
    step = s_max / K
    return np.clip(np.round(np.asarray(slopes) / step), -K, K) * step


__all__ = ["cell_weights", "enumerate_minimum", "quantized_minimum", "round_to_lattice"]
