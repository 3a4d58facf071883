"""Exact one-dimensional convex analysis on the half line.

Every function here lives on ``[0, inf)`` and is queried through its even
extension ``z -> f(|z|)``.  Piecewise-linear functions are the canonical
representation: their conjugates, subgradients and proximal maps are exact.
Closed-form catalog entries (powers, ``s log(1+s)``) carry their own formulas;
anything else falls back to vectorized bisection on one-sided derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadDomain,
    DegenerateG,
    InconsistentParams,
    NonConvexData,
    NotSuperlinear,
    OutsideDomain,
    OutsideDualDomain,
    RatioUnreachable,
    TooFewSamples,
)

INF = math.inf
CONVEXITY_TOL = 1e-12

__all__ = [
    "Interval",
    "ConvexScalar",
    "PiecewiseLinear",
    "Power",
    "XLog",
    "Restricted",
    "Shifted",
    "Scaled",
    "Sum",
    "PhiA",
    "Glued",
    "NumericConjugate",
    "ExtremalSet",
    "NagumoFunction",
    "GluingParams",
    "make_pwl",
    "subgradient",
    "conjugate",
    "inverse_subgradient",
    "convex_envelope",
    "nagumo_from_g",
    "ratio_root",
    "build_phi_a",
    "in_phi_a",
    "build_glued",
    "scale",
    "shift",
    "function_from_spec",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval of extended reals; ``lo > hi`` encodes the empty set."""

    lo: float
    hi: float

    @classmethod
    def empty(cls) -> "Interval":
        return cls(INF, -INF)

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return not self.is_empty and self.lo - tol <= x <= self.hi + tol

    def distance(self, x: float) -> float:
        if self.is_empty:
            return INF
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0

    def select(self, rule: str = "mid") -> float:
        if self.is_empty:
            raise ValueError("cannot select from an empty interval")
        if rule == "min":
            return self.lo
        if rule == "max":
            return self.hi
        if math.isinf(self.lo) and math.isinf(self.hi):
            return 0.0
        if math.isinf(self.hi):
            return self.lo
        if math.isinf(self.lo):
            return self.hi
        return 0.5 * (self.lo + self.hi)

    def negate(self) -> "Interval":
        return self if self.is_empty else Interval(-self.hi, -self.lo)

    def scale(self, c: float) -> "Interval":
        if c < 0:
            return self.negate().scale(-c)
        if self.is_empty:
            return self
        lo = 0.0 if c == 0 and math.isinf(self.lo) else c * self.lo
        hi = 0.0 if c == 0 and math.isinf(self.hi) else c * self.hi
        return Interval(lo, hi)

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _bisect_first(pred: Callable[[np.ndarray], np.ndarray], lo, hi, iters=200):
    """Smallest x in [lo, hi] with pred(x) true, for a monotone predicate.

    ``pred(hi)`` must hold elementwise.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = pred(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if np.all(hi - lo <= 4e-16 * np.abs(hi) + 1e-300):
            break
    return hi


class ConvexScalar:
    """Closed convex non-decreasing function on ``[0, inf)``, evaluated evenly.

    Subclasses implement ``_value``, ``_dright`` and ``_dleft`` on the
    non-negative part of the domain and ``asymptotic_slope``.
    """

    label: str = ""
    domain_end: float = INF
    flat_until: float = 0.0

    # -- hooks -------------------------------------------------------------
    def _value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dright(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dleft(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def asymptotic_slope(self) -> float:
        raise NotImplementedError

    # -- evaluation --------------------------------------------------------
    def __call__(self, s):
        a = np.abs(_arr(s))
        out = np.full(a.shape, INF)
        ok = a <= self.domain_end
        if np.any(ok):
            out[ok] = self._value(a[ok])
        return out if out.ndim else float(out)

    def dright(self, x):
        """Right derivative at ``x >= 0`` (``+inf`` at a finite domain end)."""
        x = _arr(x)
        out = np.full(x.shape, INF)
        inside = x < self.domain_end
        if np.any(inside):
            out[inside] = self._dright(x[inside])
        return out if out.ndim else float(out)

    def dleft(self, x):
        """Left derivative at ``x >= 0``; at 0 it mirrors the right derivative."""
        x = _arr(x)
        out = np.full(x.shape, np.nan)
        zero = x == 0
        pos = (x > 0) & (x <= self.domain_end)
        if np.any(zero):
            out[zero] = -self.dright(np.zeros(int(zero.sum())))
        if np.any(pos):
            out[pos] = self._dleft(x[pos])
        return out if out.ndim else float(out)

    def subgradient(self, x: float) -> Interval:
        a = abs(float(x))
        if a > self.domain_end:
            raise OutsideDomain(f"{self.label or type(self).__name__}: x={x} beyond domain end {self.domain_end}")
        if a == 0.0:
            d = float(self.dright(0.0))
            return Interval(-d, d)
        iv = Interval(float(self.dleft(a)), float(self.dright(a)))
        return iv if x > 0 else iv.negate()

    # -- duality -----------------------------------------------------------
    def _inverse(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Elementwise ``{x >= 0 : q in df(x)}`` as (lo, hi); NaN outside Dom f*."""
        q = np.abs(_arr(q))
        D = self.domain_end
        lo = np.full(q.shape, np.nan)
        hi = np.full(q.shape, np.nan)
        # lower end: first x with f'_+(x) >= q
        at0 = self.dright(np.zeros(q.shape)) >= q
        lo[at0] = 0.0
        todo = ~at0
        if np.any(todo):
            qq = q[todo]
            b = np.ones(qq.shape)
            if math.isfinite(D):
                b = np.full(qq.shape, D)
            else:
                for _ in range(1100):
                    need = self.dright(b) < qq
                    if not np.any(need) or np.all(b[need] > 1e300):
                        break
                    b = np.where(need, b * 2.0, b)
            found = self.dright(b) >= qq
            res = np.full(qq.shape, np.nan)
            if np.any(found):
                qf = qq[found]
                res[found] = _bisect_first(lambda x: self.dright(x) >= qf, np.zeros(qf.shape), b[found])
            lo[todo] = res
        # upper end: sup of x with f'_-(x) <= q
        valid = ~np.isnan(lo)
        if np.any(valid):
            qq = q[valid]
            res = np.full(qq.shape, np.nan)
            b = np.maximum(lo[valid], 1.0)
            if math.isfinite(D):
                b = np.full(qq.shape, D)
                cap = self.dleft(b) <= qq
                res[cap] = D
            else:
                cap = np.zeros(qq.shape, dtype=bool)
                for _ in range(1100):
                    need = self.dleft(b) <= qq
                    if not np.any(need):
                        break
                    big = need & (b > 1e300)
                    cap |= big
                    if np.all(big[need]):
                        break
                    b = np.where(need & ~big, b * 2.0, b)
                res[cap] = INF
            rest = ~cap
            if np.any(rest):
                qr = qq[rest]
                res[rest] = _bisect_first(lambda x: self.dleft(x) > qr, lo[valid][rest], b[rest])
            hi[valid] = res
        return lo, hi

    def inverse_subgradient(self, p: float) -> Interval:
        lo, hi = self._inverse(np.array([abs(float(p))]))
        if np.isnan(lo[0]):
            raise OutsideDualDomain(f"p={p} outside the domain of the conjugate")
        return Interval(float(lo[0]), float(hi[0]))

    def conjugate(self) -> "ConvexScalar":
        return NumericConjugate(self)

    # -- proximal map ------------------------------------------------------
    def prox(self, v, t):
        """argmin_x t f(|x|) + (x - v)^2 / 2, elementwise."""
        v, t = np.broadcast_arrays(_arr(v), _arr(t))
        a = np.abs(v)
        x = np.zeros(a.shape)
        move = a > t * self.dright(np.zeros(a.shape))
        if np.any(move):
            am, tm = a[move], t[move]
            hi = np.minimum(am, self.domain_end)
            x[move] = _bisect_first(lambda y: y + tm * self.dright(y) >= am, np.zeros(am.shape), hi)
        return np.sign(v) * x

    # -- helpers -----------------------------------------------------------
    def restrict(self, end: float) -> "ConvexScalar":
        return Restricted(self, end)

    def to_pwl(self, s_max: float, n: int = 2001) -> "PiecewiseLinear":
        s = np.linspace(0.0, min(s_max, self.domain_end), n)
        return make_pwl(s, self(s), None if math.isinf(self.domain_end) else s[-1])

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label})"


def _canonical(b, v, sl, tail):
    b, v, sl = list(b), list(v), list(sl)
    k = 0
    while k < len(sl):
        if b[k + 1] == b[k]:
            del b[k + 1], v[k + 1], sl[k]
        else:
            k += 1
    k = 1
    while k < len(sl):
        if sl[k] == sl[k - 1]:
            del b[k], v[k], sl[k]
        else:
            k += 1
    if tail is not None and sl and sl[-1] == tail:
        del b[-1], v[-1], sl[-1]
    return b, v, sl, tail


class PiecewiseLinear(ConvexScalar):
    """Continuous convex piecewise-linear function.

    Stored as breakpoints ``b[0]=0 < ... < b[K]`` with values, the K segment
    slopes, and a tail: a finite slope continuing past ``b[K]``, or ``None``
    meaning the function is ``+inf`` beyond ``b[K]``.
    """

    def __init__(self, breaks, values, slopes, tail, label: str = "pwl"):
        b, v, sl, tail = _canonical(breaks, values, slopes, tail)
        self.breaks = np.array(b, dtype=float)
        self.values = np.array(v, dtype=float)
        self.slopes = np.array(sl, dtype=float)
        self.tail = None if tail is None else float(tail)
        self.label = label
        self.domain_end = INF if self.tail is not None else float(self.breaks[-1])
        self._all = np.append(self.slopes, INF if self.tail is None else self.tail)

    @property
    def asymptotic_slope(self) -> float:
        return INF if self.tail is None else self.tail

    def _value(self, x):
        out = np.interp(x, self.breaks, self.values)
        if self.tail is not None:
            past = x > self.breaks[-1]
            out = np.where(past, self.values[-1] + self.tail * (x - self.breaks[-1]), out)
        return out

    def _dright(self, x):
        return self._all[np.searchsorted(self.breaks, x, "right") - 1]

    def _dleft(self, x):
        return self._all[np.searchsorted(self.breaks, x, "left") - 1]

    def _inverse(self, q):
        q = np.abs(_arr(q))
        A = self._all
        ext = np.append(self.breaks, INF)
        klo = np.searchsorted(A, q, "left")
        khi = np.searchsorted(A, q, "right") - 1
        outside = klo >= len(A)
        lo = self.breaks[np.minimum(klo, len(self.breaks) - 1)].astype(float)
        hi = np.where(khi >= 0, ext[np.maximum(khi, 0) + 1], 0.0)
        lo = np.where(outside, np.nan, lo)
        hi = np.where(outside, np.nan, hi)
        return lo, hi

    def prox(self, v, t):
        v, t = np.broadcast_arrays(_arr(v), _arr(t))
        shape = v.shape
        a, t = np.abs(v).ravel(), t.ravel()
        K = len(self.slopes)
        if K:
            thr = self.breaks[1:][None, :] + t[:, None] * self.slopes[None, :]
            k = (a[:, None] > thr).sum(axis=1)
        else:
            k = np.zeros(a.shape, dtype=int)
        Ak = self._all[k]
        bk = self.breaks[k]
        with np.errstate(invalid="ignore"):
            x = np.where(np.isinf(Ak), bk, np.maximum(a - t * np.where(np.isinf(Ak), 0.0, Ak), bk))
        return (np.sign(v).ravel() * x).reshape(shape)

    def conjugate(self) -> "PiecewiseLinear":
        b, v, sl, tail = self.breaks, self.values, self.slopes, self.tail
        K = len(sl)
        nb = [0.0] + [float(s) for s in sl]
        nv = [-float(v[0])] + [float(sl[k] * b[k + 1] - v[k + 1]) for k in range(K)]
        nsl = [float(x) for x in b[:K]]
        if tail is not None:
            nb.append(tail)
            nv.append(float(tail * b[K] - v[K]))
            nsl.append(float(b[K]))
            ntail = None
        else:
            ntail = float(b[K])
        return PiecewiseLinear(nb, nv, nsl, ntail, label=f"({self.label})*")

    def restrict(self, end: float) -> "PiecewiseLinear":
        end = float(end)
        if end >= self.domain_end:
            return self
        keep = self.breaks < end
        b = list(self.breaks[keep]) + [end]
        v = list(self.values[keep]) + [float(self(end))]
        sl = list(self.slopes[: int(keep.sum()) - 1]) + [float(self._dright(np.array([b[-2]]))[0])]
        return PiecewiseLinear(b, v, sl, None, label=self.label)

    def allclose(self, other: "PiecewiseLinear", tol: float = 1e-12) -> bool:
        if len(self.breaks) != len(other.breaks):
            return False
        if (self.tail is None) != (other.tail is None):
            return False
        if self.tail is not None and abs(self.tail - other.tail) > tol:
            return False
        return bool(
            np.all(np.abs(self.breaks - other.breaks) <= tol)
            and np.all(np.abs(self.values - other.values) <= tol)
        )

    def __repr__(self) -> str:
        return (
            f"PiecewiseLinear(breaks={self.breaks.tolist()}, values={self.values.tolist()}, "
            f"tail={self.tail})"
        )


def make_pwl(breakpoints, values, domain_end=None, label: str = "pwl") -> PiecewiseLinear:
    """Validated convex piecewise-linear function through the given points.

    With ``domain_end=None`` the last slope continues to infinity; a finite
    ``domain_end`` extends the last slope up to it and sets ``+inf`` beyond.
    """
    b = _arr(breakpoints).ravel()
    v = _arr(values).ravel()
    if b.size == 0 or b.size != v.size:
        raise NonConvexData("breakpoints and values must be non-empty and of equal length")
    if b[0] != 0.0:
        raise NonConvexData("breakpoints must start at 0")
    if np.any(np.diff(b) <= 0):
        raise NonConvexData("breakpoints must be strictly increasing")
    if not np.all(np.isfinite(v)):
        raise NonConvexData("values must be finite")
    sl = np.diff(v) / np.diff(b)
    if sl.size and sl[0] < -CONVEXITY_TOL:
        raise NonConvexData(f"first slope {sl[0]} < 0: even extension is not convex")
    if sl.size > 1 and np.any(np.diff(sl) < -CONVEXITY_TOL):
        k = int(np.argmin(np.diff(sl)))
        raise NonConvexData(f"slopes decrease at breakpoint {b[k + 1]} ({sl[k]} -> {sl[k + 1]})")
    bl, vl, sll = list(b), list(v), list(sl)
    k = 1
    while k < len(sll):
        if abs(sll[k] - sll[k - 1]) <= CONVEXITY_TOL:
            del bl[k], vl[k], sll[k]
            sll[k - 1] = (vl[k] - vl[k - 1]) / (bl[k] - bl[k - 1])
        else:
            k += 1
    sll = list(np.maximum.accumulate(np.maximum(np.array(sll, dtype=float), 0.0))) if sll else []
    if domain_end is None:
        tail = sll[-1] if sll else 0.0
        return PiecewiseLinear(bl, vl, sll, tail, label=label)
    D = float(domain_end)
    if D < bl[-1]:
        raise BadDomain(f"domain_end {D} < last breakpoint {bl[-1]}")
    if D > bl[-1]:
        last = sll[-1] if sll else 0.0
        vl.append(vl[-1] + last * (D - bl[-1]))
        bl.append(D)
        sll.append(last)
    return PiecewiseLinear(bl, vl, sll, None, label=label)


class Power(ConvexScalar):
    """``coef * s**exp`` with ``exp >= 1``."""

    def __init__(self, coef: float, exp: float, label: str | None = None):
        if coef <= 0 or exp < 1:
            raise NonConvexData("power needs coef > 0 and exp >= 1")
        self.coef = float(coef)
        self.exp = float(exp)
        self.label = label or (f"{coef:g}|s|" if exp == 1 else f"{coef:g}s^{exp:g}")

    @property
    def asymptotic_slope(self) -> float:
        return self.coef if self.exp == 1 else INF

    def _value(self, x):
        return self.coef * x**self.exp

    def _dright(self, x):
        if self.exp == 1:
            return np.full(np.shape(x), self.coef)
        return self.coef * self.exp * x ** (self.exp - 1)

    _dleft = _dright

    def _inverse(self, q):
        q = np.abs(_arr(q))
        if self.exp == 1:
            lo = np.where(q <= self.coef, 0.0, np.nan)
            hi = np.where(q < self.coef, 0.0, np.where(q == self.coef, INF, np.nan))
            return lo, hi
        x = (q / (self.coef * self.exp)) ** (1.0 / (self.exp - 1.0))
        return x, x.copy()

    def prox(self, v, t):
        v, t = np.broadcast_arrays(_arr(v), _arr(t))
        if self.exp == 1:
            return np.sign(v) * np.maximum(np.abs(v) - t * self.coef, 0.0)
        if self.exp == 2:
            return v / (1.0 + 2.0 * self.coef * t)
        return super().prox(v, t)

    def conjugate(self) -> ConvexScalar:
        if self.exp == 1:
            return PiecewiseLinear([0.0, self.coef], [0.0, 0.0], [0.0], None, label=f"({self.label})*")
        q = self.exp
        c = (1.0 - 1.0 / q) * (self.coef * q) ** (-1.0 / (q - 1.0))
        return Power(c, q / (q - 1.0), label=f"({self.label})*")


class XLog(ConvexScalar):
    """``coef * s * log(1 + s)``: convex, superlinear, zero at 0."""

    def __init__(self, coef: float = 1.0):
        self.coef = float(coef)
        self.label = f"{coef:g}s log(1+s)"

    asymptotic_slope = INF

    def _value(self, x):
        return self.coef * x * np.log1p(x)

    def _dright(self, x):
        return self.coef * (np.log1p(x) + x / (1.0 + x))

    _dleft = _dright


class Restricted(ConvexScalar):
    """``base + indicator[0, end]``."""

    def __init__(self, base: ConvexScalar, end: float):
        self.base = base
        self.domain_end = min(float(end), base.domain_end)
        self.label = f"{base.label}+1[0,{self.domain_end:g}]"

    asymptotic_slope = INF

    def _value(self, x):
        return self.base._value(x)

    def _dright(self, x):
        return self.base._dright(x)

    def _dleft(self, x):
        return self.base._dleft(x)

    def _inverse(self, q):
        lo, hi = self.base._inverse(q)
        D = self.domain_end
        lo = np.where(np.isnan(lo), D, np.minimum(lo, D))
        hi = np.where(np.isnan(hi), D, np.minimum(hi, D))
        return lo, hi

    def prox(self, v, t):
        x = self.base.prox(v, t)
        return np.clip(x, -self.domain_end, self.domain_end)


class Shifted(ConvexScalar):
    """``base + c``."""

    def __init__(self, base: ConvexScalar, c: float):
        self.base = base
        self.c = float(c)
        self.domain_end = base.domain_end
        self.flat_until = base.flat_until
        self.label = f"{base.label}{self.c:+g}"

    @property
    def asymptotic_slope(self):
        return self.base.asymptotic_slope

    def _value(self, x):
        return self.base._value(x) + self.c

    def _dright(self, x):
        return self.base._dright(x)

    def _dleft(self, x):
        return self.base._dleft(x)

    def _inverse(self, q):
        return self.base._inverse(q)

    def prox(self, v, t):
        return self.base.prox(v, t)

    def conjugate(self):
        return Shifted(self.base.conjugate(), -self.c)


class Scaled(ConvexScalar):
    """``c * base`` with ``c > 0``."""

    def __init__(self, base: ConvexScalar, c: float):
        self.base = base
        self.c = float(c)
        self.domain_end = base.domain_end
        self.flat_until = base.flat_until
        self.label = f"{self.c:g}*({base.label})"

    @property
    def asymptotic_slope(self):
        return self.c * self.base.asymptotic_slope

    def _value(self, x):
        return self.c * self.base._value(x)

    def _dright(self, x):
        return self.c * self.base._dright(x)

    def _dleft(self, x):
        return self.c * self.base._dleft(x)

    def _inverse(self, q):
        return self.base._inverse(np.abs(_arr(q)) / self.c)

    def prox(self, v, t):
        return self.base.prox(v, self.c * _arr(t))


def scale(f: ConvexScalar, c: float) -> ConvexScalar:
    c = float(c)
    if c <= 0:
        raise NonConvexData("scale factor must be positive")
    if c == 1.0:
        return f
    if isinstance(f, Power):
        return Power(c * f.coef, f.exp)
    if isinstance(f, PiecewiseLinear):
        return PiecewiseLinear(
            f.breaks, c * f.values, c * f.slopes, None if f.tail is None else c * f.tail, label=f"{c:g}*({f.label})"
        )
    if isinstance(f, Shifted):
        return Shifted(scale(f.base, c), c * f.c)
    if isinstance(f, Scaled):
        return Scaled(f.base, c * f.c)
    return Scaled(f, c)


def shift(f: ConvexScalar, c: float) -> ConvexScalar:
    if c == 0:
        return f
    if isinstance(f, PiecewiseLinear):
        return PiecewiseLinear(f.breaks, f.values + c, f.slopes, f.tail, label=f.label)
    if isinstance(f, Shifted):
        return Shifted(f.base, f.c + c)
    return Shifted(f, c)


class Sum(ConvexScalar):
    """Sum of convex scalars."""

    def __init__(self, terms: Sequence[ConvexScalar]):
        self.terms = list(terms)
        self.domain_end = min(t.domain_end for t in self.terms)
        self.flat_until = min(t.flat_until for t in self.terms)
        self.label = " + ".join(t.label for t in self.terms)

    @property
    def asymptotic_slope(self):
        if math.isfinite(self.domain_end):
            return INF
        return float(sum(t.asymptotic_slope for t in self.terms))

    def _value(self, x):
        return sum(t._value(x) for t in self.terms)

    def _dright(self, x):
        return sum(t.dright(x) for t in self.terms)

    def _dleft(self, x):
        return sum(t.dleft(x) for t in self.terms)

    def prox(self, v, t):
        flat = [f for f in self.terms if f.flat_until > 0]
        rest = [f for f in self.terms if f.flat_until <= 0]
        if not flat or not rest:
            return super().prox(v, t)
        a_min = min(f.flat_until for f in flat)
        core = rest[0] if len(rest) == 1 else Sum(rest)
        v, t = np.broadcast_arrays(_arr(v), _arr(t))
        x = np.array(core.prox(v, t), dtype=float)
        big = np.abs(x) > a_min
        if np.any(big):
            x[big] = ConvexScalar.prox(self, v[big], t[big])
        return x


class PhiA(ConvexScalar):
    """``max(phi - phi(a), 0)`` for non-decreasing ``phi``: zero on ``[0, a]``."""

    def __init__(self, phi: ConvexScalar, a: float):
        self.phi = phi
        self.a = float(a)
        self.phi_a = float(phi(self.a))
        self.domain_end = phi.domain_end
        self.flat_until = self.a
        self.label = f"[({phi.label})_{self.a:g}]"

    @property
    def asymptotic_slope(self):
        return self.phi.asymptotic_slope

    def _value(self, x):
        return np.where(x <= self.a, 0.0, self.phi._value(x) - self.phi_a)

    def _dright(self, x):
        return np.where(x < self.a, 0.0, self.phi._dright(x))

    def _dleft(self, x):
        return np.where(x <= self.a, 0.0, self.phi._dleft(x))


class Glued(ConvexScalar):
    """``g`` up to ``sigma_hat``, then tangent line of slope ``slope`` plus ``phi_zeta``."""

    def __init__(self, g: ConvexScalar, sigma_hat: float, slope: float, phi_zeta: ConvexScalar):
        self.g = g
        self.sigma_hat = float(sigma_hat)
        self.slope = float(slope)
        self.phi_zeta = phi_zeta
        self.g_hat = float(g(self.sigma_hat))
        self.domain_end = phi_zeta.domain_end
        self.label = f"glued({g.label})"

    @property
    def asymptotic_slope(self):
        return self.slope + self.phi_zeta.asymptotic_slope

    def tangent(self, s):
        return self.g_hat + self.slope * (_arr(s) - self.sigma_hat)

    def _value(self, x):
        below = x <= self.sigma_hat
        xb = np.minimum(x, self.sigma_hat)
        return np.where(below, self.g._value(xb), self.tangent(x) + self.phi_zeta._value(x))

    def _dright(self, x):
        xb = np.minimum(x, self.sigma_hat)
        return np.where(x < self.sigma_hat, self.g.dright(xb), self.slope + self.phi_zeta.dright(x))

    def _dleft(self, x):
        xb = np.minimum(x, self.sigma_hat)
        return np.where(x <= self.sigma_hat, self.g.dleft(xb), self.slope + self.phi_zeta.dleft(x))


class NumericConjugate(ConvexScalar):
    """Conjugate evaluated through the inverse subgradient of the primal."""

    def __init__(self, f: ConvexScalar):
        self.f = f
        self.label = f"({f.label})*"
        if math.isfinite(f.domain_end):
            self.domain_end = INF
        else:
            M = f.asymptotic_slope
            self.domain_end = M
            if math.isfinite(M) and np.isnan(f._inverse(np.array([M]))[0][0]):
                # open dual domain: treat the endpoint as just outside
                self.domain_end = float(np.nextafter(M, 0.0))

    @property
    def asymptotic_slope(self):
        return self.f.domain_end

    def _value(self, p):
        x, _ = self.f._inverse(p)
        return p * x - self.f._value(x)

    def _dright(self, p):
        return self.f._inverse(p)[1]

    def _dleft(self, p):
        return self.f._inverse(p)[0]

    def _inverse(self, x):
        x = np.abs(_arr(x))
        lo = np.full(x.shape, np.nan)
        hi = np.full(x.shape, np.nan)
        ok = x <= self.f.domain_end
        lo[ok] = np.maximum(self.f.dleft(x[ok]), 0.0)
        hi[ok] = self.f.dright(x[ok])
        return lo, hi

    def conjugate(self):
        return self.f


# -- module-level operations ------------------------------------------------


def subgradient(f: ConvexScalar, x: float) -> Interval:
    """``[f'_-(x), f'_+(x)]`` for the even extension of ``f``."""
    return f.subgradient(x)


def conjugate(f: ConvexScalar) -> ConvexScalar:
    """Legendre-Fenchel conjugate of ``z -> f(|z|)``."""
    return f.conjugate()


def inverse_subgradient(f: ConvexScalar, p: float) -> Interval:
    """``{x >= 0 : |p| in df(x)}``, i.e. the non-negative part of ``df*(p)``."""
    return f.inverse_subgradient(p)


@dataclass(frozen=True)
class ExtremalSet:
    """Abscissae of the extreme points of the epigraph of a convex envelope."""

    P: np.ndarray

    def distance(self, x):
        x = np.abs(_arr(x))
        P = np.asarray(self.P, dtype=float)
        idx = np.clip(np.searchsorted(P, x), 1, len(P) - 1) if len(P) > 1 else np.zeros(x.shape, int)
        d = np.abs(x - P[idx])
        if len(P) > 1:
            d = np.minimum(d, np.abs(x - P[idx - 1]))
        return d


def _lower_hull(s: np.ndarray, v: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(len(s)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (s[a] - s[o]) * (v[i] - v[o]) - (v[a] - v[o]) * (s[i] - s[o])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def convex_envelope(samples) -> tuple[PiecewiseLinear, ExtremalSet]:
    """Convex envelope ``g**`` of sampled data and its extremal abscissae.

    ``samples`` is a sequence of ``(s, value)`` pairs with ``s`` strictly
    increasing from 0.  The envelope is the lower convex hull, flattened to its
    minimum near the origin so that the even extension stays convex; its last
    hull slope continues to infinity.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise TooFewSamples("need at least two samples")
    s, v = pts[:, 0], pts[:, 1]
    if s[0] != 0.0 or np.any(np.diff(s) <= 0):
        raise NonConvexData("sample abscissae must be strictly increasing from 0")
    idx = _lower_hull(s, v)
    hs, hv = s[idx], v[idx]
    k_min = int(np.argmin(hv))
    flattened = k_min > 0
    if flattened:
        hs = np.concatenate([[0.0], hs[k_min:]])
        hv = np.concatenate([[hv[k_min]], hv[k_min:]])
        P = hs[1:].copy()
    else:
        P = hs.copy()
    sl = np.diff(hv) / np.diff(hs)
    tail = float(sl[-1]) if sl.size else 0.0
    env = PiecewiseLinear(hs, hv, sl, tail, label="g**")
    return env, ExtremalSet(P)


@dataclass(frozen=True)
class NagumoFunction:
    """Growth gauge ``psi`` with its largest zero and asymptotic slope."""

    psi: ConvexScalar
    s0: float
    asymptotic_slope: float

    def ratio(self, s):
        s = _arr(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.psi(s) / s


def _largest_zero(psi: ConvexScalar) -> float:
    if isinstance(psi, PiecewiseLinear):
        zero = np.nonzero(psi.values <= 0.0)[0]
        if psi.tail == 0.0 and psi.values[-1] <= 0:
            return INF
        return float(psi.breaks[zero[-1]]) if zero.size else 0.0
    if psi.dright(0.0) > 0:
        return 0.0
    b = 1.0
    while psi(b) <= 0.0:
        b *= 2.0
        if b > 1e300:
            return INF
    return float(_bisect_first(lambda x: psi(x) > 0.0, np.array([0.0]), np.array([b]))[0])


def _pos_part_of(f: ConvexScalar) -> tuple[ConvexScalar, float]:
    if isinstance(f, Power):
        return Power(1.0, f.exp), f.coef
    if isinstance(f, Scaled):
        return f.base, f.c
    return f, 1.0


def nagumo_from_g(
    g_at: Callable[[float], ConvexScalar],
    r_samples: Sequence[float],
    s_max: float | None = None,
    n: int = 2001,
) -> NagumoFunction:
    """Gauge ``psi <= g(r, .) - g(r, 0)`` uniform over ``r_samples``."""
    r_samples = list(r_samples)
    if not r_samples:
        raise ValueError("r_samples must be non-empty")
    gs = [g_at(r) for r in r_samples]
    bases = [_pos_part_of(g) for g in gs]
    b0 = bases[0][0]
    same = all(
        (b is b0) or (isinstance(b, Power) and isinstance(b0, Power) and b.exp == b0.exp) for b, _ in bases
    )
    if same:
        c = min(c for _, c in bases)
        psi = shift(scale(b0, c), -c * float(b0(0.0)))
        M = psi.asymptotic_slope
    else:
        if s_max is None:
            bp = [float(g.breaks[-1]) for g in gs if isinstance(g, PiecewiseLinear)]
            s_max = 10.0 * (1.0 + max(bp, default=10.0))
        grid = np.linspace(0.0, s_max, n)
        extra = [g.breaks for g in gs if isinstance(g, PiecewiseLinear)]
        if extra:
            kinks = np.concatenate(extra)
            grid = np.union1d(grid, kinks[kinks <= s_max])
        vals = np.min([g(grid) - g(0.0) for g in gs], axis=0)
        finite = np.isfinite(vals)
        grid, vals = grid[finite], np.maximum(vals[finite], 0.0)
        M = min(float(g.asymptotic_slope) for g in gs)
        if math.isfinite(M):
            # the envelope leaves the data along its supporting line of slope M
            icpt = vals - M * grid
            k = int(np.nonzero(icpt <= icpt.min() + 1e-12 * max(1.0, abs(icpt.min())))[0][-1])
            grid, vals = grid[: k + 1], vals[: k + 1]
        if grid.size < 2:
            grid, vals = np.array([0.0, 1.0]), np.array([vals[0], vals[0] + M])
        hull, _ = convex_envelope(np.column_stack([grid, vals]))
        if math.isinf(M):
            psi = hull
        else:
            b = np.union1d(hull.breaks, grid[-1:])
            v = hull(b)
            psi = PiecewiseLinear(b, v, np.diff(v) / np.diff(b), M, label="psi")
    if (M == 0.0) or (isinstance(psi, PiecewiseLinear) and np.all(psi.values <= 0.0) and psi.tail == 0.0):
        raise DegenerateG("psi vanishes identically: g has no growth")
    s0 = _largest_zero(psi)
    if math.isinf(s0):
        raise DegenerateG("psi vanishes identically: g has no growth")
    return NagumoFunction(psi=psi, s0=s0, asymptotic_slope=M)


def ratio_root(nagumo: NagumoFunction, m: float) -> float:
    """Unique ``sigma > s0`` with ``psi(sigma)/sigma = m``.

    When the ratio already exceeds ``m`` just to the right of ``s0`` (possible
    for a non-smooth ``psi`` such as ``|s|``) the infimum ``s0`` is returned.
    """
    m = float(m)
    if m <= 0:
        raise ValueError("m must be positive")
    if m >= nagumo.asymptotic_slope:
        raise RatioUnreachable(f"m={m} >= M={nagumo.asymptotic_slope}")
    psi, s0 = nagumo.psi, nagumo.s0

    def ratio(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, psi(x) / np.where(x > 0, x, 1.0), float(psi.dright(0.0)))

    if s0 == 0.0 and float(psi.dright(0.0)) >= m:
        return 0.0
    hi = max(2.0 * s0, 1.0)
    while not ratio(np.array([hi]))[0] > m:
        hi *= 2.0
        if hi > 1e300:
            raise RatioUnreachable(f"ratio never reaches {m}")
    sigma = float(_bisect_first(lambda x: ratio(x) >= m, np.array([s0]), np.array([hi]), iters=400)[0])
    return sigma


def in_phi_a(phi: ConvexScalar, a: float, s_max: float | None = None, n: int = 4001) -> list[str]:
    """Grid-scan membership test for the class Phi_a; returns failed properties."""
    fails = []
    if math.isfinite(phi.asymptotic_slope):
        fails.append("superlinear")
    s_max = s_max or max(4.0 * a, a + 10.0)
    s = np.linspace(0.0, s_max, n)
    v = phi(s)
    if np.any(np.abs(v[s <= a]) > 1e-12):
        fails.append("zero on [0,a]")
    if np.any(np.diff(v) < -1e-12):
        fails.append("non-decreasing")
    d = np.diff(v) / np.diff(s)
    if np.any(np.diff(d) < -1e-9 * np.maximum(1.0, np.abs(d[1:]))):
        fails.append("convex")
    return fails


def build_phi_a(phi: ConvexScalar, a: float) -> ConvexScalar:
    """``phi_a = max(phi - phi(a), 0)``, a member of Phi_a."""
    if math.isfinite(phi.asymptotic_slope):
        raise NotSuperlinear(f"{phi.label} has finite asymptotic slope {phi.asymptotic_slope}")
    out = PhiA(phi, a) if a > 0 else shift(phi, -float(phi(0.0)))
    return out


@dataclass(frozen=True)
class GluingParams:
    """Data of the glued Lagrangian at one radius.

    ``delta = (M - M0)/3``; ``sigma_hat`` is the left end of the inverse
    subgradient of ``g(r, .)`` at ``M0 + delta``; ``sigma1`` solves
    ``psi(sigma1)/sigma1 = M0 + 2 delta``; ``phi`` is the superlinear gauge
    whose ``zeta``-truncation forms the tail.
    """

    m0: float
    delta: float
    sigma_hat: float
    sigma1: float
    zeta: float
    phi: ConvexScalar = field(default_factory=lambda: Power(1.0, 2.0))

    @property
    def tangent_slope(self) -> float:
        return self.m0 + self.delta


def build_glued(g_r: ConvexScalar, params: GluingParams) -> Glued:
    if params.sigma_hat > params.zeta:
        raise InconsistentParams(f"sigma_hat={params.sigma_hat} > zeta={params.zeta}")
    phi_zeta = build_phi_a(params.phi, params.zeta)
    return Glued(g_r, params.sigma_hat, params.tangent_slope, phi_zeta)


def function_from_spec(spec: dict) -> ConvexScalar:
    """Build a ConvexScalar from its JSON fragment."""
    kind = spec.get("kind")
    if kind == "power":
        f: ConvexScalar = Power(float(spec.get("coef", 1.0)), float(spec.get("exp", 2.0)))
    elif kind == "abs":
        f = Power(float(spec.get("coef", 1.0)), 1.0, label="|s|")
    elif kind == "pwl":
        f = make_pwl(spec["breakpoints"], spec["values"], spec.get("domain_end"))
    elif kind == "xlog":
        f = XLog(float(spec.get("coef", 1.0)))
    else:
        raise ValueError(f"unknown function kind {kind!r}")
    end = spec.get("domain_end") if kind != "pwl" else None
    if end is not None:
        f = f.restrict(float(end))
    return f
