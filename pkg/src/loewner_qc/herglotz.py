"""Herglotz fields p(z, t) on the right half-plane and their transformations."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import (
    HALF_PLANE,
    HoloMap,
    Report,
    adaptive_simpson,
    cauchy_derivative,
    limit_estimate,
)
from .errors import ArgumentError, EvaluationError, NoLimitError

QUAD_TOL = 1e-10


def ZERO_SLOPE(t):
    """Declared p'(oo, t) for fields known to be bounded at infinity."""
    return 0.0


@dataclass(frozen=True, eq=False)
class HerglotzField:
    """Time-dependent map with non-negative real part.

    ``f(z, t)`` must broadcast over an array ``z`` with scalar ``t``.
    ``angular_derivative`` is p'(oo, t) when known in closed form.
    """

    f: Callable
    dz: Optional[Callable] = None
    angular_derivative: Optional[Callable] = None
    breakpoints: tuple = ()
    name: str = "p"
    strip: Optional[tuple] = None

    def __call__(self, z, t):
        return self.f(z, t)

    def eval(self, z, t):
        w = np.asarray(self.f(np.asarray(z, dtype=complex), float(t)), dtype=complex)
        if w.shape != np.shape(z):
            w = np.broadcast_to(w, np.shape(z)).copy()
        return w[()] if w.ndim == 0 else w

    def derivative_z(self, z, t):
        if self.dz is not None:
            d = np.asarray(self.dz(np.asarray(z, dtype=complex), float(t)), dtype=complex)
            return np.broadcast_to(d, np.shape(z)).copy() if d.shape != np.shape(z) else d
        return cauchy_derivative(self.at(t), z, 1)

    def at(self, t) -> HoloMap:
        return HoloMap(lambda z: self.eval(z, t), HALF_PLANE, name=f"{self.name}(.,{t:g})")

    def with_breakpoints(self, bps) -> "HerglotzField":
        return replace(self, breakpoints=tuple(sorted(set(float(b) for b in bps))))


# ---------------------------------------------------------------- constructors


def constant_field(c: complex, name: str | None = None) -> HerglotzField:
    c = complex(c)
    return HerglotzField(lambda z, t: np.full(np.shape(z), c, dtype=complex),
                         dz=lambda z, t: np.zeros(np.shape(z), dtype=complex),
                         angular_derivative=ZERO_SLOPE,
                         name=name or f"const({c:g})")


def field_from_expr(text, params=None, breakpoints=(), angular_derivative=None) -> HerglotzField:
    """Field from a DSL string in ``z`` and ``t`` with a symbolic ``dz``."""
    from .expr import compile_expr, differentiate, parse, to_string

    e = parse(text) if isinstance(text, str) else text
    f = compile_expr(e, params)
    d = compile_expr(differentiate(e, "z"), params)
    return HerglotzField(lambda z, t: f(z, t), dz=lambda z, t: d(z, t),
                         angular_derivative=angular_derivative,
                         breakpoints=tuple(breakpoints), name=to_string(e))


# ---------------------------------------------------------------- validation


def strip_kappa(c1: float, c2: float) -> float:
    """sup over c1<u<c2 of L sin(pi (u-c1)/L) / (pi u), L = c2 - c1."""
    if not (0 <= c1 < c2 < math.inf):
        raise ArgumentError("strip must satisfy 0 <= C1 < C2 < inf")
    L = c2 - c1

    def g(u):
        return L * math.sin(math.pi * (u - c1) / L) / (math.pi * u)

    us = np.linspace(c1, c2, 2001)[1:-1]
    vals = np.array([g(u) for u in us])
    i = int(np.argmax(vals))
    lo, hi = us[max(i - 1, 0)], us[min(i + 1, len(us) - 1)]
    res = minimize_scalar(lambda u: -g(u), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(max(vals[i], -res.fun))


@dataclass
class ValidationReport:
    min_re: float
    nonfinite: int
    hf3_passed: bool
    strip: Optional[tuple] = None
    strip_inferred: bool = False
    kappa: Optional[float] = None
    contraction_max: Optional[float] = None
    contraction_passed: Optional[bool] = None
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.hf3_passed and self.nonfinite == 0 and self.contraction_passed is not False

    def to_dict(self):
        from .core import jsonable
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["passed"] = self.passed
        return jsonable(d)


def validate(p: HerglotzField, grid, times: Sequence[float], strip=None,
             tol: float = 1e-12) -> ValidationReport:
    """Sampled check of Re p >= 0 plus, for strip-valued fields, the contraction estimate."""
    z = grid.points()
    z = z[z.real > 0]
    minre, bad = math.inf, 0
    vals = []
    for t in times:
        w = p.eval(z, t)
        fin = np.isfinite(w)
        bad += int(np.count_nonzero(~fin))
        if np.any(fin):
            minre = min(minre, float(np.min(w[fin].real)))
        vals.append(w)
    rep = ValidationReport(minre, bad, minre >= -tol, samples=len(z) * len(times))
    inferred = False
    if strip is None and p.strip is not None:
        strip = p.strip
    if strip is None and rep.passed and minre > 0:
        try:
            bounded = all(angular_derivative_infinity(p, t) <= 1e-9 for t in times)
        except NoLimitError:
            bounded = False
        if bounded:
            allv = np.concatenate([v[np.isfinite(v)] for v in vals])
            strip = (float(np.min(allv.real)), float(np.max(allv.real)))
            inferred = True
    if strip is not None and strip[1] > strip[0]:
        c1, c2 = strip
        kappa = strip_kappa(c1, c2)
        worst = 0.0
        for t, w in zip(times, vals):
            dp = p.derivative_z(z, t)
            worst = max(worst, float(np.max(np.abs(dp) * z.real / w.real)))
        rep.strip, rep.strip_inferred, rep.kappa = (c1, c2), inferred, kappa
        rep.contraction_max = worst
        rep.contraction_passed = worst <= kappa * (1 + 1e-6) + 1e-12
    return rep


def angular_derivative_infinity(p: HerglotzField, t: float, ray_samples=None) -> float:
    if t < 0:
        raise ArgumentError("t must be >= 0")
    if p.angular_derivative is not None:
        return float(p.angular_derivative(t))
    est = limit_estimate(p.at(t), ray_samples)
    v = est.value
    tol = max(10 * est.error, 1e-9)
    if v.real < -tol or abs(v.imag) > tol:
        raise NoLimitError(f"angular derivative estimate {v} is not a non-negative real")
    out = max(v.real, 0.0)
    return 0.0 if out <= tol else out


# ---------------------------------------------------------------- transformations


def _piecewise_integral(g, a: float, b: float, breakpoints, tol=QUAD_TOL) -> float:
    cuts = [a] + [x for x in breakpoints if a < x < b] + [b]
    return sum(adaptive_simpson(g, lo, hi, tol) for lo, hi in zip(cuts[:-1], cuts[1:]))


def normalize_at_infinity(p: HerglotzField):
    """Return (p_tilde, lam) removing the linear growth of p at infinity."""
    def a(t):
        return angular_derivative_infinity(p, t)

    if p.angular_derivative is ZERO_SLOPE:
        return p, (lambda t: 0.0)

    @lru_cache(maxsize=4096)
    def lam(t):
        t = float(t)
        return _piecewise_integral(a, 0.0, t, p.breakpoints) if t > 0 else 0.0

    def f(z, t):
        L = lam(float(t))
        return math.exp(-L) * p.eval(math.exp(L) * np.asarray(z, dtype=complex), t) - a(t) * np.asarray(z)

    def dz(z, t):
        L = lam(float(t))
        return p.derivative_z(math.exp(L) * np.asarray(z, dtype=complex), t) - a(t)

    out = HerglotzField(f, dz=dz, angular_derivative=ZERO_SLOPE,
                        breakpoints=p.breakpoints, name=f"normalized[{p.name}]")
    return out, lam


def reparametrize_unbounded(p: HerglotzField, alpha: Callable, beta: Callable,
                            k: float | None = None, horizon: float = 50.0,
                            table_points: int = 257) -> HerglotzField:
    """Time change xi = u(t) = int 1/alpha, vertical shift v(t) = int beta.

    ``horizon`` truncates the original time axis; beyond u(horizon) the
    returned field is identically 1. ``k`` is informational.
    """
    ts = np.linspace(0.0, horizon, table_points)
    for t in ts:
        if not alpha(t) > 0:
            raise ArgumentError(f"alpha must be positive (alpha({t:g}) = {alpha(t)})")
    cuts = sorted(set(ts.tolist()) | {b for b in p.breakpoints if 0 < b < horizon})
    inv = lambda s: 1.0 / alpha(s)
    U = [0.0]
    V = [0.0]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        U.append(U[-1] + adaptive_simpson(inv, lo, hi, QUAD_TOL / len(cuts)))
        V.append(V[-1] + adaptive_simpson(beta, lo, hi, QUAD_TOL / len(cuts)))
    cuts_a = np.asarray(cuts)
    U = np.asarray(U)
    V = np.asarray(V)
    if np.any(np.diff(U) <= 0):
        raise ArgumentError("u(t) is not strictly increasing")
    T = float(U[-1])

    def u_of(t):
        j = min(int(np.searchsorted(cuts_a, t, side="right")) - 1, len(cuts_a) - 2)
        return U[j] + adaptive_simpson(inv, cuts_a[j], t, QUAD_TOL)

    def v_of(t):
        j = min(int(np.searchsorted(cuts_a, t, side="right")) - 1, len(cuts_a) - 2)
        return V[j] + adaptive_simpson(beta, cuts_a[j], t, QUAD_TOL)

    @lru_cache(maxsize=8192)
    def u_inv(xi):
        j = min(int(np.searchsorted(U, xi, side="right")) - 1, len(U) - 2)
        lo, hi = cuts_a[j], cuts_a[j + 1]
        if xi <= U[j]:
            return float(lo)
        return brentq(lambda s: u_of(s) - xi, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)

    @lru_cache(maxsize=8192)
    def coeffs(xi):
        t = u_inv(xi)
        return t, alpha(t), beta(t), v_of(t)

    def f(z, xi):
        xi = float(xi)
        z = np.asarray(z, dtype=complex)
        if xi >= T:
            return np.ones(z.shape, dtype=complex)
        t, a, b, v = coeffs(xi)
        return a * (p.eval(z + 1j * v, t) - 1j * b)

    def dz(z, xi):
        xi = float(xi)
        z = np.asarray(z, dtype=complex)
        if xi >= T:
            return np.zeros(z.shape, dtype=complex)
        t, a, _, v = coeffs(xi)
        return a * p.derivative_z(z + 1j * v, t)

    bps = sorted({T} | {float(u_of(b)) for b in p.breakpoints if 0 < b < horizon})
    out = HerglotzField(f, dz=dz, angular_derivative=ZERO_SLOPE, breakpoints=tuple(bps),
                        name=f"reparam[{p.name}]")
    object.__setattr__(out, "u", u_of)
    object.__setattr__(out, "v", v_of)
    object.__setattr__(out, "u_inverse", u_inv)
    object.__setattr__(out, "xi_max", T)
    object.__setattr__(out, "k", k)
    return out


# ---------------------------------------------------------------- membership


def membership_report(p: HerglotzField, region, grid, times, tol: float = 1e-10) -> Report:
    z = grid.points()
    worst, where = -math.inf, None
    for t in times:
        w = p.eval(z, t)
        if not np.all(np.isfinite(w)):
            raise EvaluationError(f"field {p.name} non-finite at t={t}")
        m = np.asarray(region.margin(w), dtype=float)
        i = int(np.argmax(m))
        if m[i] > worst:
            worst, where = float(m[i]), (complex(z[i]), float(t), complex(w[i]))
    return Report("membership", worst <= tol, worst,
                  {"region": type(region).__name__, "worst_point": where,
                   "samples": len(z) * len(times), "tolerance": tol})
