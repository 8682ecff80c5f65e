"""Closed-form Loewner chains in the right half-plane and numeric chain criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    HALF_PLANE,
    Domain,
    HoloMap,
    HyperbolicDisk,
    Report,
    UkRegion,
    as_holomap,
    cauchy_derivative,
)
from .errors import (
    ArgumentError,
    DomainError,
    EvaluationError,
    HypothesisError,
    PoleError,
    SingularDerivativeError,
)
from .herglotz import ZERO_SLOPE, HerglotzField, angular_derivative_infinity


@dataclass(frozen=True, eq=False)
class LoewnerChain:
    """t -> f_t with its field p.

    ``f(t, z)`` broadcasts over array z for scalar t. ``dt`` and ``dz`` are
    the analytic partial derivatives when available.
    """

    f: Callable
    field: HerglotzField
    provenance: str
    dt: Optional[Callable] = None
    dz: Optional[Callable] = None
    domain: Domain = HALF_PLANE
    flags: dict = field(default_factory=dict)
    target: object = None

    def eval(self, t, z):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(self.f(float(t), z), dtype=complex)
        if not np.all(np.isfinite(w)):
            raise EvaluationError(f"{self.provenance} chain non-finite at t={t}")
        return w[()] if w.ndim == 0 else w

    def __call__(self, t, z):
        return self.eval(t, z)

    def at(self, t) -> HoloMap:
        d1 = (lambda z: self.dz(float(t), np.asarray(z, dtype=complex))) if self.dz else None
        return HoloMap(lambda z: self.eval(t, z), self.domain, d1=d1, name=f"f_{t:g}")

    def derivative_z(self, t, z):
        if self.dz is not None:
            return self.dz(float(t), np.asarray(z, dtype=complex))
        return cauchy_derivative(self.at(t), z, 1)


def _d(h: HoloMap, z, k):
    return np.asarray(h.derivative(z, k), dtype=complex)


def _nonzero(v, what, where):
    v = np.asarray(v)
    bad = np.abs(v) <= 1e-14 * np.maximum(1.0, np.max(np.abs(v)) if v.size else 1.0)
    if np.any(bad):
        loc = np.ravel(np.asarray(where))[np.ravel(bad)][:1] if np.ndim(where) else where
        raise SingularDerivativeError(f"{what} vanishes near {loc}")


def _require_halfplane(h: HoloMap):
    if h.domain.kind != "H":
        raise DomainError("chain constructors need a half-plane map")


# ---------------------------------------------------------------- constructors


def chain_becker_pommerenke(h) -> LoewnerChain:
    """h_t(z) = h(z+t) - 2t h'(z+t)."""
    h = as_holomap(h)
    _require_halfplane(h)

    def f(t, z):
        w = z + t
        return h.eval(w) - 2 * t * _d(h, w, 1)

    def dz(t, z):
        w = z + t
        d1 = _d(h, w, 1)
        _nonzero(d1, "h'", w)
        return d1 - 2 * t * _d(h, w, 2)

    def dt(t, z):
        w = z + t
        return -_d(h, w, 1) - 2 * t * _d(h, w, 2)

    def p(z, t):
        w = z + t
        d1, d2 = _d(h, w, 1), _d(h, w, 2)
        _nonzero(d1, "h'", w)
        return (d1 + 2 * t * d2) / (d1 - 2 * t * d2)

    pf = HerglotzField(p, angular_derivative=ZERO_SLOPE, name=f"bp[{h.name}]")
    return LoewnerChain(f, pf, "becker-pommerenke", dt=dt, dz=dz)


def chain_schwarzian(h) -> LoewnerChain:
    """h_t(z) = h(w) - 2t h'(w)/(1 + t Ph(w)), w = z+t."""
    h = as_holomap(h)
    _require_halfplane(h)

    def parts(t, z):
        w = np.asarray(z + t, dtype=complex)
        d1, d2, d3 = _d(h, w, 1), _d(h, w, 2), _d(h, w, 3)
        _nonzero(d1, "h'", w)
        P = d2 / d1
        S = d3 / d1 - 1.5 * P * P
        D = 1 + t * P
        small = np.abs(D) <= 1e-14
        if np.any(small):
            loc = np.ravel(w)[np.ravel(small)][0] - t
            raise PoleError(f"1 + t*Ph(z+t) vanishes at z={loc}, t={t}", location=(complex(loc), t))
        return w, d1, P, S, D

    def f(t, z):
        w, d1, P, S, D = parts(t, z)
        return h.eval(w) - 2 * t * d1 / D

    def dz(t, z):
        _, d1, _, S, D = parts(t, z)
        return d1 * (1 + 2 * t * t * S) / (D * D)

    def dt(t, z):
        _, d1, _, S, D = parts(t, z)
        return -d1 * (1 - 2 * t * t * S) / (D * D)

    def p(z, t):
        _, _, _, S, _ = parts(t, z)
        q = 2 * t * t * S
        return (1 - q) / (1 + q)

    pf = HerglotzField(p, angular_derivative=ZERO_SLOPE, name=f"schwarzian[{h.name}]")
    return LoewnerChain(f, pf, "schwarzian", dt=dt, dz=dz)


def chain_translation(h, omega: complex = 1.0, k: float | None = None) -> LoewnerChain:
    """h_t = h - omega t, p = omega/h'."""
    h = as_holomap(h)
    _require_halfplane(h)
    omega = complex(omega)
    if omega == 0:
        raise ArgumentError("omega must be non-zero")

    def d1(z):
        v = _d(h, z, 1)
        _nonzero(v, "h'", z)
        return v

    def p(z, t):
        return omega / d1(z)

    def dp(z, t):
        v = d1(z)
        return -omega * _d(h, z, 2) / (v * v)

    pf = HerglotzField(p, dz=dp, angular_derivative=ZERO_SLOPE, name=f"translation[{h.name}]")
    return LoewnerChain(lambda t, z: h.eval(z) - omega * t, pf, "translation",
                        dt=lambda t, z: np.full(np.shape(z), -omega, dtype=complex),
                        dz=lambda t, z: d1(z), target=UkRegion(k) if k is not None else None)


def chain_exponential(h, disk: HyperbolicDisk | None = None, grid=None) -> LoewnerChain:
    """h_t = e^{-t} h, p = h/h'.

    When ``disk`` and ``grid`` are given the membership h/h' - z in disk is
    sampled and recorded in ``flags`` (the chain is returned either way).
    """
    h = as_holomap(h)
    _require_halfplane(h)

    def ratio(z):
        v = h.eval(z)
        if np.any(v == 0):
            raise HypothesisError("h has a zero at a sample point")
        d = _d(h, z, 1)
        _nonzero(d, "h'", z)
        return v / d

    def dp(z, t):
        v, d1, d2 = h.eval(z), _d(h, z, 1), _d(h, z, 2)
        return 1 - v * d2 / (d1 * d1)

    pf = HerglotzField(lambda z, t: ratio(z), dz=dp, name=f"exponential[{h.name}]")
    flags = {}
    if grid is not None:
        z = grid.points()
        if np.any(np.abs(h.eval(z)) == 0):
            raise HypothesisError("h vanishes on the grid")
        if disk is not None:
            m = np.asarray(disk.margin(ratio(z) - z), dtype=float)
            flags["membership_margin"] = float(np.max(m))
            flags["membership_ok"] = bool(np.max(m) <= 1e-10)
    return LoewnerChain(lambda t, z: math.exp(-t) * h.eval(z), pf, "exponential",
                        dt=lambda t, z: -math.exp(-t) * h.eval(z),
                        dz=lambda t, z: math.exp(-t) * _d(h, z, 1), flags=flags, target=disk)


def chain_starlike_infinity(h, f) -> LoewnerChain:
    """h_t = h - (e^t - 1)/f, p = 1/q with q = e^{-t} h'f + (1-e^{-t}) f'/f."""
    h = as_holomap(h)
    f = as_holomap(f)
    _require_halfplane(h)

    def fv(z):
        v = f.eval(z)
        if np.any(v == 0):
            raise HypothesisError("f vanishes at a sample point")
        return v

    def q(z, t):
        F = fv(z)
        A = _d(h, z, 1) * F
        B = _d(f, z, 1) / F
        e = math.exp(-t)
        out = e * A + (1 - e) * B
        if np.any(out == 0):
            raise HypothesisError("q vanishes at a sample point")
        return out

    pf = HerglotzField(lambda z, t: 1 / q(z, t), name=f"starlike[{h.name},{f.name}]")
    return LoewnerChain(lambda t, z: h.eval(z) - math.expm1(t) / fv(z), pf, "starlike-infinity",
                        dt=lambda t, z: -math.exp(t) / fv(z),
                        dz=lambda t, z: math.exp(t) * q(z, t) / fv(z))


def chain_from_closed_form(ft, p: HerglotzField, provenance="custom", dt=None, dz=None,
                           domain: Domain = HALF_PLANE) -> LoewnerChain:
    return LoewnerChain(ft, p, provenance, dt=dt, dz=dz, domain=domain)


# ---------------------------------------------------------------- residuals


def pde_residual(c: LoewnerChain, z, t: float, dt_step: float | None = None, use_analytic: bool = True):
    """|d f_t/dt + f_t'(z) p(z,t)|."""
    if c.domain.kind != "H":
        raise DomainError(f"domain mismatch: chain on {c.domain.tag}, half-plane PDE requested")
    z = np.asarray(z, dtype=complex)
    if use_analytic and c.dt is not None and dt_step is None:
        ft = np.asarray(c.dt(float(t), z), dtype=complex)
    else:
        h = 1e-4 if dt_step is None else dt_step
        if t >= h:
            ft = (c.eval(t + h, z) - c.eval(t - h, z)) / (2 * h)
        else:
            # second-order one-sided difference
            ft = (-3 * c.eval(t, z) + 4 * c.eval(t + h, z) - c.eval(t + 2 * h, z)) / (2 * h)
    fz = cauchy_derivative(c.at(t), z, 1)
    r = np.abs(ft + fz * c.field.eval(z, t))
    return r[()] if np.ndim(r) == 0 else r


def compatibility_residual(c: LoewnerChain, family, s: float, t: float, z):
    """|f_t(phi_{s,t}(z)) - f_s(z)|."""
    return np.abs(c.eval(t, family.evolve(s, t, z)) - c.eval(s, z))


# ---------------------------------------------------------------- univalence radius


def _sunflower(n):
    i = np.arange(n) + 0.5
    r = np.sqrt(i / n)
    th = i * math.pi * (3 - math.sqrt(5))
    return r * np.exp(1j * th)


def _segments_cross(P):
    """True if the closed polygon P has two non-adjacent crossing edges."""
    A = P
    B = np.roll(P, -1)
    n = len(P)
    ax, ay, bx, by = A.real, A.imag, B.real, B.imag

    def orient(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    i, j = np.triu_indices(n, 2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    o1 = orient(ax[i], ay[i], bx[i], by[i], ax[j], ay[j])
    o2 = orient(ax[i], ay[i], bx[i], by[i], bx[j], by[j])
    o3 = orient(ax[j], ay[j], bx[j], by[j], ax[i], ay[i])
    o4 = orient(ax[j], ay[j], bx[j], by[j], bx[i], by[i])
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def _injective_on(fm: HoloMap, center, rad, samples, boundary):
    pts = center + rad * _sunflower(samples)
    circ = center + rad * np.exp(2j * np.pi * np.arange(boundary) / boundary)
    try:
        w = fm.eval(pts)
        wc = fm.eval(circ)
    except Exception:
        return False
    i, j = np.triu_indices(len(pts), 1)
    ratio = np.abs(w[i] - w[j]) / np.abs(pts[i] - pts[j])
    scale = float(np.median(ratio))
    if scale == 0 or np.min(ratio) <= 1e-10 * scale:
        return False
    return not _segments_cross(wc)


def univalence_radius(f, z: complex, metric: str = "euclidean", resolution: int = 256,
                      r0: float | None = None, levels: int = 13, boundary: int = 256) -> float:
    """Largest scheduled radius r0*2^j on which f looks injective.

    Two tests: pairwise separation of ``resolution`` interior samples, and
    simplicity of the image of the boundary circle as a polygon.
    Returns 0.0 when even the smallest radius fails.
    """
    fm = as_holomap(f)
    z = complex(z)
    if metric not in ("euclidean", "hyperbolic"):
        raise ArgumentError("metric must be 'euclidean' or 'hyperbolic'")
    if metric == "hyperbolic" and z.real <= 0:
        raise DomainError("hyperbolic disks need Re z > 0")
    dist = float(fm.domain.boundary_distance(z))
    if r0 is None:
        r0 = (0.99 * dist if metric == "euclidean" else 4.0) / 2 ** (levels - 1)
    best = 0.0
    for j in range(levels):
        r = r0 * 2**j
        if metric == "euclidean":
            c, rad = z, r
        else:
            e = HyperbolicDisk(z, r).to_euclidean()
            c, rad = e.center, e.radius
        if fm.domain.kind == "H" and (c.real - rad) <= fm.domain.x0:
            break
        if fm.domain.kind == "D" and abs(c) + rad >= 1:
            break
        if not _injective_on(fm, c, rad, resolution, boundary):
            break
        best = r
    return best


# ---------------------------------------------------------------- chain criteria


def _strip_from_region(region):
    if isinstance(region, UkRegion):
        k = region.k
        # the closed region sits inside a slightly wider open strip
        return (1 - k) / (1 + k) * (1 - 1e-6), (1 + k) / (1 - k) * (1 + 1e-6)
    return None


def chain_criteria_report(c: LoewnerChain, C1: float | None = None, C2: float | None = None,
                          a: float = 0.0, horizon: float = 10.0, grid=None, times=None,
                          ratio_floor: float = 0.05, schedule_points: int = 6) -> Report:
    """Sampled surrogate for the strip, continuity and univalence-growth hypotheses."""
    from .core import Grid

    if c.domain.kind != "H":
        raise DomainError("chain criteria apply to half-plane chains only")
    grid = grid or Grid(1e-2, 1e2, -20.0, 20.0, 25, 25, logx=True)
    times = list(times) if times is not None else list(np.linspace(0.0, horizon, 11))
    z = grid.points()
    details = {}

    # strip containment
    if (C1 is None or C2 is None) and c.target is not None:
        s = _strip_from_region(c.target)
        if s is not None:
            C1 = s[0] if C1 is None else C1
            C2 = s[1] if C2 is None else C2
    re_min, re_max = math.inf, -math.inf
    early_min = math.inf
    for t in times:
        w = c.field.eval(z, t)
        re_min = min(re_min, float(np.min(w.real)))
        re_max = max(re_max, float(np.max(w.real)))
        if t <= horizon / 2:
            early_min = min(early_min, float(np.min(w.real)))
    try:
        slope = max(angular_derivative_infinity(c.field, t) for t in times)
    except Exception:
        slope = math.inf
    inferred = C1 is None
    if C1 is None:
        C1 = early_min
    if C2 is None:
        C2 = re_max * (1 + 1e-9) + 1e-12
    # an inferred C1 must persist over the second half of the schedule
    lower_ok = C1 > 0 and (re_min >= C1 * (1 - 1e-9) if inferred else re_min > C1)
    upper_ok = slope <= 1e-9 and re_max < C2
    details["strip"] = {"C1": C1, "C2": C2, "C1_inferred": inferred, "sampled_min_re": re_min,
                        "sampled_max_re": re_max, "angular_derivative_max": slope,
                        "lower_passed": lower_ok, "upper_passed": upper_ok}

    # continuity by refinement
    sub = z[:: max(1, len(z) // 50)]
    diffs = []
    for delta in (1e-3, 5e-4, 2.5e-4):
        worst = 0.0
        for t in times[:4]:
            base = c.eval(t, sub)
            worst = max(worst, float(np.max(np.abs(c.eval(t + delta, sub + delta) - base))))
        diffs.append(worst)
    cont_ok = all(d1 <= 0.75 * d0 or d1 <= 1e-12 for d0, d1 in zip(diffs[:-1], diffs[1:]))
    details["continuity"] = {"increments": diffs, "passed": cont_ok}

    # univalence-radius growth
    ts = np.linspace(0.0, horizon, schedule_points)
    ratios = []
    if C1 > 0 and math.isfinite(C1):
        for t in ts:
            x = a + C1 * t + 1.0
            pts = [complex(x), complex(2 * x, x), complex(2 * x, -x)]
            rs = [univalence_radius(c.at(t), zz, "euclidean", resolution=96, boundary=128) / zz.real
                  for zz in pts]
            ratios.append(min(rs))
        tail = ratios[len(ratios) // 2:]
        growth_ok = min(tail) >= ratio_floor
    else:
        growth_ok = False
    details["univalence"] = {"times": ts, "min_ratio": ratios, "ratio_floor": ratio_floor,
                             "passed": growth_ok}
    passed = lower_ok and upper_ok and cont_ok and growth_ok
    margin = -min(re_min - C1, C2 - re_max) if math.isfinite(C2) else math.inf
    return Report("chain-criteria", passed, margin, details)
