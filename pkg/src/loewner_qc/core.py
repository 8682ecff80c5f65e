"""Shared complex-plane numerics.

Regions, grids, hyperbolic geometry of the right half-plane, Cauchy-circle
derivatives and limits along the positive real axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ArgumentError,
    DomainError,
    EvaluationError,
    NoLimitError,
    SingularDerivativeError,
)

CAUCHY_POINTS = 64
DEFAULT_LIMIT_RADIUS = 1e3


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class Domain:
    """Half-plane ``{Re z > x0}`` (kind ``"H"``) or the unit disk (kind ``"D"``)."""

    kind: str = "H"
    x0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("H", "D"):
            raise ArgumentError(f"unknown domain kind {self.kind!r}")

    @property
    def tag(self) -> str:
        if self.kind == "D":
            return "disk"
        return "halfplane" if self.x0 == 0 else f"halfplane({self.x0:g})"

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "H":
            return z.real - self.x0
        return 1.0 - np.abs(z)

    def contains(self, z) -> np.ndarray:
        return self.boundary_distance(z) > 0

    def require(self, z):
        ok = self.contains(z)
        if not np.all(ok):
            bad = np.asarray(z, dtype=complex)[~ok] if np.ndim(z) else z
            raise DomainError(f"point(s) outside {self.tag}: {np.ravel(bad)[:3]}")


HALF_PLANE = Domain("H", 0.0)
UNIT_DISK = Domain("D")


@dataclass(frozen=True, eq=False)
class HoloMap:
    """An evaluable holomorphic map with optional analytic derivatives."""

    f: Callable
    domain: Domain = HALF_PLANE
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    d3: Optional[Callable] = None
    inverse: Optional[Callable] = None
    name: str = "f"

    def __call__(self, z):
        return self.f(z)

    def eval(self, z):
        w = np.asarray(self.f(np.asarray(z, dtype=complex)), dtype=complex)
        if not np.all(np.isfinite(w)):
            raise EvaluationError(f"{self.name} returned non-finite values")
        return w[()] if w.ndim == 0 else w

    def derivative(self, z, order: int = 1):
        an = {1: self.d1, 2: self.d2, 3: self.d3}.get(order)
        if an is not None:
            z = np.asarray(z, dtype=complex)
            w = np.broadcast_to(np.asarray(an(z), dtype=complex), z.shape).copy()
            return w[()] if w.ndim == 0 else w
        return cauchy_derivative(self, z, order)


def as_holomap(f, domain: Domain = HALF_PLANE) -> HoloMap:
    if isinstance(f, HoloMap):
        return f
    return HoloMap(f, domain)


# ---------------------------------------------------------------- derivatives


def _default_radius(domain: Domain, z):
    d = domain.boundary_distance(z)
    if np.any(d <= 0):
        raise DomainError("derivative requested at a point outside the domain")
    return np.minimum(0.5 * d, 1.0)


def cauchy_derivative(f, z, order: int = 1, radius=None, points: int = CAUCHY_POINTS):
    """Trapezoid-rule Cauchy integral for ``f^(order)(z)``; vectorized over z."""
    if order < 1:
        raise ArgumentError("order must be >= 1")
    if points < 16:
        raise ArgumentError("points must be >= 16")
    fm = as_holomap(f)
    z = np.asarray(z, dtype=complex)
    if radius is None:
        r = _default_radius(fm.domain, z)
    else:
        r = np.broadcast_to(np.asarray(radius, dtype=float), z.shape)
        if np.any(r <= 0):
            raise ArgumentError("radius must be positive")
        if np.any(fm.domain.boundary_distance(z) <= r):
            raise DomainError("Cauchy circle leaves the domain")
    theta = 2 * np.pi * np.arange(points) / points
    e = np.exp(1j * theta)
    r_ = np.asarray(r)[..., None]
    samples = np.asarray(fm.f(z[..., None] + r_ * e), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise EvaluationError(f"{fm.name} returned non-finite values on a Cauchy circle")
    coef = np.mean(samples * e ** (-order), axis=-1)
    out = coef * math.factorial(order) / np.asarray(r) ** order
    return out[()] if out.ndim == 0 else out


def _local_scale(fm: HoloMap, z):
    r = _default_radius(fm.domain, z)
    return np.abs(fm.f(z + r) - fm.f(z)) / r


def _derivs(f, z, upto: int):
    fm = as_holomap(f)
    z = np.asarray(z, dtype=complex)
    ds = [fm.derivative(z, k) for k in range(1, upto + 1)]
    ds = [np.asarray(d, dtype=complex) for d in ds]
    scale = _local_scale(fm, z)
    if np.any(np.abs(ds[0]) <= 1e-14 * np.maximum(scale, 1e-300)):
        raise SingularDerivativeError(f"{fm.name}' vanishes at a sample point")
    return ds


def pre_schwarzian(f, z):
    """f''/f'."""
    d1, d2 = _derivs(f, z, 2)
    out = d2 / d1
    return out[()] if out.ndim == 0 else out


def schwarzian(f, z):
    """(f''/f')' - (f''/f')^2/2."""
    d1, d2, d3 = _derivs(f, z, 3)
    p = d2 / d1
    out = d3 / d1 - 1.5 * p * p
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- hyperbolic geometry


def hyperbolic_distance(z1, z2):
    """Distance for the metric |dz|/(2 Re z) on {Re z > 0}."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    if np.any(z1.real <= 0) or np.any(z2.real <= 0):
        raise DomainError("hyperbolic distance needs points with Re z > 0")
    q = np.abs(z1 - z2) ** 2 / (2 * z1.real * z2.real)
    out = 0.5 * np.arccosh(1 + q)
    return out[()] if out.ndim == 0 else out


def rho_pseudo(z1, z2):
    return np.abs(z1 - z2) / np.abs(z1 + np.conj(z2))


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class EuclideanDisk:
    center: complex
    radius: float = 0.0

    def __post_init__(self):
        if not self.radius >= 0:
            raise ArgumentError("disk radius must be >= 0")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def excludes_origin(self) -> bool:
        return abs(self.center) > self.radius

    def margin(self, w):
        return np.abs(np.asarray(w) - self.center) - self.radius

    def contains(self, w, tol: float = 1e-10):
        return self.margin(w) <= tol

    def extremal_points(self):
        """Points of least and greatest modulus, (w1, w2)."""
        c = self.center
        if c == 0:
            raise ArgumentError("extremal points undefined for a disk centred at 0")
        u = c / abs(c)
        return c - self.radius * u, c + self.radius * u

    def modulus_ratio(self) -> float:
        """K = sqrt(max|w|/min|w|) over the disk."""
        if not self.excludes_origin:
            return math.inf
        a = abs(self.center)
        return math.sqrt((a + self.radius) / (a - self.radius))

    def omega(self) -> complex:
        # geometric mean of the extremal points, on the ray through the centre
        a = abs(self.center)
        if a <= self.radius:
            raise ArgumentError("disk contains the origin")
        return complex(math.sqrt(a * a - self.radius**2) * self.center / a)


@dataclass(frozen=True)
class HyperbolicDisk:
    center: complex
    radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.center.real <= 0:
            raise DomainError("hyperbolic disk centre must lie in Re z > 0")
        if not self.radius >= 0:
            raise ArgumentError("hyperbolic radius must be >= 0")

    def margin(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.full(w.shape, np.inf)
        ok = w.real > 0
        out[ok] = hyperbolic_distance(self.center, w[ok]) - self.radius
        return out[()] if out.ndim == 0 else out

    def contains(self, w, tol: float = 1e-10):
        return self.margin(w) <= tol

    def to_euclidean(self) -> EuclideanDisk:
        u, v = self.center.real, self.center.imag
        return EuclideanDisk(complex(u * math.cosh(2 * self.radius), v), u * math.sinh(2 * self.radius))

    @classmethod
    def from_euclidean(cls, disk: EuclideanDisk) -> "HyperbolicDisk":
        x, y, r = disk.center.real, disk.center.imag, disk.radius
        if x <= r:
            raise DomainError("Euclidean disk is not compactly inside Re z > 0")
        return cls(complex(math.sqrt(x * x - r * r), y), 0.25 * math.log((x + r) / (x - r)))

    @property
    def K(self) -> float:
        return math.exp(2 * self.radius)

    @property
    def implied_k(self) -> float:
        return math.tanh(self.radius)

    @classmethod
    def from_K(cls, center, K: float) -> "HyperbolicDisk":
        return cls(center, 0.5 * math.log(K))


@dataclass(frozen=True)
class UkRegion:
    """{|w-1|/|w+1| <= k}."""

    k: float

    def __post_init__(self):
        if not 0 <= self.k < 1:
            raise ArgumentError("k must lie in [0, 1)")

    @property
    def center(self) -> float:
        return (1 + self.k**2) / (1 - self.k**2)

    @property
    def radius(self) -> float:
        return 2 * self.k / (1 - self.k**2)

    @staticmethod
    def ratio(w):
        w = np.asarray(w, dtype=complex)
        return np.abs(w - 1) / np.abs(w + 1)

    def margin(self, w):
        return self.ratio(w) - self.k

    def contains(self, w, tol: float = 1e-12):
        return self.margin(w) <= tol

    def contains_euclidean(self, w, tol: float = 1e-12):
        return np.abs(np.asarray(w) - self.center) - self.radius <= tol

    def to_euclidean(self) -> EuclideanDisk:
        return EuclideanDisk(self.center, self.radius)

    def to_hyperbolic(self) -> HyperbolicDisk:
        return HyperbolicDisk(1.0, math.atanh(self.k))


def region_margin(region, w):
    return region.margin(w)


# ---------------------------------------------------------------- grids


@dataclass(frozen=True)
class Grid:
    """Rectangular sample grid. ``refine`` maps n to 2n-1 so grids nest."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int
    logx: bool = False
    domain: Optional[Domain] = None

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ArgumentError("grid counts must be positive")
        if self.logx and self.xmin <= 0:
            raise ArgumentError("log-spaced x needs xmin > 0")
        if self.domain is not None:
            self.domain.require(self.points())

    def xs(self):
        if self.nx == 1:
            return np.array([self.xmin])
        if self.logx:
            return np.geomspace(self.xmin, self.xmax, self.nx)
        return np.linspace(self.xmin, self.xmax, self.nx)

    def ys(self):
        if self.ny == 1:
            return np.array([self.ymin])
        return np.linspace(self.ymin, self.ymax, self.ny)

    def mesh(self):
        X, Y = np.meshgrid(self.xs(), self.ys(), indexing="xy")
        return X + 1j * Y

    def points(self):
        return self.mesh().ravel()

    def refine(self) -> "Grid":
        return Grid(self.xmin, self.xmax, self.ymin, self.ymax,
                    2 * self.nx - 1, 2 * self.ny - 1, self.logx, self.domain)

    @property
    def bounds(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)

    @property
    def size(self) -> int:
        return self.nx * self.ny


def default_halfplane_grid(n: int = 81) -> Grid:
    return Grid(1e-3, 1e3, -50.0, 50.0, n, n, logx=True, domain=HALF_PLANE)


@dataclass(frozen=True)
class DiskGrid:
    """Polar grid on an annulus rmin <= |z| <= rmax inside the unit disk."""

    rmin: float
    rmax: float
    nr: int
    ntheta: int

    def __post_init__(self):
        if not 0 < self.rmin <= self.rmax < 1:
            raise DomainError("need 0 < rmin <= rmax < 1")

    def points(self):
        r = np.linspace(self.rmin, self.rmax, self.nr) if self.nr > 1 else np.array([self.rmin])
        th = 2 * np.pi * np.arange(self.ntheta) / self.ntheta
        return (r[:, None] * np.exp(1j * th)[None, :]).ravel()

    def refine(self) -> "DiskGrid":
        return DiskGrid(self.rmin, self.rmax, 2 * self.nr - 1, 2 * self.ntheta)

    @property
    def bounds(self):
        return (-self.rmax, self.rmax, -self.rmax, self.rmax)

    @property
    def size(self) -> int:
        return self.nr * self.ntheta


# ---------------------------------------------------------------- limits


@dataclass(frozen=True)
class LimitEstimate:
    value: complex
    error: float
    samples: tuple = field(default=())


def _neville_at_zero(s, g):
    s = list(s)
    p = list(g)
    n = len(s)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (s[i + m] * p[i] - s[i] * p[i + 1]) / (s[i + m] - s[i])
    return p[0]


def limit_estimate(f, ray_samples=None) -> LimitEstimate:
    """Extrapolate f(x)/x to x = infinity with a Cauchy-behaviour test."""
    fm = as_holomap(f)
    if ray_samples is None:
        R = DEFAULT_LIMIT_RADIUS
        ray_samples = [R, 4 * R, 16 * R]
    xs = np.asarray(ray_samples, dtype=float)
    if xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ArgumentError("ray samples must be increasing, at least two")
    if fm.domain.kind == "D":
        raise DomainError("limits at infinity need an unbounded domain")
    g = np.asarray(fm.f(xs.astype(complex)), dtype=complex) / xs
    if not np.all(np.isfinite(g)):
        raise EvaluationError("non-finite samples along the ray")
    d = np.abs(np.diff(g))
    floor = 1e-12 * (1 + np.abs(g[-1]))
    if not np.all((d[1:] <= d[:-1] * (1 - 1e-6)) | (d[1:] <= floor)):
        raise NoLimitError("f(x)/x shows no Cauchy behaviour along the ray")
    s = 1.0 / xs
    val = _neville_at_zero(s, g)
    low = _neville_at_zero(s[1:], g[1:])
    err = float(abs(val - low)) if xs.size > 2 else float(d[-1])
    return LimitEstimate(complex(val), err, tuple(complex(v) for v in g))


def angular_limit_at_infinity(f, ray_samples=None) -> complex:
    return limit_estimate(f, ray_samples).value


def tends_to_infinity(f, radii=(1e2, 1e3, 1e4, 1e5)) -> bool:
    """Heuristic test that |f(x)| grows without bound along the real axis."""
    fm = as_holomap(f)
    v = np.abs(np.asarray(fm.f(np.asarray(radii, dtype=complex)), dtype=complex))
    return bool(np.all(np.isfinite(v)) and np.all(np.diff(v) > 0) and v[-1] > 10 * v[0])


# ---------------------------------------------------------------- minimal enclosing disk


def _circle2(a, b):
    c = 0.5 * (a + b)
    return c, abs(a - c)


def _circle3(a, b, c):
    bx, by = (b - a).real, (b - a).imag
    cx, cy = (c - a).real, (c - a).imag
    d = 2 * (bx * cy - by * cx)
    if abs(d) < 1e-300:
        pairs = [(a, b), (a, c), (b, c)]
        p, q = max(pairs, key=lambda pq: abs(pq[0] - pq[1]))
        return _circle2(p, q)
    b2, c2 = bx * bx + by * by, cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    center = a + complex(ux, uy)
    return center, abs(center - a)


def min_enclosing_disk(points, seed: int = 0) -> EuclideanDisk:
    """Smallest enclosing disk, randomized incremental (Welzl), deterministic seed."""
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        raise ArgumentError("min_enclosing_disk needs at least one point")
    pts = np.unique(pts)
    rng = np.random.default_rng(seed)
    pts = [complex(p) for p in rng.permutation(pts)]
    span = max(abs(p - pts[0]) for p in pts) + abs(pts[0])
    eps = 1e-13 * max(span, 1e-300)

    def outside(p, c, r):
        return abs(p - c) > r + eps

    c, r = pts[0], 0.0
    for i in range(1, len(pts)):
        if outside(pts[i], c, r):
            c, r = pts[i], 0.0
            for j in range(i):
                if outside(pts[j], c, r):
                    c, r = _circle2(pts[i], pts[j])
                    for k in range(j):
                        if outside(pts[k], c, r):
                            c, r = _circle3(pts[i], pts[j], pts[k])
    # tiny inflation so that every input tests as contained
    r = max(r, max(abs(p - c) for p in pts))
    return EuclideanDisk(c, r)


# ---------------------------------------------------------------- reports


@dataclass
class Report:
    """Generic pass/fail report with a signed margin (<= 0 means satisfied)."""

    name: str
    passed: bool
    margin: float = float("nan")
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "margin": _jsonable(self.margin), "details": _jsonable(self.details)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if hasattr(v, "to_dict"):
        return v.to_dict()
    return v


def jsonable(v):
    return _jsonable(v)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature of a real or complex scalar function."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    # force a few initial splits so narrow features are not missed
    n = 8
    xs = np.linspace(a, b, n + 1)
    total = 0.0
    for lo, hi in zip(xs[:-1], xs[1:]):
        flo, fhi, fmid = f(lo), f(hi), f(0.5 * (lo + hi))
        total = total + rec(lo, hi, flo, fmid, fhi, simpson(flo, fmid, fhi, lo, hi), tol / n, max_depth)
    return total
