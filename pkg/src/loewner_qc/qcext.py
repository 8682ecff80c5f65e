"""Quasiconformal extensions as piecewise planar maps, plus their diagnostics."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    HALF_PLANE,
    UNIT_DISK,
    EuclideanDisk,
    HoloMap,
    Report,
    as_holomap,
    default_halfplane_grid,
    jsonable,
    min_enclosing_disk,
    schwarzian,
    tends_to_infinity,
)
from .errors import (
    ArgumentError,
    ConsistencyError,
    DegenerateError,
    HypothesisError,
    PoleError,
    StencilError,
)

DEFAULT_EPS = 1e-4
DEFAULT_RECT = (-4.0, 4.0, -4.0, 4.0)


@dataclass(eq=False)
class PlanarMap:
    """Piecewise map of a rectangle; ``seams`` are the x-values where pieces meet."""

    F: Callable
    rect: tuple = DEFAULT_RECT
    seams: tuple = (0.0,)
    right: str = ""
    left: str = ""
    rho: float = 0.0
    eps: float = DEFAULT_EPS
    holo: Optional[Callable] = None
    analytic_mu: Optional[Callable] = None
    flags: dict = field(default_factory=dict)

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(self.F(z.ravel()), dtype=complex).reshape(z.shape)
        return w[()] if w.ndim == 0 else w

    def __call__(self, z):
        return self.eval(z)

    def inside(self, z):
        z = np.asarray(z, dtype=complex)
        x0, x1, y0, y1 = self.rect
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)


def _split_eval(z, right, left):
    """Evaluate right(z) on Re z > 0 and left(z) elsewhere."""
    z = np.asarray(z, dtype=complex).ravel()
    out = np.empty(z.shape, dtype=complex)
    r = z.real > 0
    if np.any(r):
        out[r] = right(z[r])
    if np.any(~r):
        out[~r] = left(z[~r])
    return out


def _by_column(z, fn):
    """Apply fn(x, y_array) grouped over equal real parts."""
    out = np.empty(z.shape, dtype=complex)
    xs, inv = np.unique(z.real, return_inverse=True)
    for i, x in enumerate(xs):
        m = inv == i
        out[m] = fn(float(x), z[m].imag)
    return out


# ---------------------------------------------------------------- constructions


def extend_chain(c, t: float, rho: float = 0.0, eps: float = DEFAULT_EPS, rect=DEFAULT_RECT) -> PlanarMap:
    """F = f_t(z + r) on the right and f_{t-x}(r + iy) on the left, r = rho or eps."""
    if t < 0:
        raise ArgumentError("t must be >= 0")
    if rho < 0:
        raise ArgumentError("rho must be >= 0")
    r = rho if rho > 0 else eps

    def right(z):
        return c.eval(t, z + r)

    def left(z):
        return _by_column(z, lambda x, y: c.eval(t - x, r + 1j * y))

    return PlanarMap(lambda z: _split_eval(z, right, left), rect, (0.0,),
                     right=f"chain[{c.provenance}] at t={t:g}", left="chain at t - x",
                     rho=rho, eps=eps, holo=lambda z: c.eval(t, z + r))


def extend_evolution(E, s: float, t: float, rho: float = 0.0, eps: float = DEFAULT_EPS,
                     rect=DEFAULT_RECT) -> PlanarMap:
    """phi_{s,t}(z + r) on the right, g_{-x}(r + iy) on the left."""
    if not 0 <= s <= t:
        raise ArgumentError("need 0 <= s <= t")
    r = rho if rho > 0 else eps
    span = t - s

    def right(z):
        return E.evolve(s, t, z + r)

    def g(x, y):
        a = -x
        base = r + 1j * y
        if a <= span:
            return E.evolve(s + a, t, base)
        return base + span - a

    seams = (0.0,) if span == 0 else (0.0, -span)
    return PlanarMap(lambda z: _split_eval(z, right, lambda zz: _by_column(zz, g)), rect, seams,
                     right=f"evolution phi_{{{s:g},{t:g}}}", left="g_a family", rho=rho, eps=eps,
                     holo=lambda z: E.evolve(s, t, z + r))


def _boundary_values(h: HoloMap, y, eps):
    """h(iy) and h'(iy) by first-order extrapolation from Re z = eps."""
    z = eps + 1j * np.asarray(y, dtype=float)
    d1 = np.asarray(h.derivative(z, 1), dtype=complex)
    d2 = np.asarray(h.derivative(z, 2), dtype=complex)
    return h.eval(z) - eps * d1, d1 - eps * d2


def check_derivative_disk(h: HoloMap, B: EuclideanDisk, grid=None, tol: float = 1e-10):
    grid = grid or default_halfplane_grid()
    w = np.asarray(h.derivative(grid.points(), 1), dtype=complex)
    m = float(np.max(B.margin(w)))
    scale = max(1.0, abs(B.center))
    return m, m <= tol * scale


def extend_halfplane_linear(h, B: EuclideanDisk | None = None, eps: float = DEFAULT_EPS,
                            rect=DEFAULT_RECT, grid=None, check: bool = True) -> PlanarMap:
    """h on the right, h(iy) + omega x on the left, omega the geometric mean of B's extremal points."""
    h = as_holomap(h)
    if B is None:
        g = grid or default_halfplane_grid()
        B = min_enclosing_disk(np.asarray(h.derivative(g.points(), 1)))
    if not B.excludes_origin:
        raise HypothesisError("the derivative disk contains 0")
    margin = None
    if check:
        margin, ok = check_derivative_disk(h, B, grid)
        if not ok:
            raise HypothesisError(f"h' leaves the disk B by {margin:.3g}")
    omega = B.omega()

    def left(z):
        hb, _ = _boundary_values(h, z.imag, eps)
        return hb + omega * z.real

    def mu(z):
        z = np.asarray(z, dtype=complex)
        _, d = _boundary_values(h, z.imag, eps)
        return (omega - d) / (omega + d)

    return PlanarMap(lambda z: _split_eval(z, h.eval, left), rect, (0.0,),
                     right=h.name, left="linear", eps=eps, holo=h.eval, analytic_mu=mu,
                     flags={"omega": omega, "disk": B, "membership_margin": margin})


def extend_schwarzian(h, eps: float = DEFAULT_EPS, rect=DEFAULT_RECT, grid=None,
                      k: float | None = None) -> PlanarMap:
    """h on the right; h(z*) + 2h'(z*)x / (1 - Ph(z*) x) with z* = -conj(z) on the left."""
    h = as_holomap(h)
    g = grid or default_halfplane_grid()
    pts = g.points()
    ks = 2 * pts.real**2 * np.abs(schwarzian(h, pts))
    k_sample = float(np.max(ks))
    flags = {"k_sampled": k_sample, "hypothesis_ok": k_sample < 1.0 and (k is None or k_sample <= k),
             "tends_to_infinity": tends_to_infinity(h)}

    def left(z):
        x = z.real
        out = np.empty(z.shape, dtype=complex)
        on = x == 0
        if np.any(on):
            out[on], _ = _boundary_values(h, z[on].imag, eps)
        m = ~on
        if np.any(m):
            zs = -np.conj(z[m])
            xm = x[m]
            d1 = np.asarray(h.derivative(zs, 1), dtype=complex)
            P = np.asarray(h.derivative(zs, 2), dtype=complex) / d1
            den = 1 - P * xm
            bad = np.abs(den) <= 1e-14
            if np.any(bad):
                loc = complex(z[m][bad][0])
                raise PoleError(f"extension denominator vanishes at {loc}", location=loc)
            out[m] = h.eval(zs) + 2 * d1 * xm / den
        return out

    return PlanarMap(lambda z: _split_eval(z, h.eval, left), rect, (0.0,),
                     right=h.name, left="schwarzian reflection", eps=eps, holo=h.eval, flags=flags)


# ---------------------------------------------------------------- log-lift

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)
_GL_S = 0.5 * (_GL_X + 1)
_GL_W = 0.5 * _GL_W


def zfp_over_f(f: HoloMap, w):
    w = np.asarray(w, dtype=complex)
    return w * np.asarray(f.derivative(w, 1), dtype=complex) / f.eval(w)


def _log_quotient(f: HoloMap, w, log_f0: complex):
    """log(f(w)/w) by integrating along the ray from 0; single valued on the disk."""
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    w = w.ravel()
    s = _GL_S[None, :]
    pts = s * w[:, None]
    q = zfp_over_f(f, pts.ravel()).reshape(pts.shape)
    integrand = (q - 1) / s
    return (log_f0 + integrand @ _GL_W).reshape(shape)


class LogLiftMap(PlanarMap):
    """Extension in log coordinates with descent back to the w-plane."""

    def descend(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape, dtype=complex)
        nz = w != 0
        out[nz] = np.exp(-self.eval(-np.log(w[nz])))
        return out[()] if out.ndim == 0 else out

    def periodicity_residual(self, z):
        z = np.asarray(z, dtype=complex)
        return float(np.max(np.abs(self.eval(z + 2j * np.pi) - self.eval(z) - 2j * np.pi)))


def extend_log_lift(f, B: EuclideanDisk | None = None, K_bound: float = math.inf,
                    eps: float = DEFAULT_EPS, rect=(-4.0, 4.0, -4.0, 4.0), grid=None,
                    period_tol: float = 1e-8) -> LogLiftMap:
    """Lift f on the disk through h(z) = -log f(e^{-z}), extend linearly, descend."""
    from .core import DiskGrid

    f = as_holomap(f, UNIT_DISK)
    if f.domain.kind != "D":
        f = HoloMap(f.f, UNIT_DISK, f.d1, f.d2, f.d3, name=f.name)
    if abs(complex(f.eval(0.0))) > 1e-12:
        raise HypothesisError("f(0) must vanish")
    f0 = complex(f.derivative(0.0, 1))
    if f0 == 0:
        raise HypothesisError("f'(0) must be non-zero")
    log_f0 = complex(np.log(f0))
    dg = grid or DiskGrid(0.02, 0.98, 49, 128)
    samples = zfp_over_f(f, dg.points())
    if B is None:
        B = min_enclosing_disk(samples)
    elif float(np.max(B.margin(samples))) > 1e-10 * max(1.0, abs(B.center)):
        raise HypothesisError("zf'/f leaves the disk B")
    K = B.modulus_ratio()
    if K > K_bound * (1 + 1e-12):
        raise HypothesisError(f"disk gives K = {K:.6g} above the bound {K_bound:.6g}")

    def h(z):
        z = np.asarray(z, dtype=complex)
        w = np.exp(-z)
        return z - _log_quotient(f, w, log_f0)

    def h1(z):
        return zfp_over_f(f, np.exp(-np.asarray(z, dtype=complex)))

    hm = HoloMap(h, HALF_PLANE, d1=h1, name=f"loglift[{f.name}]")
    base = extend_halfplane_linear(hm, B, eps=eps, rect=rect, check=False)
    out = LogLiftMap(base.F, rect, base.seams, right=hm.name, left="linear", eps=eps,
                     holo=h, analytic_mu=base.analytic_mu,
                     flags={**base.flags, "K": K, "k": (K - 1) / (K + 1)})
    xs = np.linspace(-3.0, 3.0, 9)
    probe = (xs[:, None] + 1j * xs[None, :]).ravel()
    res = out.periodicity_residual(probe)
    out.flags["period_residual"] = res
    if res > period_tol:
        raise ConsistencyError(f"periodicity residual {res:.3g} exceeds {period_tol:g}")
    return out


# ---------------------------------------------------------------- Beltrami coefficient


def _default_step(z):
    return 1e-4 * (1 + np.abs(z))


def beltrami(F: PlanarMap, z, step=None):
    """Central-difference estimate of (D_x F + i D_y F)/(D_x F - i D_y F)."""
    z = np.asarray(z, dtype=complex)
    h = _default_step(z) if step is None else np.broadcast_to(np.asarray(step, float), z.shape)
    for xs in F.seams:
        if np.any(np.abs(z.real - xs) <= h):
            raise StencilError(f"stencil crosses the seam x = {xs:g}")
    x0, x1, y0, y1 = F.rect
    if np.any((z.real - h < x0) | (z.real + h > x1) | (z.imag - h < y0) | (z.imag + h > y1)):
        raise StencilError("stencil leaves the map's rectangle")
    st = np.stack([z + h, z - h, z + 1j * h, z - 1j * h])
    v = F.eval(st)
    dx = (v[0] - v[1]) / (2 * h)
    dy = (v[2] - v[3]) / (2 * h)
    num = dx + 1j * dy
    den = dx - 1j * dy
    scale = np.abs(dx) + np.abs(dy)
    if np.any(np.abs(den) <= 1e-14 * scale) or np.any(scale == 0):
        raise DegenerateError("Jacobian-type denominator vanished")
    mu = num / den
    return mu[()] if mu.ndim == 0 else mu


@dataclass
class DilatationReport:
    points: np.ndarray
    values: np.ndarray
    mu: np.ndarray
    sup_abs_mu: float
    k_target: float
    tol: float
    step: object
    skipped: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.sup_abs_mu <= self.k_target + self.tol

    CSV_HEADER = ("x", "y", "reF", "imF", "reMu", "imMu", "absMu")

    def rows(self):
        for z, w, m in zip(self.points, self.values, self.mu):
            yield (z.real, z.imag, w.real, w.imag, m.real, m.imag, abs(m))

    def write_csv(self, path_or_file):
        def dump(fh):
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(self.CSV_HEADER)
            for row in self.rows():
                wr.writerow([repr(float(v)) for v in row])
        if hasattr(path_or_file, "write"):
            dump(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                dump(fh)

    def to_dict(self):
        return jsonable({"sup_abs_mu": self.sup_abs_mu, "k_target": self.k_target,
                         "tol": self.tol, "passed": self.passed, "samples": len(self.points),
                         "skipped": self.skipped, "violations": self.violations[:20],
                         "note": "grid supremum is a sampled surrogate for the essential supremum"})


def dilatation_report(F: PlanarMap, grid, k_target: float, step=None, tol: float = 1e-3,
                      threads: int | None = None, chunk: int = 512) -> DilatationReport:
    """Sampled |mu| over the grid; points inside a seam band of 2*step are skipped."""
    z = grid.points()
    h = _default_step(z) if step is None else np.broadcast_to(np.asarray(step, float), z.shape)
    keep = np.ones(z.shape, bool)
    for xs in F.seams:
        keep &= np.abs(z.real - xs) > 2 * h
    x0, x1, y0, y1 = F.rect
    keep &= (z.real - h >= x0) & (z.real + h <= x1) & (z.imag - h >= y0) & (z.imag + h <= y1)
    zk, hk = z[keep], h[keep]
    parts = [(zk[i:i + chunk], hk[i:i + chunk]) for i in range(0, len(zk), chunk)]

    def work(args):
        zz, hh = args
        return beltrami(F, zz, hh), F.eval(zz)

    if threads and threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(work, parts))
    else:
        res = [work(p) for p in parts]
    mu = np.concatenate([r[0] for r in res]) if res else np.array([], complex)
    vals = np.concatenate([r[1] for r in res]) if res else np.array([], complex)
    absmu = np.abs(mu)
    sup = float(np.max(absmu)) if absmu.size else 0.0
    viol = [(complex(a), float(b)) for a, b in zip(zk[absmu > k_target + tol], absmu[absmu > k_target + tol])]
    return DilatationReport(zk, vals, mu, sup, k_target, tol, step if step is not None else "1e-4*(1+|z|)",
                            int(np.count_nonzero(~keep)), viol)


# ---------------------------------------------------------------- injectivity and seam


def injectivity_check(F, grid) -> Report:
    z = grid.points()
    w = F.eval(z) if isinstance(F, PlanarMap) else np.asarray(F(z), dtype=complex)
    i, j = np.triu_indices(len(z), 1)
    ratio = np.abs(w[i] - w[j]) / np.abs(z[i] - z[j])
    scale = float(np.median(ratio))
    mn = float(np.min(ratio))
    k = int(np.argmin(ratio))
    passed = scale > 0 and mn > 1e-10 * scale
    return Report("injectivity", passed, (1e-10 * scale - mn) if scale > 0 else math.inf,
                  {"min_ratio": mn, "scale": scale, "worst_pair": (complex(z[i[k]]), complex(z[j[k]])),
                   "pairs": len(i)})


def seam_check(F: PlanarMap, y_samples, eps_schedule=(1e-1, 1e-2, 1e-3), seam: float = 0.0) -> Report:
    """Jump across a seam, each side linearly extrapolated to the seam from distances e and 2e."""
    y = np.asarray(y_samples, dtype=float)
    base = seam + 1j * y
    residuals = []
    for e in eps_schedule:
        r1, r2 = F.eval(base + e), F.eval(base + 2 * e)
        l1, l2 = F.eval(base - e), F.eval(base - 2 * e)
        jump = (2 * r1 - r2) - (2 * l1 - l2)
        residuals.append(float(np.max(np.abs(jump))))
    scale = max(1.0, float(np.median(np.abs(F.eval(base + eps_schedule[-1])))))
    floor = 1e-12 * scale
    decreasing = all(b < a or b <= floor for a, b in zip(residuals[:-1], residuals[1:]))
    final_ok = residuals[-1] <= 1e-4 * scale
    return Report("seam", decreasing and final_ok, residuals[-1] - 1e-4 * scale,
                  {"eps": list(eps_schedule), "residuals": residuals, "scale": scale,
                   "decreasing": decreasing})
