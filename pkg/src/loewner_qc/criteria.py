"""Sampled checks of extendibility criteria; each returns the smallest k the samples allow."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    UNIT_DISK,
    DiskGrid,
    EuclideanDisk,
    HoloMap,
    HyperbolicDisk,
    as_holomap,
    default_halfplane_grid,
    hyperbolic_distance,
    jsonable,
    min_enclosing_disk,
)
from .errors import HypothesisError, SingularDerivativeError

INF = math.inf


@dataclass
class CriterionReport:
    criterion: str
    k_min: float
    value: float
    worst_point: Optional[complex] = None
    margin: Optional[float] = None
    target: Optional[float] = None
    samples: int = 0
    skipped: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return math.isfinite(self.k_min)

    @property
    def passed(self) -> bool:
        if self.target is None:
            return self.admissible
        return self.admissible and self.k_min <= self.target

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["admissible"] = self.admissible
        d["passed"] = self.passed
        return jsonable(d)


def _disk_points(grid):
    return (grid or DiskGrid(0.01, 0.99, 50, 128)).points()


def _sup_report(name, z, vals, target, skipped=0, extra=None, admissible_below=1.0):
    vals = np.asarray(vals, dtype=float)
    i = int(np.argmax(vals))
    v = float(vals[i])
    # k = 1 is kept as the univalence-only endpoint
    k = v if v <= admissible_below * (1 + 1e-12) else INF
    rep = CriterionReport(name, k, v, complex(z[i]), None, target, len(z), skipped, extra or {})
    if target is not None:
        rep.margin = v - target
    return rep


def _deriv(h: HoloMap, z, order):
    # constant derivatives come back as scalars
    return np.broadcast_to(np.asarray(h.derivative(z, order), dtype=complex), z.shape)


def _ratio(h: HoloMap, z, num_order, den_order=1):
    """h^(num)/h^(den) with samples where h' vanishes removed."""
    d1 = _deriv(h, z, den_order)
    dn = _deriv(h, z, num_order)
    ok = np.abs(d1) > 1e-14 * np.maximum(1.0, np.abs(dn))
    return dn, d1, ok


def becker_pommerenke_k(h, grid=None, target: float | None = None) -> CriterionReport:
    """sup 2 Re z |h''/h'|."""
    h = as_holomap(h)
    z = (grid or default_halfplane_grid()).points()
    d2, d1, ok = _ratio(h, z, 2)
    vals = 2 * z.real[ok] * np.abs(d2[ok] / d1[ok])
    return _sup_report("becker-pommerenke", z[ok], vals, target, int(np.count_nonzero(~ok)))


def nehari_qc_k(h, grid=None, target: float | None = None) -> CriterionReport:
    """sup 2 (Re z)^2 |Sh|."""
    h = as_holomap(h)
    z = (grid or default_halfplane_grid()).points()
    d1 = _deriv(h, z, 1)
    d2 = _deriv(h, z, 2)
    d3 = _deriv(h, z, 3)
    ok = np.abs(d1) > 1e-14 * np.maximum(1.0, np.abs(d2))
    P = d2[ok] / d1[ok]
    S = d3[ok] / d1[ok] - 1.5 * P * P
    vals = 2 * z.real[ok] ** 2 * np.abs(S)
    return _sup_report("nehari-qc", z[ok], vals, target, int(np.count_nonzero(~ok)))


def disk_k(B: EuclideanDisk):
    """(K, k) for max over w, z in B of sqrt|w/z|; infinite when 0 is in B."""
    if not B.excludes_origin:
        return INF, INF
    K = B.modulus_ratio()
    return K, (K - 1) / (K + 1)


def derivative_disk_k(h, grid=None, target: float | None = None) -> CriterionReport:
    """Fit the smallest enclosing disk B to h' samples and derive K, k and omega."""
    h = as_holomap(h)
    z = (grid or default_halfplane_grid()).points()
    w = _deriv(h, z, 1)
    B = min_enclosing_disk(w)
    K, k = disk_k(B)
    extra = {"disk": {"center": B.center, "radius": B.radius}, "K": K}
    worst = complex(z[int(np.argmax(np.abs(w - B.center)))])
    if math.isfinite(k):
        w1, w2 = B.extremal_points()
        extra.update(w1=w1, w2=w2, omega=B.omega())
    rep = CriterionReport("derivative-disk", k, k, worst, None, target, len(z), 0, extra)
    if target is not None:
        rep.margin = k - target
    rep.extra["B"] = B
    return rep


def zf_over_f_check(f, K_target: float | None = None, grid: DiskGrid | None = None) -> CriterionReport:
    """Fit a disk to zf'/f on the punctured disk and report the implied K."""
    f = as_holomap(f, UNIT_DISK)
    g = grid or DiskGrid(0.01, 0.999, 60, 256)
    z = g.points()
    fv = f.eval(z)
    if np.any(np.abs(fv) <= 1e-300):
        raise HypothesisError("f vanishes away from the origin")
    if abs(complex(f.eval(0.0))) > 1e-12:
        raise HypothesisError("f(0) must vanish")
    q = z * _deriv(f, z, 1) / fv
    B = min_enclosing_disk(q)
    K, k = disk_k(B)
    # probe closer to the unit circle: a gap to 0 that keeps shrinking means 0 is on the closure
    rim = (1 - (1 - g.rmax) / 10) * np.exp(2j * np.pi * np.arange(4 * g.ntheta) / (4 * g.ntheta))
    qr = rim * _deriv(f, rim, 1) / f.eval(rim)
    B2 = min_enclosing_disk(np.concatenate([q, qr]))
    gap1 = abs(B.center) - B.radius
    gap2 = abs(B2.center) - B2.radius
    degenerate = gap1 > 0 and gap2 < gap1 / 5
    if degenerate:
        K, k = INF, INF
    extra = {"disk": {"center": B.center, "radius": B.radius}, "K": K, "gap_to_origin": [gap1, gap2],
             "boundary_degenerate": degenerate, "K_target": K_target}
    rep = CriterionReport("zf-over-f", k, K, complex(z[int(np.argmax(np.abs(q - B.center)))]),
                          None, None, len(z), 0, extra)
    if K_target is not None:
        rep.margin = K - K_target
        rep.target = (K_target - 1) / (K_target + 1)
    rep.extra["B"] = B
    return rep


def _hyperbolic_membership(name, z, vals, D: HyperbolicDisk, target):
    ok = vals.real > 0
    if not np.all(ok):
        bad = complex(z[~ok][0])
        return CriterionReport(name, INF, INF, bad, INF, target, len(z), 0,
                               {"reason": "expression leaves the right half-plane", "at": bad})
    dist = hyperbolic_distance(D.center, vals)
    i = int(np.argmax(dist))
    dmax = float(dist[i])
    margin = dmax - D.radius
    extra = {"disk_K": D.K, "disk_k": D.implied_k, "max_distance": dmax, "inside": margin <= 1e-10}
    return CriterionReport(name, math.tanh(dmax), dmax, complex(z[i]), margin, target, len(z), 0, extra)


def qc2_check(h, a: complex, D: HyperbolicDisk, grid=None, target: float | None = None) -> CriterionReport:
    """(h + a)/h' - z against the hyperbolic disk D."""
    h = as_holomap(h)
    z = (grid or default_halfplane_grid()).points()
    d1 = _deriv(h, z, 1)
    if np.any(np.abs(d1) <= 1e-300):
        raise SingularDerivativeError("h' vanishes on the grid")
    vals = (h.eval(z) + a) / d1 - z
    rep = _hyperbolic_membership("qc2", z, vals, D, target)
    if target is None:
        rep.target = D.implied_k
    return rep


def ab_check(h, f, D: HyperbolicDisk, grid=None, target: float | None = None) -> CriterionReport:
    """Joint check of f/f' - z in D and 1/(h'f) - z in D."""
    h = as_holomap(h)
    f = as_holomap(f)
    z = (grid or default_halfplane_grid()).points()
    fv = f.eval(z)
    f1 = _deriv(f, z, 1)
    h1 = _deriv(h, z, 1)
    if np.any(fv == 0) or np.any(f1 == 0) or np.any(h1 == 0):
        raise HypothesisError("f, f' or h' vanishes on the grid")
    ra = _hyperbolic_membership("ab:A", z, fv / f1 - z, D, target)
    rb = _hyperbolic_membership("ab:B", z, 1 / (h1 * fv) - z, D, target)
    worst = ra if ra.value >= rb.value else rb
    margin = max(ra.margin, rb.margin)
    return CriterionReport("ab", max(ra.k_min, rb.k_min), max(ra.value, rb.value), worst.worst_point,
                           margin, target if target is not None else D.implied_k, len(z), 0,
                           {"A": ra.to_dict(), "B": rb.to_dict(), "inside": margin <= 1e-10})


def psi_prime_k(psi, grid: DiskGrid | None = None, target: float | None = None) -> CriterionReport:
    """sup |(1 - psi')/(1 + zeta psi')| over the disk."""
    psi = as_holomap(psi, UNIT_DISK)
    z = _disk_points(grid)
    d = _deriv(psi, z, 1)
    den = 1 + z * d
    ok = np.abs(den) > 1e-14
    vals = np.abs((1 - d[ok]) / den[ok])
    return _sup_report("psi-prime", z[ok], vals, target, int(np.count_nonzero(~ok)))


def necessary_bound_check(h, k: float | None = None, grid=None) -> CriterionReport:
    """sup Re z |h''/h'| / 3: a lower bound for any admissible k."""
    h = as_holomap(h)
    z = (grid or default_halfplane_grid()).points()
    d2, d1, ok = _ratio(h, z, 2)
    vals = z.real[ok] * np.abs(d2[ok] / d1[ok]) / 3
    i = int(np.argmax(vals))
    lb = float(vals[i])
    extra = {"lower_bound_k": lb, "univalence_contradicted": lb > 1.0}
    if k is not None:
        extra["excludes_k"] = lb > k
    rep = CriterionReport("necessary-bound", lb if lb <= 1 else INF, lb, complex(z[ok][i]),
                          None if k is None else lb - k, k, len(z), int(np.count_nonzero(~ok)), extra)
    return rep
