import math

import numpy as np
import pytest

from loewner_qc.core import (
    HALF_PLANE,
    UNIT_DISK,
    DiskGrid,
    Domain,
    EuclideanDisk,
    Grid,
    HoloMap,
    HyperbolicDisk,
    UkRegion,
    adaptive_simpson,
    angular_limit_at_infinity,
    cauchy_derivative,
    default_halfplane_grid,
    hyperbolic_distance,
    limit_estimate,
    min_enclosing_disk,
    pre_schwarzian,
    schwarzian,
    tends_to_infinity,
)
from loewner_qc.errors import ArgumentError, DomainError, NoLimitError, SingularDerivativeError


def test_domain_tags_and_membership():
    assert HALF_PLANE.tag == "halfplane"
    assert UNIT_DISK.tag == "disk"
    assert Domain("H", 1.0).contains(1.5 + 0j)
    assert not Domain("H", 1.0).contains(0.5 + 0j)
    with pytest.raises(DomainError):
        HALF_PLANE.require(np.array([1.0, -1.0]))
    with pytest.raises(ArgumentError):
        Domain("X")


@pytest.mark.parametrize("order", [1, 2, 3])
def test_cauchy_matches_symbolic(order):
    rng = np.random.default_rng(1)
    z = rng.uniform(0.2, 3, 20) + 1j * rng.uniform(-3, 3, 20)
    exact = {1: np.exp(z) * (1 + z), 2: np.exp(z) * (2 + z), 3: np.exp(z) * (3 + z)}[order]
    got = cauchy_derivative(lambda w: w * np.exp(w), z, order)
    assert np.max(np.abs(got - exact) / np.abs(exact)) < 1e-10


def test_cauchy_outside_domain_rejected():
    with pytest.raises(DomainError):
        cauchy_derivative(lambda w: w, -1.0 + 0j)


def test_schwarzian_mobius_invariance():
    rng = np.random.default_rng(2)
    f = HoloMap(lambda z: np.log(z) + z**2)
    z = np.array([1 + 1j, 2 - 0.5j, 0.7 + 2j])
    base = schwarzian(f, z)
    for _ in range(5):
        a, b, d = rng.normal(size=3) + 1j * rng.normal(size=3)
        # keep the pole of T well away from the values of f near z
        c = 0.05 * (rng.normal() + 1j * rng.normal())
        d = d / abs(d) * 3
        g = HoloMap(lambda w, a=a, b=b, c=c, d=d: (a * f(w) + b) / (c * f(w) + d))
        assert np.max(np.abs(schwarzian(g, z) - base)) < 1e-8 * max(1, np.max(np.abs(base)))


def test_schwarzian_of_log():
    z = np.array([1.0 + 0j, 2 + 3j])
    assert np.allclose(schwarzian(HoloMap(np.log), z), 1 / (2 * z**2), rtol=1e-10)
    assert np.allclose(pre_schwarzian(HoloMap(np.log), z), -1 / z, rtol=1e-10)


def test_singular_derivative_detected():
    with pytest.raises(SingularDerivativeError):
        pre_schwarzian(HoloMap(lambda z: (z - 1) ** 2), 1.0 + 0j)


def test_hyperbolic_distance_invariance():
    rng = np.random.default_rng(3)
    z1 = rng.uniform(0.1, 5, 50) + 1j * rng.uniform(-5, 5, 50)
    z2 = rng.uniform(0.1, 5, 50) + 1j * rng.uniform(-5, 5, 50)
    d = hyperbolic_distance(z1, z2)
    assert np.allclose(hyperbolic_distance(3.7 * z1, 3.7 * z2), d, atol=1e-12)
    assert np.allclose(hyperbolic_distance(z1 + 2.5j, z2 + 2.5j), d, atol=1e-12)
    # along the real axis the metric |dz|/(2x) gives half the log ratio
    assert hyperbolic_distance(1.0, math.e**2) == pytest.approx(1.0, abs=1e-12)


def test_hyperbolic_disk_round_trip():
    D = HyperbolicDisk(1.3 + 0.4j, 0.35)
    E = D.to_euclidean()
    D2 = HyperbolicDisk.from_euclidean(E)
    assert abs(D2.center - D.center) < 1e-12 and abs(D2.radius - D.radius) < 1e-12
    w = E.center + E.radius * np.exp(1j * np.linspace(0, 2 * np.pi, 17))
    assert np.allclose(hyperbolic_distance(D.center, w), D.radius, atol=1e-10)
    assert D.K == pytest.approx(math.exp(0.7))
    assert D.implied_k == pytest.approx((D.K - 1) / (D.K + 1))


def test_uk_forms_agree():
    rng = np.random.default_rng(4)
    w = rng.uniform(0, 6, 10_000) + 1j * rng.uniform(-4, 4, 10_000)
    for k in (0.1, 0.4, 0.8):
        U = UkRegion(k)
        assert np.array_equal(U.contains(w), U.contains_euclidean(w))
        H = U.to_hyperbolic()
        assert np.array_equal(U.contains(w), H.contains(w, tol=1e-12))


def test_uk_rejects_bad_k():
    with pytest.raises(ArgumentError):
        UkRegion(1.0)


def test_euclidean_disk_geometry():
    B = EuclideanDisk(1.0, 0.6)
    assert B.omega() == pytest.approx(math.sqrt(1 - 0.36))
    assert B.modulus_ratio() == pytest.approx(2.0)
    w1, w2 = B.extremal_points()
    assert {round(w1.real, 12), round(w2.real, 12)} == {0.4, 1.6}
    assert not EuclideanDisk(1.0, 1.0).excludes_origin
    # omega for a disk off the real axis keeps the argument of the center
    C = EuclideanDisk(-2j, 1.0)
    assert C.omega() == pytest.approx(-math.sqrt(3) * 1j)


@pytest.mark.parametrize("pts,center,radius", [
    ([1.0], 1.0, 0.0),
    ([0.0, 2.0], 1.0, 1.0),
    ([1.5, 0.5, 1 + 0.5j, 1 - 0.5j], 1.0, 0.5),
])
def test_min_enclosing_disk_examples(pts, center, radius):
    B = min_enclosing_disk(np.array(pts, dtype=complex))
    assert abs(B.center - center) < 1e-12 and abs(B.radius - radius) < 1e-12


def test_min_enclosing_disk_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p = rng.normal(size=12) + 1j * rng.normal(size=12)
        B = min_enclosing_disk(p)
        best = math.inf
        n = len(p)
        for i in range(n):
            for j in range(i + 1, n):
                c = (p[i] + p[j]) / 2
                r = abs(p[i] - c)
                if np.all(np.abs(p - c) <= r + 1e-12):
                    best = min(best, r)
                for m in range(j + 1, n):
                    a, b, cc = p[i], p[j], p[m]
                    d = 2 * (a.real * (b.imag - cc.imag) + b.real * (cc.imag - a.imag) + cc.real * (a.imag - b.imag))
                    if abs(d) < 1e-14:
                        continue
                    ux = (abs(a)**2 * (b.imag - cc.imag) + abs(b)**2 * (cc.imag - a.imag) + abs(cc)**2 * (a.imag - b.imag)) / d
                    uy = (abs(a)**2 * (cc.real - b.real) + abs(b)**2 * (a.real - cc.real) + abs(cc)**2 * (b.real - a.real)) / d
                    o = complex(ux, uy)
                    r = abs(a - o)
                    if np.all(np.abs(p - o) <= r + 1e-12):
                        best = min(best, r)
        assert B.radius == pytest.approx(best, rel=1e-10)
        assert np.all(np.abs(p - B.center) <= B.radius * (1 + 1e-12))


def test_min_enclosing_disk_deterministic_and_empty():
    p = np.exp(1j * np.linspace(0, 6, 40)) * np.linspace(1, 2, 40)
    assert min_enclosing_disk(p).center == min_enclosing_disk(p).center
    with pytest.raises(ArgumentError):
        min_enclosing_disk(np.array([], dtype=complex))


def test_grids():
    g = Grid(0, 1, -1, 1, 3, 5)
    assert g.points().shape == (15,)
    r = g.refine()
    assert (r.nx, r.ny) == (5, 9)
    assert set(np.round(g.points(), 12)) <= set(np.round(r.points(), 12))
    d = default_halfplane_grid()
    assert d.xs()[0] == pytest.approx(1e-3) and d.xs()[-1] == pytest.approx(1e3)
    assert np.any(d.ys() == 0)
    dg = DiskGrid(0.1, 0.9, 5, 16)
    assert np.all(np.abs(dg.points()) < 1)
    assert set(np.round(dg.points(), 12)) <= set(np.round(dg.refine().points(), 12))


def test_angular_limits():
    # the quotient f(x)/x along the positive axis
    assert angular_limit_at_infinity(lambda z: 3 * z + 1 + 1 / z) == pytest.approx(3.0, abs=1e-9)
    assert abs(angular_limit_at_infinity(lambda z: z + 1)) == pytest.approx(1.0, abs=1e-12)
    assert abs(angular_limit_at_infinity(lambda z: 7 + 0j * z)) < 1e-9
    est = limit_estimate(lambda z: 2 * z + 5 + 1j / z)
    assert abs(est.value - 2) < 1e-9
    with pytest.raises(NoLimitError):
        limit_estimate(lambda z: z**1.5)
    assert tends_to_infinity(lambda z: z**0.5)
    assert not tends_to_infinity(lambda z: 1 / z)


def test_adaptive_simpson():
    assert adaptive_simpson(np.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert adaptive_simpson(lambda x: x**3, -1, 2) == pytest.approx(3.75, abs=1e-12)
