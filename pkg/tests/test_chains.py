import math

import numpy as np
import pytest

from loewner_qc.chains import (
    chain_becker_pommerenke,
    chain_criteria_report,
    chain_exponential,
    chain_from_closed_form,
    chain_schwarzian,
    chain_starlike_infinity,
    chain_translation,
    compatibility_residual,
    pde_residual,
    univalence_radius,
)
from loewner_qc.core import UNIT_DISK, Grid, HoloMap, HyperbolicDisk, UkRegion
from loewner_qc.errors import DomainError, PoleError
from loewner_qc.evolution import EvolutionFamily
from loewner_qc.expr import holomap_from_expr
from loewner_qc.gallery import build
from loewner_qc.herglotz import field_from_expr, membership_report, validate

ZS = np.array([1 + 1j, 0.3 - 0.5j, 2.5 + 3j])
G40 = Grid(1e-2, 1e2, -20, 20, 40, 40, logx=True)


def _c(k):
    return 2 * k / (1 + k * k)


def test_bp_identity():
    c = chain_becker_pommerenke(holomap_from_expr("z"))
    assert np.allclose(c.eval(0.7, ZS), ZS - 0.7)
    assert np.allclose(c.field.eval(ZS, 0.7), 1.0)


def test_bp_power():
    h = holomap_from_expr("(z+1)^0.8")
    c = chain_becker_pommerenke(h)
    assert np.allclose(c.field.eval(ZS, 0.0), 1.0)
    assert membership_report(c.field, UkRegion(0.4), G40, [0.1, 1.0, 10.0]).passed
    assert pde_residual(c, 1 + 1j, 0.5) <= 1e-7
    # numeric time derivative as an independent check
    assert pde_residual(c, 1 + 1j, 0.5, dt_step=1e-4) <= 1e-7
    assert np.allclose(c.eval(0.0, ZS), h.eval(ZS))


def test_bp_and_schwarzian_agree_at_zero():
    h = holomap_from_expr("z + 0.1*z/(z+1)")
    a, b = chain_becker_pommerenke(h), chain_schwarzian(h)
    assert np.allclose(a.eval(0.0, ZS), b.eval(0.0, ZS), atol=1e-14)


def test_schwarzian_chain_affine_and_log():
    aff = chain_schwarzian(holomap_from_expr("(2+1i)*z + 3"))
    assert np.allclose(aff.field.eval(ZS, 1.3), 1.0)
    lg = chain_schwarzian(holomap_from_expr("log(z)"))
    assert np.allclose(lg.field.eval(ZS, 0.0), 1.0)
    grid = Grid(0.05, 5, -5, 5, 9, 9).points()
    for t in np.linspace(0, 2, 5):
        assert np.max(pde_residual(lg, grid, t)) <= 1e-7


def test_schwarzian_pole_detected():
    # h''/h' = -2 for h = exp(-2z), so 1 + t h''/h' vanishes identically at t = 1/2
    c = chain_schwarzian(holomap_from_expr("exp(-2*z)"))
    with pytest.raises(PoleError):
        c.eval(0.5, ZS)


def test_translation_examples():
    ident = chain_translation(holomap_from_expr("z"), 1.0)
    assert np.allclose(ident.eval(1.5, ZS), ZS - 1.5)
    assert np.max(pde_residual(ident, ZS, 1.0)) < 1e-15
    k = 0.5
    c = _c(k)
    omega = math.sqrt(1 - c * c)
    ch = chain_translation(holomap_from_expr("z + c*exp(-z)", {"c": c}), omega, k)
    assert membership_report(ch.field, UkRegion(k), G40, [0.0]).passed
    E = EvolutionFamily(ch.field)
    rng = np.random.default_rng(1)
    for _ in range(5):
        s = rng.uniform(0, 2)
        t = s + rng.uniform(0, 2)
        z = rng.uniform(0.1, 3) + 1j * rng.uniform(-3, 3)
        assert compatibility_residual(ch, E, s, t, z) <= 1e-6


def test_exponential_chain_sqrt_shift():
    case = build("sqrt-shift", {"alpha": 1.0})
    h, D = case.objects["h"], case.objects["disk"]
    ch = chain_exponential(h, D, Grid(0.01, 50, -20, 20, 30, 30, logx=True))
    assert ch.flags["membership_ok"]
    assert np.max(pde_residual(ch, Grid(0.1, 5, -3, 3, 8, 8).points(), 0.7)) <= 1e-7
    assert D.K == pytest.approx(math.sqrt(2))


def test_exponential_identity_fails_membership():
    ch = chain_exponential(holomap_from_expr("z"), HyperbolicDisk(1.0, 0.3), Grid(0.1, 5, -3, 3, 5, 5))
    assert ch.flags["membership_ok"] is False


def test_starlike_chain():
    h = holomap_from_expr("log(z+1)")
    f = holomap_from_expr("z + 1")
    ch = chain_starlike_infinity(h, f)
    assert np.allclose(ch.eval(0.0, ZS), h.eval(ZS))
    assert validate(ch.field, Grid(0.01, 50, -20, 20, 15, 15, logx=True), [0.0, 1.0, 3.0]).passed
    assert np.max(pde_residual(ch, ZS, 0.8)) <= 1e-7
    E = EvolutionFamily(ch.field)
    assert compatibility_residual(ch, E, 0.2, 1.4, 1 + 1j) <= 1e-6


def test_pde_residual_order():
    # chains without analytic dt: the central difference error is O(step^2)
    p = field_from_expr("z + 1")
    curved = chain_from_closed_form(lambda t, z: np.exp(-t) * (z + 1), p)
    r1 = pde_residual(curved, 1 + 1j, 1.0, dt_step=1e-2)
    r2 = pde_residual(curved, 1 + 1j, 1.0, dt_step=5e-3)
    assert r2 == pytest.approx(r1 / 4, rel=1e-2)
    # linear in t, so the difference quotient is exact up to rounding
    lin = chain_from_closed_form(lambda t, z: -t + np.log(z + 1), p)
    assert pde_residual(lin, 1 + 1j, 1.0, dt_step=1e-3) < 1e-9


def test_disk_chain_rejected():
    ellipse = build("ellipse-radial", {"k": 0.3}).objects["chain"]
    assert ellipse.domain is UNIT_DISK
    with pytest.raises(DomainError):
        pde_residual(ellipse, 0.1 + 0j, 0.1)
    with pytest.raises(DomainError):
        chain_criteria_report(ellipse)


def test_univalence_radius_examples():
    ident = univalence_radius(HoloMap(lambda z: z), 1.0)
    assert ident == pytest.approx(0.99)
    assert univalence_radius(HoloMap(lambda z: z * z), 1.0) == pytest.approx(0.99)
    r = univalence_radius(HoloMap(np.exp), 1 + 3j, metric="hyperbolic")
    # the Euclidean diameter of the next disk in the schedule exceeds 2 pi
    e = HyperbolicDisk(1 + 3j, 2 * r).to_euclidean()
    assert 2 * e.radius > 2 * math.pi and r > 0


def test_chain_criteria_examples():
    k = 0.25
    c = _c(k)
    ch = chain_translation(holomap_from_expr("z + c*exp(-z)", {"c": c}), (1 - k * k) / (1 + k * k), k)
    rep = chain_criteria_report(ch)
    assert rep.passed
    s = rep.details["strip"]
    assert s["C1"] == pytest.approx((1 - k) / (1 + k), rel=1e-5) and s["C2"] == pytest.approx((1 + k) / (1 - k), rel=1e-5)
    ranges = build("range-counterexamples").objects["chains"]
    up = chain_criteria_report(ranges[0])
    low = chain_criteria_report(ranges[1])
    assert not up.passed and not up.details["strip"]["upper_passed"]
    assert not low.passed and not low.details["strip"]["lower_passed"]
