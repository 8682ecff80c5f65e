import math

import pytest

from loewner_qc.core import DiskGrid, EuclideanDisk, Grid, HyperbolicDisk
from loewner_qc.criteria import (
    ab_check,
    becker_pommerenke_k,
    derivative_disk_k,
    disk_k,
    necessary_bound_check,
    nehari_qc_k,
    psi_prime_k,
    qc2_check,
    zf_over_f_check,
)
from loewner_qc.errors import HypothesisError
from loewner_qc.expr import holomap_from_expr as H
from loewner_qc.gallery import build

SMALL = Grid(1e-2, 1e2, -20, 20, 31, 31, logx=True)


def test_affine_gives_zero():
    h = H("(2-1i)*z + 4")
    assert becker_pommerenke_k(h).k_min == 0
    assert nehari_qc_k(h).k_min == 0
    assert derivative_disk_k(h).k_min == pytest.approx(0, abs=1e-12)


def test_becker_pommerenke_power():
    rep = becker_pommerenke_k(H("(z+1)^0.8"), target=0.4)
    # 0.4 x/|z+1| is largest at the far end of the real axis: x = 1000
    assert rep.value == pytest.approx(0.4 * 1000 / 1001, rel=1e-10)
    assert rep.passed and rep.margin < 0


def test_refinement_is_monotone():
    h = H("(z+1)^0.8")
    coarse = becker_pommerenke_k(h, SMALL).value
    fine = becker_pommerenke_k(h, SMALL.refine()).value
    assert fine >= coarse


def test_nehari_log_is_endpoint():
    rep = nehari_qc_k(H("log(z)"))
    assert rep.value == pytest.approx(1.0, abs=1e-12)
    assert rep.admissible


def test_rational_example_at_five():
    h = H("z - a/(1+a*z)", {"a": 5.0})
    bp = becker_pommerenke_k(h)
    assert not bp.admissible and bp.value > 1
    dd = derivative_disk_k(h)
    assert dd.admissible and 0 < dd.k_min < 1


def test_derivative_disk_translation_family():
    for k in (0.25, 0.5):
        c = 2 * k / (1 + k * k)
        rep = derivative_disk_k(H("z + c*exp(-z)", {"c": c}))
        # h' = 1 - c e^{-z} fills the disk |w - 1| < c; the grid only samples it
        assert rep.k_min == pytest.approx(k, rel=5e-3)
        assert rep.k_min <= k + 1e-12


def test_derivative_disk_invariance():
    h = H("z + 0.3*exp(-z)")
    base = derivative_disk_k(h, SMALL).k_min
    assert derivative_disk_k(H("z + 0.3*exp(-z) + 3"), SMALL).k_min == pytest.approx(base, abs=1e-12)
    assert derivative_disk_k(H("(2+1i)*(z + 0.3*exp(-z))"), SMALL).k_min == pytest.approx(base, rel=1e-10)


def test_disk_k_oracle():
    K, k = disk_k(EuclideanDisk(1.0, 0.6))
    assert K == pytest.approx(2.0) and k == pytest.approx(1 / 3)
    assert disk_k(EuclideanDisk(1.0, 1.5)) == (math.inf, math.inf)


def test_zf_over_f_examples():
    ident = zf_over_f_check(H("z"), K_target=1.0)
    assert ident.k_min == pytest.approx(0, abs=1e-12) and ident.passed
    # zf'/f = 1 + z reaches 0 on the circle
    deg = zf_over_f_check(H("z*exp(z)"))
    assert deg.extra["boundary_degenerate"] and not deg.admissible
    c = 0.5
    rep = zf_over_f_check(H("z*exp(c*z)", {"c": c}))
    assert rep.value == pytest.approx(math.sqrt((1 + c) / (1 - c)), rel=2e-3)
    with pytest.raises(HypothesisError):
        zf_over_f_check(H("z + 1"))


def test_qc2_examples():
    rep = qc2_check(H("exp(z)"), 1.0, HyperbolicDisk(1.0, 0.5), grid=Grid(1e-2, 10, -3, 3, 9, 9, logx=True))
    assert not rep.admissible and "half-plane" in rep.extra["reason"]
    case = build("sqrt-shift", {"alpha": 1.0})
    D = case.objects["disk"]
    ok = qc2_check(case.objects["h"], 0.0, D, grid=SMALL)
    assert ok.passed and ok.margin <= 1e-10


def test_ab_examples():
    # f/f' - z = 1 and 1/(h'f) - z = 1 identically
    rep = ab_check(H("-1/(z+1)"), H("z + 1"), HyperbolicDisk(1.0, 0.1), grid=SMALL)
    assert rep.k_min == pytest.approx(0, abs=1e-12) and rep.extra["inside"]
    bad = ab_check(H("z"), H("z + 1"), HyperbolicDisk(1.0, 0.1), grid=SMALL)
    assert not bad.admissible


def test_psi_prime_examples():
    assert psi_prime_k(H("z")).k_min == 0
    assert psi_prime_k(H("0*z")).k_min == pytest.approx(1.0)
    # the sup of 0.5/|1 + 0.5 z| on the grid sits at z = -0.99
    assert psi_prime_k(H("0.5*z")).value == pytest.approx(0.5 / (1 - 0.495), rel=1e-12)
    g = DiskGrid(0.01, 0.9, 10, 16)
    assert psi_prime_k(H("0.5*z"), g).value < psi_prime_k(H("0.5*z")).value


def test_necessary_bound_examples():
    rep = necessary_bound_check(H("1/z^1.3"), k=0.5)
    assert rep.value == pytest.approx(2.3 / 3, rel=1e-12)
    assert rep.extra["excludes_k"]
    square = necessary_bound_check(H("(z-2)^2"))
    assert square.value > 1 and square.extra["univalence_contradicted"] and not square.admissible
