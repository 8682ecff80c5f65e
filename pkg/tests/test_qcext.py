import math

import numpy as np
import pytest

from loewner_qc.chains import chain_becker_pommerenke, chain_translation
from loewner_qc.core import EuclideanDisk, Grid
from loewner_qc.errors import ArgumentError, HypothesisError, PoleError, StencilError
from loewner_qc.evolution import EvolutionFamily
from loewner_qc.expr import holomap_from_expr
from loewner_qc.herglotz import constant_field
from loewner_qc.qcext import (
    PlanarMap,
    beltrami,
    dilatation_report,
    extend_chain,
    extend_evolution,
    extend_halfplane_linear,
    extend_log_lift,
    extend_schwarzian,
    injectivity_check,
    seam_check,
)

LEFT = np.array([-1.0 + 0.5j, -0.4 - 1.2j, -2.2 + 2j])
RIGHT = np.array([0.8 + 0.3j, 1.5 - 2j, 2.5 + 1j])


def test_translation_chain_extension_is_a_shift():
    c = chain_translation(holomap_from_expr("z"), 1.0)
    F = extend_chain(c, 0.7, rho=0.2)
    z = np.concatenate([LEFT, RIGHT])
    assert np.allclose(F(z), z + 0.2 - 0.7)
    assert np.max(np.abs(beltrami(F, z))) < 1e-8


def test_extend_chain_arguments():
    c = chain_translation(holomap_from_expr("z"), 1.0)
    with pytest.raises(ArgumentError):
        extend_chain(c, -1.0)
    with pytest.raises(ArgumentError):
        extend_chain(c, 1.0, rho=-0.1)


@pytest.mark.parametrize("c", [2.0, 1 + 0.5j, 0.3 - 0.2j])
def test_constant_field_dilatation(c):
    F = extend_evolution(EvolutionFamily(constant_field(c)), 0.0, 2.0)
    # on the strip -2 < x < 0 the map is affine with F_x = c and F_y = i
    mu = beltrami(F, np.array([-0.5 + 0.3j, -1.5 - 1j]))
    assert np.allclose(np.abs(mu), abs(c - 1) / abs(c + 1), atol=1e-8)
    # right of the seam the map is holomorphic, left of -2 it is a translation
    assert np.max(np.abs(beltrami(F, np.array([1 + 1j, -2.7 + 0.2j])))) < 1e-8
    assert F.seams == (0.0, -2.0)


def test_extend_evolution_equal_times_and_errors():
    E = EvolutionFamily(constant_field(1.0))
    F = extend_evolution(E, 1.0, 1.0, rho=0.5)
    z = np.concatenate([LEFT, RIGHT])
    assert np.allclose(F(z), z + 0.5)
    with pytest.raises(ArgumentError):
        extend_evolution(E, 2.0, 1.0)


@pytest.mark.parametrize("K", [0.5, 2.0, 3.0])
def test_linear_map_beltrami(K):
    F = PlanarMap(lambda z: z.real + 1j * K * z.imag, rect=(-2, 2, -2, 2), seams=())
    mu = beltrami(F, np.array([0.3 + 0.1j, -1 + 1j]))
    assert np.allclose(mu, (1 - K) / (1 + K), atol=1e-10)


def test_beltrami_second_order():
    F = PlanarMap(lambda z: z + 0.1 * np.exp(np.conj(z)), rect=(-2, 2, -2, 2), seams=())
    z = np.array([0.4 + 0.7j])
    exact = 0.1 * np.exp(np.conj(z))
    e1 = abs(beltrami(F, z, step=1e-2)[0] - exact[0])
    e2 = abs(beltrami(F, z, step=5e-3)[0] - exact[0])
    assert e2 == pytest.approx(e1 / 4, rel=2e-2)


def test_beltrami_stencil_errors():
    F = PlanarMap(lambda z: z, rect=(-1, 1, -1, 1))
    with pytest.raises(StencilError):
        beltrami(F, np.array([0.0 + 0.5j]))
    with pytest.raises(StencilError):
        beltrami(F, np.array([0.99999 + 0.5j]), step=1e-3)


def test_halfplane_linear_matches_analytic_mu():
    k = 0.4
    c = 2 * k / (1 + k * k)
    h = holomap_from_expr("z + c*exp(-z)", {"c": c})
    B = EuclideanDisk(1.0, c)
    F = extend_halfplane_linear(h, B)
    assert F.flags["omega"] == pytest.approx(math.sqrt(1 - c * c))
    num = beltrami(F, LEFT)
    assert np.allclose(num, F.analytic_mu(LEFT), atol=1e-6)
    assert np.allclose(F(RIGHT), h.eval(RIGHT))
    # oracle: the worst ratio over the boundary circle of B
    w = 1 + c * np.exp(1j * np.linspace(0, 2 * np.pi, 20001))
    om = math.sqrt(1 - c * c)
    bound = float(np.max(np.abs(om - w) / np.abs(om + w)))
    assert bound == pytest.approx(k, rel=1e-6)
    rep = dilatation_report(F, Grid(-3, 3, -3, 3, 17, 17), bound, tol=1e-6)
    assert rep.passed and rep.skipped == 17


def test_halfplane_linear_hypotheses():
    with pytest.raises(HypothesisError):
        extend_halfplane_linear(holomap_from_expr("z"), EuclideanDisk(0.0, 1.0))
    with pytest.raises(HypothesisError):
        extend_halfplane_linear(holomap_from_expr("z + 0.5*exp(-z)"), EuclideanDisk(1.0, 0.2))


def test_schwarzian_extension_affine_is_identity_like():
    F = extend_schwarzian(holomap_from_expr("2*z + 1"))
    assert np.allclose(F(LEFT), 2 * LEFT + 1)
    assert F.flags["hypothesis_ok"] and F.flags["k_sampled"] < 1e-10
    assert np.max(np.abs(beltrami(F, LEFT))) < 1e-8


def test_schwarzian_extension_of_log():
    # 2 x^2 |S log| = 1 on the real axis, so the sampled hypothesis fails
    F = extend_schwarzian(holomap_from_expr("log(z)"))
    assert F.flags["k_sampled"] == pytest.approx(1.0, abs=1e-9)
    assert not F.flags["hypothesis_ok"]


def test_schwarzian_extension_pole():
    F = extend_schwarzian(holomap_from_expr("exp(-2*z)"), grid=Grid(0.1, 1, -1, 1, 3, 3))
    # P = -2, so 1 - P x vanishes at x = -1/2
    with pytest.raises(PoleError):
        F(np.array([-0.5 + 0.3j]))


def test_log_lift_identity():
    F = extend_log_lift(holomap_from_expr("z"))
    z = np.concatenate([LEFT, RIGHT])
    assert np.allclose(F(z), z, atol=1e-10)
    w = np.array([0.3 + 0.2j, -0.5j, 0.9])
    assert np.allclose(F.descend(w), w, atol=1e-10)
    assert F.flags["period_residual"] < 1e-10


def test_log_lift_koebe_like():
    f = holomap_from_expr("z/(1-z)")
    F = extend_log_lift(f)
    w = np.array([0.3 + 0.2j, -0.5j, 0.7])
    assert np.allclose(F.descend(w), w / (1 - w), atol=1e-9)
    assert F.flags["period_residual"] <= 1e-8
    assert F.periodicity_residual(LEFT) <= 1e-8


def test_log_lift_hypotheses():
    with pytest.raises(HypothesisError):
        extend_log_lift(holomap_from_expr("z + 1"))
    with pytest.raises(HypothesisError):
        extend_log_lift(holomap_from_expr("z/(1-z)"), K_bound=2.0)


def test_injectivity():
    assert injectivity_check(PlanarMap(lambda z: 2 * z + 1), Grid(-2, 2, -2, 2, 7, 7)).passed
    const = injectivity_check(PlanarMap(lambda z: np.zeros_like(z)), Grid(-2, 2, -2, 2, 5, 5))
    assert not const.passed
    fold = injectivity_check(lambda z: z * z, Grid(-2, 2, -2, 2, 5, 5))
    assert not fold.passed


def test_seam_checks():
    good = PlanarMap(lambda z: z)
    assert seam_check(good, np.linspace(-2, 2, 9)).passed
    bad = PlanarMap(lambda z: np.where(z.real > 0, z, z + 1))
    rep = seam_check(bad, np.linspace(-2, 2, 9))
    assert not rep.passed and rep.details["residuals"][-1] == pytest.approx(1.0)
    F = extend_chain(chain_becker_pommerenke(holomap_from_expr("(z+1)^0.8")), 1.0)
    assert seam_check(F, np.linspace(-2, 2, 9)).passed


def test_bp_extension_dilatation():
    F = extend_chain(chain_becker_pommerenke(holomap_from_expr("(z+1)^0.8")), 0.0)
    rep = dilatation_report(F, Grid(-3, 3, -3, 3, 12, 12), 0.4)
    assert rep.passed and rep.sup_abs_mu > 0.1
    threaded = dilatation_report(F, Grid(-3, 3, -3, 3, 12, 12), 0.4, threads=3, chunk=20)
    assert threaded.sup_abs_mu == rep.sup_abs_mu
    assert injectivity_check(F, Grid(-3, 3, -3, 3, 9, 9)).passed
