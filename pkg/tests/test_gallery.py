import math

import numpy as np
import pytest

from loewner_qc.errors import ArgumentError
from loewner_qc.gallery import build, defaults, ellipse_transition, list_cases, run

IDS = ["ellipse-radial", "ex-h-rational", "sqrt-shift", "power-inverse", "range-counterexamples"]


def _exp(report, name):
    return next(e for e in report.details["expectations"] if e["name"] == name)


def test_list_cases():
    ids = [c for c, _ in list_cases()]
    assert ids == IDS
    assert all(isinstance(d, str) and d for _, d in list_cases())


@pytest.mark.parametrize("case_id", IDS)
def test_default_build_passes(case_id):
    case = build(case_id)
    assert case.params == {k: (complex(v) if case_id == "sqrt-shift" else v) for k, v in defaults(case_id).items()}
    rep = run(case)
    assert rep.passed, [e for e in rep.details["expectations"] if not e["passed"]]
    assert all(e["provenance"] in {"reference", "derived", "trivial"} for e in rep.details["expectations"])


def test_threaded_run_matches():
    a = run(build("ex-h-rational", a=3.0))
    b = run(build("ex-h-rational", a=3.0), threads=4)
    assert [e["value"] for e in a.details["expectations"]] == [e["value"] for e in b.details["expectations"]]


def test_power_inverse_value():
    rep = run(build("power-inverse", k=0.3))
    e = _exp(rep, "|h''(1)/h'(1)|")
    assert e["expected"] == pytest.approx(2.3)
    assert abs(e["value"] - 2.3) <= 1e-8


def test_rational_threshold_at_two():
    rep = run(build("ex-h-rational", a=2.0))
    e = _exp(rep, "becker-pommerenke fails at z=1/a")
    assert e["value"] == pytest.approx(1.0, rel=1e-9)
    # independent oracle: h''/h' = -2a^3 / ((1+az)((1+az)^2 + a^2))
    a, z = 2.0, 1.0
    ps = -2 * a**3 / ((1 + a * z) * ((1 + a * z) ** 2 + a * a))
    assert _exp(rep, "|h''/h'| at z=1")["value"] == pytest.approx(abs(ps), rel=1e-9)
    assert rep.details["notes"]


def test_rational_at_one_agrees_with_reference():
    rep = run(build("ex-h-rational", a=1.0))
    assert _exp(rep, "|h''/h'| at z=1")["value"] == pytest.approx(0.2, rel=1e-9)
    assert rep.passed


def test_ellipse_schwarzian():
    k = 0.3
    phi = ellipse_transition(k)
    # oracle: S phi(0) = 6 * (third Taylor coefficient) via a Cauchy integral on |z| = 0.2
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    z = 0.2 * np.exp(1j * th)
    c1 = np.mean(phi(z) / z)
    c3 = np.mean(phi(z) / z**3)
    c2 = np.mean(phi(z) / z**2)
    S = 6 * c3 / c1 - 6 * (c2 / c1) ** 2
    assert S.real == pytest.approx(12 * k * (1 + k * k) / (1 + k) ** 2, rel=1e-9)
    assert abs(c2) < 1e-12


def test_sqrt_shift_disk():
    case = build("sqrt-shift", alpha=1.0)
    assert case.objects["K"] == pytest.approx(math.sqrt(2))
    assert case.objects["disk"].radius == pytest.approx(0.25 * math.log(2))
    complex_alpha = run(build("sqrt-shift", alpha=[0.5, 0.5]))
    assert complex_alpha.passed


def test_range_closed_forms():
    case = build("range-counterexamples", horizon=4.0)
    rep = run(case)
    assert rep.passed
    assert len(case.objects["chains"]) == 2


@pytest.mark.parametrize("case_id,params", [
    ("nope", {}),
    ("ellipse-radial", {"q": 1}),
    ("power-inverse", {"k": 1.0}),
    ("power-inverse", {"k": -0.1}),
    ("ex-h-rational", {"a": 0.0}),
    ("sqrt-shift", {"alpha": -3.0}),
    ("sqrt-shift", {"alpha": {"re": 0.0, "im": 3.0}}),
])
def test_out_of_schema(case_id, params):
    with pytest.raises(ArgumentError):
        build(case_id, params)
