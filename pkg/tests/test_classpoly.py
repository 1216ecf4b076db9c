from __future__ import annotations

import json

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from artifact.classpoly import (ClassPolyError, ClassPolynomial, CoefficientRing, JobConfig, check_denominators,
                                expand_from_roots, normalize_coefficients, prepare, realness_detect,
                                reconstruct_coefficient, resolve_path)
from artifact.cmfield import CMType
from artifact.nsystem import NSystem
from artifact.siegel import InvariantSpec
from conftest import run_example

PP = CMType(1, 1)


def test_reconstruct_rational(K71):
    ring = CoefficientRing(K71, PP, "Kr")
    with mp.workprec(300):
        assert reconstruct_coefficient(mpc(3), ring, 300) == ([3, 0, 0, 0], 1)


def test_reconstruct_igusa_coefficient(K71):
    ring = CoefficientRing(K71, PP, "Kr0")
    with mp.workprec(300):
        c = ring.embed([-17741044214880, -5611098752], 841, 300)
        assert reconstruct_coefficient(c, ring, 300) == ([-17741044214880, -5611098752], 841)


def test_reconstruct_reflex_coefficient(K71):
    ring = CoefficientRing(K71, PP, "Kr")
    coords = [-617685149664, 970800040530, 11670666480, 8560748430]
    den = 2 ** 3 * 11 ** 5 * 31 ** 2
    with mp.workprec(600):
        got, d = reconstruct_coefficient(ring.embed(coords, den, 600), ring, 600)
    assert [v * den for v in got] == [v * d for v in coords]


def test_reconstruct_rejects_complex_in_real_ring(K72):
    ring = CoefficientRing(K72, PP, "Kr0")
    with pytest.raises(ClassPolyError):
        reconstruct_coefficient(mpc(1, 1), ring, 200)


def test_expand_from_roots():
    with mp.workprec(128):
        assert expand_from_roots([mpf(1), mpf(2)]) == [2, -3, 1]
        a = mpc("1.25", "0.75")
        coeffs = expand_from_roots([a, mpmath.conj(a)], {0: 1, 1: 0})
        assert coeffs[2] == 1
        assert abs(coeffs[1] + 2 * a.real) < mpf(2) ** -120
        assert abs(coeffs[0] - (a.real ** 2 + a.imag ** 2)) < mpf(2) ** -120
        assert all(mpmath.im(c) == 0 for c in coeffs)


def test_expand_72_values_real():
    job, P, report, _ = run_example("ex72_theta")
    K, S, mode, pairing, ring = prepare(job)
    from artifact.classpoly import evaluate_values
    vals = evaluate_values(job, S, None, 400)
    with mp.workprec(400):
        coeffs = expand_from_roots(vals)
        for c in coeffs:
            assert abs(mpmath.im(c)) < mpf(2) ** -200 * max(1, abs(c))


def test_normalize_coefficients():
    coords, den = normalize_coefficients([([2, 4], 6), ([1, 0], 3), ([1, 0], 1)])
    assert (coords, den) == ([[1, 2], [1, 0], [3, 0]], 3)


def test_realness_detect(K71, K72, K73):
    assert realness_detect(K72, 2, InvariantSpec.parse("level2(X^2/Y)")) == "real_ramified"
    with open(resolve_path("ex73_system.txt")) as fh:
        S = NSystem.from_text(fh.read(), K73)
    spec = InvariantSpec.parse("double_hk_quotient(k=10,N1=2,N2=3)")
    assert realness_detect(K73, 6, spec, 1, S) == "real_fricke"
    with open(resolve_path("ex71_system.txt")) as fh:
        S71 = NSystem.from_text(fh.read(), K71)
    assert realness_detect(K71, 3, InvariantSpec.parse("simple_hk_quotient(k=4,N=3)"), 1, S71) == "complex"


def test_job_config_validation():
    with pytest.raises(ValueError):
        JobConfig((57, 661), "igusa_j1", level=0)
    with pytest.raises(ValueError):
        JobConfig((57, 661), "igusa_j1", precision={"start": 1000, "max": 500})
    with pytest.raises(ValueError):
        JobConfig((57, 661), "igusa_j1", signs=["+"])
    job = JobConfig((57, 661), "igusa_j1", precision={"start": 500, "max": 3000, "growth": 2})
    assert job.schedule() == [500, 1000, 2000, 3000]
    assert JobConfig((57, 661), "igusa_j1", cm_type="+-").cmtype() == CMType(1, -1)


def test_level_must_be_multiple_of_invariant_level():
    job = JobConfig((57, 661), "simple_hk_quotient(k=4,N=3)", level=2)
    with pytest.raises(ClassPolyError):
        prepare(job)


def test_level_must_pass_splitting_condition():
    job = JobConfig((18, 68), "igusa_j1", level=4)
    with pytest.raises(ClassPolyError):
        prepare(job)


def test_system_list_in_config():
    job = JobConfig((57, 661), "simple_hk_quotient(k=4,N=3)", level=3, cm_type="++",
                    system=["[1, 1, 3w + 6]", "[w + 2, 1, 3]", "[w + 2, 19, -18w + 57]"])
    K, S, mode, pairing, ring = prepare(job)
    assert len(S) == 3 and mode == "complex" and ring.tag == "Kr"


def test_bad_system_rejected():
    job = JobConfig((57, 661), "simple_hk_quotient(k=4,N=3)", level=3, cm_type="++",
                    system=["[1, 1, 3w + 6]", "[w + 2, 1, 3]", "[w + 2, 1, 3]"])
    with pytest.raises(ClassPolyError, match="labels distinct"):
        prepare(job)


def test_stable_under_higher_precision():
    _, P, _, _ = run_example("ex71_f")
    _, P2, report, _ = run_example("ex71_f", start=1000)
    assert report["precision"] == 1000
    assert P2.coords == P.coords and P2.den == P.den


def test_degree_equals_orbit_order():
    for name, h in (("ex71_j1", 3), ("ex72_theta", 4), ("ex73_double", 5)):
        _, P, _, _ = run_example(name)
        assert P.degree == h


def test_denominator_cross_check_passes():
    for name in ("ex71_j1", "ex71_f", "ex72_theta", "ex73_double"):
        assert run_example(name)[2]["denominator_check"] == "pass"


def test_denominator_cross_check_catches_wrong_denominator(K71):
    _, P, report, _ = run_example("ex71_f")
    job = JobConfig.load("ex71_f.json")
    K, S, mode, pairing, ring = prepare(job)
    from artifact.classpoly import evaluate_values
    vals = evaluate_values(job, S, pairing, 600)
    with mp.workprec(640):
        floats = expand_from_roots(vals, pairing)
        assert check_denominators(P, floats, 600) == "pass"
        bogus = ClassPolynomial(P.ring, [[v * 7 for v in c] for c in P.coords[:-1]] + [P.coords[-1]], P.den * 7 * 13)
        assert check_denominators(bogus, floats, 600) == "fail"


def test_json_round_trip(K71):
    _, P, _, _ = run_example("ex71_f")
    d = json.loads(json.dumps(P.to_json()))
    Q = ClassPolynomial.from_json(K71, P.ring.cmtype, d)
    assert Q == P and Q.coords == P.coords
    assert d["status"].startswith("heuristically verified")


def test_paper_style_output():
    _, P, _, _ = run_example("ex71_j1")
    text = P.to_paper()
    assert text.startswith("841 X^3")
    assert "(-5611098752 w_r - 17741044214880) X^2" in text


@pytest.mark.parametrize("name", ["ex71_j1", "ex71_f", "ex71_sqrtf", "ex72_igusa", "ex72_theta",
                                  "ex73_double", "ex73_igusa"])
def test_bundled_examples_reproduce(name):
    _, P, report, (monic, literal) = run_example(name)
    assert monic and literal
    assert report["denominator_check"] == "pass"
