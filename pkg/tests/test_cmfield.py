from __future__ import annotations

import mpmath
import pytest
import sympy
from mpmath import mp

from artifact.cmfield import CMField, CMFieldError, CMType, maximal_order_disc
from artifact.realquad import primes_upto
from conftest import field

PP = CMType(1, 1)


def test_real_subfields(K71, K72, K73):
    assert (K71.K0.d0, K72.K0.d0, K73.K0.d0) == (5, 13, 5)


def test_omega_expression(K71):
    w = K71.elem(K71.K0.w)
    assert K71.parse("(x^2 + 34)/11") == w
    assert w * w == w + K71.one


def test_rejects_non_cm_equations():
    with pytest.raises(CMFieldError):
        CMField(4, 5)          # a^2 - 4b < 0
    with pytest.raises(CMFieldError):
        CMField(5, 4)          # reducible: a^2 - 4b is a square
    with pytest.raises(CMFieldError):
        CMField(10, 16)        # biquadratic


def test_discriminant_matches_sympy(K71, K72, K73):
    from sympy.polys.numberfields.basis import round_two
    x = sympy.Symbol("x")
    for K in (K71, K72, K73):
        _, dK = round_two(sympy.Poly(x ** 4 + K.a * x ** 2 + K.b, x, domain=sympy.QQ))
        assert K.disc == dK
        assert maximal_order_disc(K.a, K.b) == dK
    assert (K71.disc, K72.disc, K73.disc) == (16525, 183872, 15025)


def test_reflex_examples(K71, K72):
    R = K71.reflex(PP)
    assert R.poly == [605, 0, 114, 0, 1]
    with mp.workprec(128):
        t = R.t(128)
        assert abs(t - mpmath.mpc(0, "10.41248483930371")) < 1e-13
        assert abs(mpmath.polyval(R.poly[::-1], t)) < mpmath.mpf(2) ** -100
        assert abs(R.omega_r(128) - (1 + mpmath.sqrt(661)) / 2) < mpmath.mpf(2) ** -120
    assert K72.reflex(PP).K0r.d0 == 17


def test_reflex_ring_index():
    # index of Z[t] in the maximal order of the reflex field
    assert field(57, 661).reflex(PP).ring_index == 704
    assert field(18, 68).reflex(PP).ring_index == 64
    assert field(53, 601).reflex(PP).ring_index == 576
    assert maximal_order_disc(114, 605) == 2184605


def test_omega_r_in_t(K71):
    R = K71.reflex(PP)
    with mp.workprec(128):
        t = R.t(128)
        val = sum(mpmath.mpf(c.numerator) / c.denominator * t ** i for i, c in enumerate(R.omega_r_in_t()))
        assert abs(val - R.omega_r(128)) < mpmath.mpf(2) ** -100


@pytest.mark.parametrize("ab, order, invariants", [((57, 661), 3, [3]), ((18, 68), 8, [8]), ((53, 601), 5, [5])])
def test_class_groups(ab, order, invariants):
    cl = field(*ab).class_group
    assert cl.order == order
    assert cl.invariants == invariants


def test_principality(K71, K72):
    assert K71.is_principal(K71.unit_ideal) == K71.one
    w = K71.K0.w
    g = K71.is_principal(K71.ideal(3 * w + 6))
    assert g is not None and K71.ideal(g) == K71.ideal(3 * w + 6)
    I17 = K72.ideal(17, K72.parse("x - 4"))
    assert I17.norm == 17
    assert K72.is_principal(I17) is None
    assert K72.class_group.element_order(K72.class_group.log(I17)) == 4


def test_class_group_exponent_principal(K72):
    cl = K72.class_group
    I17 = K72.ideal(17, K72.parse("x - 4"))
    assert K72.is_principal(I17 ** 4) is not None
    assert K72.is_principal(I17 ** 2) is None
    assert cl.log(I17 ** 4) == cl.zero()


def test_shimura_orbits(K71, K72, K73):
    assert K71.shimura_group().orbit_order == 3
    I17 = K72.ideal(17, K72.parse("x - 4"))
    assert K72.shimura_group([I17]).orbit_order == 4
    assert K73.shimura_group().orbit_order == 5


def test_shimura_nu_totally_positive(K73):
    H = K73.shimura_group()
    for c in H.orbit:
        assert H.nu(c).is_totally_positive()


def test_element_arithmetic(K71):
    x = K71.x
    a = K71.parse("x^3 - 2*x + 5")
    b = K71.parse("3*x^2 + x - 1")
    assert a * b / b == a
    assert (a * b).norm_q() == a.norm_q() * b.norm_q()
    assert a.conj().conj() == a
    assert (x * x).in_k0() and (x * x).as_k0() == K71.y
    assert a.rel_norm() == (a * a.conj()).as_k0()


def test_conjugation_matches_embeddings(K71):
    a = K71.parse("x^3 - 2*x + 5")
    with mp.workprec(128):
        e = a.embed(PP, 128)
        ec = a.conj().embed(PP, 128)
        for u, v in zip(e, ec):
            assert abs(mpmath.conj(u) - v) < mpmath.mpf(2) ** -100


def test_ideal_factorization_over_2(K72):
    P, = K72.primes_above(2)
    assert P * P == K72.ideal(2)


def test_relative_norm(K71):
    I = K71.ideal(3 * K71.K0.w + 6)
    N = I.relative_norm()
    assert N == K71.K0.ideal((3 * K71.K0.w + 6) ** 2)


def test_residue_algebra_agrees_with_theta_route(K71, K72, K73):
    counts = {}
    for K in (K71, K72, K73):
        tally = {"split": 0, "inert": 0, "ramified": 0}
        for p in primes_upto(100):
            for P in K.K0.primes_above(p):
                kind = K.residue_algebra_type(P)
                assert kind == K.relative_splitting(P)[0]
                tally[kind] += 1
        counts[(K.a, K.b)] = tally
    assert counts[(57, 661)] == {"split": 19, "inert": 16, "ramified": 0}
    assert counts[(18, 68)] == {"split": 17, "inert": 14, "ramified": 2}
    assert counts[(53, 601)] == {"split": 18, "inert": 17, "ramified": 0}
