from __future__ import annotations

import pytest

from artifact.cmfield import CMType
from artifact.polforms import (QuadraticTriple, TripleError, _c_ok, conj_triple, is_semiprimitive, make_A_coprime,
                               make_C_divisible, multiplier_ring, parse_triple, root_and_polarization, sl2_transform,
                               splitting_type, theorem_n_check)

J = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]


def test_root_and_discriminant_71(K71):
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    w = K71.K0.w
    assert t.D == -12 * w - 23
    assert t.z == K71.parse("(-x^3 - 34*x - 11)/22")
    # z is a root of A X^2 + B X + C
    z = t.z
    assert z * z + z + K71.elem(3 * w + 6) == K71.elem(0)


def test_xi_positive_imaginary_72(K72):
    import mpmath
    t = parse_triple(K72, "[1, 0, -2w + 10]")
    pol = root_and_polarization(t)
    assert pol.xi.conj() == -pol.xi
    for v in pol.xi.embed(t.cmtype, 64):
        assert abs(v.real) < 1e-15 and v.imag > 0


def test_symplectic_basis_is_symplectic(K71, K72, K73):
    for K, txt in ((K71, "[1, 1, 3w + 6]"), (K72, "[1, 0, -2w + 10]"), (K73, "[w + 4, -35w - 19, 114w + 72]")):
        pol = root_and_polarization(parse_triple(K, txt))
        assert pol.symplectic_gram() == J


def test_not_totally_positive_rejected(K71):
    w = K71.K0.w
    with pytest.raises(TripleError):
        QuadraticTriple(K71, w, 1, 3 * w + 6)
    with pytest.raises(TripleError):
        QuadraticTriple(K71, 1, 1, -3 * w - 6)


def test_normalized_negates(K72):
    t = parse_triple(K72, "[-w - 4, 8, 2w - 8]")
    w = K72.K0.w
    assert t.coeffs == (w + 4, K72.K0(-8), -2 * w + 8)


def test_multiplier_ring(K71, K73):
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    _, disc, maximal = multiplier_ring(t)
    assert maximal and disc == K71.disc
    t2 = parse_triple(K73, "[2, w - 7, 9]")
    assert t2.content().is_unit()
    w = K71.K0.w
    big = QuadraticTriple(K71, 2, 2, 6 * w + 12)
    assert big.content() == K71.K0.ideal(2)
    assert multiplier_ring(big)[1] == disc


def test_sl2_examples(K73):
    F = K73.K0
    w = F.w
    t = parse_triple(K73, "[2, w - 7, 9]")
    one, zero = F.one, F(0)
    assert sl2_transform(t, ((one, zero), (zero, one))) == t
    t1 = sl2_transform(t, ((1, 0), (-1, 1)))
    assert t1.coeffs == (w + 4, w + 11, F(9))
    t2 = sl2_transform(t1, ((1, 3 * w + 3), (0, 1)))
    assert t2.coeffs == (w + 4, -35 * w - 19, 114 * w + 72)
    # A'/A = xi'/xi exactly
    assert t2.xi / t.xi == K73.elem(t2.A / t.A)


def test_sl2_rejects_bad_determinant(K73):
    t = parse_triple(K73, "[2, w - 7, 9]")
    with pytest.raises(TripleError):
        sl2_transform(t, ((2, 0), (0, 1)))


def test_make_A_coprime_identity(K71):
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    t2, M = make_A_coprime(t, K71.K0.ideal(3))
    assert t2 is t and M[0][1] == 0 and M[1][0] == 0


def test_make_A_coprime_swap_row(K71):
    w = K71.K0.w
    t = QuadraticTriple(K71, 3, 1, w + 2)
    t2, M = make_A_coprime(t, K71.K0.ideal(3))
    assert (M[1][0], M[1][1]) == (K71.K0.one, K71.K0(0))
    assert t2.A == w + 2
    assert t2.D == t.D


def test_make_A_coprime_mod_6(K73):
    F = K73.K0
    t = parse_triple(K73, "[2, w - 7, 9]")
    m = F.ideal(6)
    t2, M = make_A_coprime(t, m)
    assert (F.ideal(t2.A) + m).is_unit()
    assert t2.D == t.D
    (a, b), (c, d) = M
    assert a * d - b * c == F.one


def test_splitting_examples(K71, K72, K73):
    t71 = parse_triple(K71, "[1, 1, 3w + 6]")
    assert splitting_type(t71, K71.K0.ideal(3)) == "split"
    t72 = parse_triple(K72, "[1, 0, -2w + 10]")
    assert splitting_type(t72, K72.K0.ideal(2)) == "ramified"
    t73 = parse_triple(K73, "[w + 4, -35w - 19, 114w + 72]")
    assert splitting_type(t73, K73.K0.ideal(2)) == "split"
    assert splitting_type(t73, K73.K0.ideal(3)) == "split"


def test_theorem_n_examples(K71, K72, K73):
    assert theorem_n_check(K71, K71.K0.ideal(3))
    assert theorem_n_check(K72, K72.K0.ideal(2))
    assert not theorem_n_check(K72, K72.K0.ideal(4))
    assert theorem_n_check(K73, K73.K0.ideal(6))
    assert not theorem_n_check(K71, K71.K0.ideal(2))      # 2 is inert in K/K0 here


def test_make_C_divisible_unchanged(K71):
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    assert make_C_divisible(t, K71.K0.ideal(3)) is t


def test_make_C_divisible_71(K71):
    w = K71.K0.w
    t = QuadraticTriple(K71, 1, 3, 3 * w + 8)
    assert t.D == -12 * w - 23
    n = K71.K0.ideal(3)
    out = make_C_divisible(t, n)
    assert _c_ok(out.C, n)
    assert out.D == t.D and out.A == t.A
    assert (out.B - t.B).p % 2 == 0 and (out.B - t.B).q % 2 == 0


def test_make_C_divisible_73(K73):
    w = K73.K0.w
    t = QuadraticTriple(K73, 1, w + 1, 4 * w + 6)
    assert t.D == -13 * w - 22
    n = K73.K0.ideal(6)
    out = make_C_divisible(t, n)
    assert n.contains(out.C)
    assert (n + K73.K0.ideal(out.C / 6)).is_unit()
    assert out.D == t.D


def test_make_C_divisible_rejects_bad_modulus(K72):
    t = parse_triple(K72, "[1, 0, -2w + 10]")
    with pytest.raises(TripleError):
        make_C_divisible(t, K72.K0.ideal(4))


def test_conj_triple(K72):
    a = parse_triple(K72, "[1, 0, -2w + 10]")
    assert conj_triple(a) == a
    t2 = parse_triple(K72, "[-w - 4, 8, 2w - 8]")
    t3 = parse_triple(K72, "[-w - 4, -8, 2w - 8]", t2.cmtype)
    assert conj_triple(t2) == t3
    assert conj_triple(conj_triple(t2)) == t2
    assert conj_triple(t2).z == -t2.z.conj()


def test_semiprimitive(K73):
    t = parse_triple(K73, "[2, w - 7, 9]")
    assert is_semiprimitive(t, K73.K0.ideal(12))


def test_cm_type_choice(K71):
    t = parse_triple(K71, "[1, 1, 3w + 6]", CMType(1, 1))
    assert t.cmtype == CMType(1, 1)
    with pytest.raises(TripleError):
        parse_triple(K71, "[1, 1, 3w + 6]", CMType(1, -1))
