from __future__ import annotations

import os
import random

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from artifact.classpoly import DATA_DIR
from artifact.cmfield import CMType
from artifact.nsystem import NSystem
from artifact.polforms import conj_triple, parse_triple, sl2_transform
from artifact.realquad import RealQuadField
from artifact.selftest import random_tau
from artifact.siegel import (ODD, InvariantSpec, PeriodMatrix, PoleError, SiegelError, fricke, ibukiyama_forms,
                             igusa_forms, invariant_eval, is_symplectic, period_matrix, random_sp4, reduce_tau,
                             s_matrix, sp4_act, theta, theta_all)

TAU1 = (mpc("0.5", "4.1498183124610"), mpc("0.5", "1.8108031294328"), mpc(0, "2.3390151830282"))


def load(name):
    with open(os.path.join(DATA_DIR, name)) as fh:
        return NSystem.from_text(fh.read())


@pytest.fixture(scope="module")
def tau1(K71):
    return period_matrix(parse_triple(K71, "[1, 1, 3w + 6]", CMType(1, 1)), 256)


def close(a, b, tol):
    return all(abs(x - y) < tol for x, y in zip(a.entries(), b.entries()))


def test_s_matrix():
    assert s_matrix(RealQuadField(2)) == ((0, -1), (-1, 0))
    assert s_matrix(RealQuadField(5)) == ((0, -1), (-1, 1))
    S = mpmath.matrix(s_matrix(RealQuadField(13)))
    assert mpmath.inverse(S) * S == mpmath.eye(2)


def test_tau1_matches_printed(tau1):
    for got, want in zip(tau1.entries(), TAU1):
        assert abs(got - want) < 1e-12


def test_conjugate_triple_gives_neg_conj(K71, tau1):
    t = parse_triple(K71, "[1, 1, 3w + 6]", CMType(1, 1))
    assert close(period_matrix(conj_triple(t), 256), tau1.neg_conj(), mpf(2) ** -240)


def test_identity_transform_same_tau(K71, tau1):
    t = parse_triple(K71, "[1, 1, 3w + 6]", CMType(1, 1))
    one, zero = K71.K0.one, K71.K0(0)
    assert close(period_matrix(sl2_transform(t, ((one, zero), (zero, one))), 256), tau1, mpf(2) ** -240)


def test_inverse_root_period_matrix(K73):
    # tau of -1/z equals (0, -S^-1; S, 0) tau_z
    t = parse_triple(K73, "[w + 4, -35w - 19, 114w + 72]")
    F = K73.K0
    one, zero = F.one, F(0)
    t_inv = sl2_transform(t, ((zero, -one), (one, zero)))
    assert t_inv.z == -t.z.inverse()
    S = s_matrix(F)
    det = S[0][0] * S[1][1] - S[0][1] * S[1][0]
    Si = [[S[1][1] * det, -S[0][1] * det], [-S[1][0] * det, S[0][0] * det]]
    M = [[0, 0, -Si[0][0], -Si[0][1]], [0, 0, -Si[1][0], -Si[1][1]],
         [S[0][0], S[0][1], 0, 0], [S[1][0], S[1][1], 0, 0]]
    assert is_symplectic(M)
    tau = period_matrix(t, 200)
    moved, _ = sp4_act(M, tau)
    assert close(period_matrix(t_inv, 200), moved, mpf(2) ** -150)


def test_odd_thetas_at_tau1(tau1):
    th = theta_all(tau1, 256)
    for j in ODD:
        assert abs(th[j]) < mpf(2) ** (-256 + 40)


def test_theta0_at_2i():
    with mp.workprec(128):
        tau = PeriodMatrix(mpc(0, 2), mpc(0), mpc(0, 2), 128)
        one_dim = mpmath.fsum(mpmath.exp(-2 * mpmath.pi * n * n) for n in range(-10, 11))
        val = theta(0, tau, 128)
        assert abs(val - one_dim ** 2) < mpf(2) ** -120
        assert abs(val.imag) < mpf(2) ** -120 and val.real > 0


def test_theta0_precision_consistency(tau1):
    low = theta(0, PeriodMatrix(*tau1.entries(), prec=128), 128)
    high = theta(0, tau1, 256)
    assert abs(low - high) < mpf(2) ** -120 * abs(high)


def test_ibukiyama_y_nonzero_72():
    S = load("ex72_system.txt")
    for t in S.triples:
        (x, y, z, k), _ = ibukiyama_forms(period_matrix(t, 128), 128)
        assert abs(y) > mpf(2) ** -60


def test_igusa_automorphy():
    rng = random.Random(11)
    for _ in range(3):
        tau = random_tau(rng, 160)
        M = random_sp4(rng)
        moved, det = sp4_act(M, tau)
        h = igusa_forms(tau, 160)
        hm = igusa_forms(moved, 160)
        with mp.workprec(160):
            for k, a, b in zip((4, 6, 10, 12), h, hm):
                assert abs(b / det ** k - a) < mpf(2) ** -100 * max(1, abs(a))


def test_reduce_tau_preserves_forms():
    rng = random.Random(3)
    tau = random_tau(rng, 160)
    M = random_sp4(rng, steps=6)
    moved, _ = sp4_act(M, tau)
    red, _ = reduce_tau(moved)
    assert red.t11.imag >= mpf("0.8")
    j = InvariantSpec.parse("igusa_j1")
    with mp.workprec(160):
        a = invariant_eval(j, tau, 160)
        b = invariant_eval(j, red, 160)
        assert abs(a - b) < mpf(2) ** -100 * abs(a)


def test_f1_value(tau1):
    spec = InvariantSpec.parse("simple_hk_quotient(k=4,N=3)")
    val = invariant_eval(spec, tau1, 256)
    with mp.workprec(256):
        want = mpc("4.31041770567796242256320", "-1.05769871912283540433297")
        assert abs(val - want) < mpf(10) ** -22


def test_fricke_involution(tau1):
    F = RealQuadField(5)
    back = fricke(fricke(tau1, 6, F), 6, F)
    assert close(back, tau1, mpf(2) ** -230)


def test_double_quotient_fricke_invariant_73():
    S = load("ex73_system.txt")
    spec = InvariantSpec.parse("double_hk_quotient(k=10,N1=2,N2=3)")
    tau = period_matrix(S.triples[0], 128)
    a = invariant_eval(spec, tau, 128)
    b = invariant_eval(spec, fricke(tau, 6, S.K.K0), 128)
    with mp.workprec(128):
        assert abs(a - b) < mpf(2) ** -100 * abs(a)


def test_invariant_spec_parsing():
    for text in ("igusa_j1", "simple_hk_quotient(k=4,N=3)", "double_hk_quotient(k=10,N1=2,N2=3)",
                 "level2(X^2/Y)", "sqrt(simple_hk_quotient(k=4,N=3))"):
        assert str(InvariantSpec.parse(text)) == text
    s = InvariantSpec.parse("sqrt(simple_hk_quotient(k=4,N=3), signs=[+,+,-])")
    assert s.signs == [1, 1, -1] and s.level == 3
    assert InvariantSpec.parse("double_hk_quotient(k=10,N1=2,N2=3)").level == 6
    with pytest.raises(ValueError):
        InvariantSpec.parse("level2(__import__('os'))")
    with pytest.raises(ValueError):
        InvariantSpec.parse("simple_hk_quotient(k=5,N=3)")


def test_sqrt_signs(tau1):
    spec = InvariantSpec.parse("sqrt(simple_hk_quotient(k=4,N=3), signs=[+,+,-])")
    f = invariant_eval(InvariantSpec.parse("simple_hk_quotient(k=4,N=3)"), tau1, 200)
    r = invariant_eval(spec, tau1, 200, index=2)
    with mp.workprec(200):
        assert abs(r * r - f) < mpf(2) ** -180 * abs(f)
        assert r.real < 0


def test_pole_detected():
    # h10 vanishes on the diagonal tau_12 = 0
    tau = PeriodMatrix(mpc("0.1", 1.2), mpc(0), mpc("-0.2", 1.5), 128)
    with pytest.raises(PoleError):
        invariant_eval(InvariantSpec.parse("igusa_j1"), tau, 128)


def test_rejects_non_positive_imaginary_part():
    with pytest.raises(SiegelError):
        PeriodMatrix(mpc(0, 1), mpc(0, 2), mpc(0, 1), 64)
