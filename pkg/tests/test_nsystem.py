from __future__ import annotations

import os

import pytest

from artifact.classpoly import DATA_DIR
from artifact.cmfield import CMType
from artifact.nsystem import (NotApplicable, NSystem, NSystemError, base_triple, build_nsystem, describe_pairing,
                              epsilon_scale, pair_conjugates_fricke, pair_conjugates_ramified, verify_nsystem)
from artifact.polforms import QuadraticTriple, TripleError, parse_triple


def load(name):
    with open(os.path.join(DATA_DIR, name)) as fh:
        return NSystem.from_text(fh.read())


def is_involution(p):
    return all(p[p[i]] == i for i in p)


@pytest.fixture(scope="module")
def S71():
    return load("ex71_system.txt")


@pytest.fixture(scope="module")
def S72():
    return load("ex72_system.txt")


@pytest.fixture(scope="module")
def S73():
    return load("ex73_system.txt")


def test_epsilon_scale_trivial(K71):
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    assert epsilon_scale(t, t) == t


def test_epsilon_scale_unit(K71):
    F = K71.K0
    eps, _ = F.fundamental_unit
    u = eps * eps
    t = parse_triple(K71, "[1, 1, 3w + 6]")
    t2 = QuadraticTriple(K71, u * t.A, u * t.B, u * t.C, t.cmtype)
    assert epsilon_scale(t, t2) == t


def test_epsilon_scale_same_discriminant(S73):
    t1, t2 = S73.triples[:2]
    assert t1.D == t2.D
    assert epsilon_scale(t1, t2) == t2


@pytest.mark.parametrize("name", ["ex71_system.txt", "ex72_system.txt", "ex73_system.txt"])
def test_paper_systems_verify(name):
    rep = verify_nsystem(load(name))
    assert rep.ok, rep.checks


def test_71_c_divisible(S71):
    w = S71.K.K0.w
    assert [t.C for t in S71.triples] == [3 * w + 6, S71.K.K0(3), -18 * w + 57]
    assert all(S71.modulus.contains(t.C) for t in S71.triples)


def test_tampered_73_fails(S73):
    t = S73.triples[1]
    # B_2 + 2 with C_2 kept gives a discriminant that is not totally negative,
    # so the constructor refuses it; inject the entry without the checks
    with pytest.raises(TripleError):
        QuadraticTriple(t.K, t.A, t.B + 2, t.C, t.cmtype)
    bad = object.__new__(QuadraticTriple)
    bad.K, bad.A, bad.B, bad.C, bad.cmtype, bad.delta = t.K, t.A, t.B + 2, t.C, t.cmtype, t.delta
    S = NSystem(S73.K, S73.N, [S73.triples[0], bad] + S73.triples[2:], S73.F)
    rep = verify_nsystem(S, check_labels=False)
    failed = [n for n, ok, _ in rep.checks if not ok]
    assert "B_i = B_j mod 2N" in failed
    assert "equal discriminants" in failed


def test_text_round_trip(S72):
    text = S72.to_text()
    again = NSystem.from_text(text)
    assert [str(t) for t in again.triples] == [str(t) for t in S72.triples]
    assert again.generators == [["17", "x - 4"]]
    assert "orbit: 17, x - 4" in text


def test_build_71(K71):
    base = base_triple(K71, 3, CMType(1, 1))
    S = build_nsystem(base, 3)
    assert len(S) == 3
    assert verify_nsystem(S).ok


def test_build_72(K72):
    I17 = K72.ideal(17, K72.parse("x - 4"))
    base = parse_triple(K72, "[1, 0, -2w + 10]")
    S = build_nsystem(base, 2, [I17])
    assert len(S) == 4
    assert verify_nsystem(S, [I17]).ok


def test_build_73(K73):
    base = base_triple(K73, 6, CMType(1, 1))
    S = build_nsystem(base, 6)
    assert len(S) == 5
    rep = verify_nsystem(S)
    assert rep.ok
    # B_i agree modulo 12
    F = K73.K0
    assert all(F.ideal(12).contains(t.B - S.triples[0].B) for t in S.triples)


def test_ramified_pairing_72(S72):
    p = pair_conjugates_ramified(S72)
    assert is_involution(p)
    real, pairs = describe_pairing(p)
    assert real == [0, 3]
    assert pairs == [(1, 2)]


def test_ramified_pairing_not_applicable_71(S71):
    with pytest.raises(NotApplicable):
        pair_conjugates_ramified(S71, 3)


def test_fricke_pairing_73(S73):
    p = pair_conjugates_fricke(S73)
    assert is_involution(p)
    real, pairs = describe_pairing(p)
    assert real == [1]
    assert pairs == [(0, 3), (2, 4)]


def test_fricke_not_applicable_when_n_does_not_divide_c1(K71):
    base = parse_triple(K71, "[1, 1, 3w + 6]")
    S = NSystem(K71, 2, [base])
    with pytest.raises(NotApplicable):
        pair_conjugates_fricke(S)


def test_reading_requires_header():
    with pytest.raises(NSystemError):
        NSystem.from_text("[1, 1, 3w + 6]\n")
