"""Seeded numerical sanity checks shared by the command line and the test suite."""

from __future__ import annotations

import random

import mpmath
from mpmath import mp, mpc, mpf

from .cmfield import CMField
from .mpnum import algdep, lll_reduce, lovasz_holds
from .realquad import RealQuadField, primes_upto
from .siegel import (ODD, InvariantSpec, PeriodMatrix, fricke, ibukiyama_forms, igusa_forms,
                     invariant_eval, random_sp4, sp4_act, theta_all)

EXAMPLE_FIELDS = ((57, 661), (18, 68), (53, 601))


def random_tau(rng: random.Random, prec, spread=0.3):
    """A period matrix near the fundamental domain with imaginary part well inside the cone."""
    with mp.workprec(prec):
        x = [mpf(rng.uniform(-0.5, 0.5)) for _ in range(3)]
        y11 = mpf(rng.uniform(0.9, 1.6))
        y22 = mpf(rng.uniform(0.9, 1.6))
        y12 = mpf(rng.uniform(-spread, spread)) * mpmath.sqrt(y11 * y22)
        return PeriodMatrix(mpc(x[0], y11), mpc(x[1], y12), mpc(x[2], y22), prec)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1)


def odd_thetas_vanish(rng, count=10, prec=200):
    bound = mpf(2) ** (-prec + 40)
    worst = mpf(0)
    for _ in range(count):
        th = theta_all(random_tau(rng, prec), prec)
        worst = max([worst] + [abs(th[j]) for j in ODD])
    return worst < bound, "max |theta_odd| = %s" % mpmath.nstr(worst, 3)


def h10_ibukiyama(rng, count=5, prec=200):
    worst = mpf(0)
    for _ in range(count):
        tau = random_tau(rng, prec)
        h10 = igusa_forms(tau, prec)[2]
        (x, y, z, k), _ = ibukiyama_forms(tau, prec)
        with mp.workprec(prec):
            worst = max(worst, rel_err(h10, 2 ** 12 * y * k))
    return worst < mpf(2) ** (-prec // 2), "max rel err %s" % mpmath.nstr(worst, 3)


def j1_invariance(rng, count=5, prec=200):
    spec = InvariantSpec.parse("igusa_j1")
    worst = mpf(0)
    for _ in range(count):
        tau = random_tau(rng, prec)
        t2, _ = sp4_act(random_sp4(rng), tau)
        worst = max(worst, rel_err(invariant_eval(spec, tau, prec), invariant_eval(spec, t2, prec)))
    return worst < mpf(2) ** (-prec // 2), "max rel err %s" % mpmath.nstr(worst, 3)


def fricke_invariance(rng, count=3, prec=200):
    spec = InvariantSpec.parse("double_hk_quotient(k=10,N1=2,N2=3)")
    F = RealQuadField(5)
    worst = mpf(0)
    for _ in range(count):
        tau = random_tau(rng, prec)
        worst = max(worst, rel_err(invariant_eval(spec, tau, prec), invariant_eval(spec, fricke(tau, 6, F), prec)))
    return worst < mpf(2) ** (-prec // 2), "max rel err %s" % mpmath.nstr(worst, 3)


def lll_lovasz(rng, count=20, dim=5):
    for _ in range(count):
        B = [[rng.randint(-1000, 1000) for _ in range(dim)] for _ in range(dim)]
        R = lll_reduce(B)
        if not lovasz_holds(R):
            return False, "Lovasz condition violated"
    return True, "%d lattices" % count


def algdep_roundtrip(rng, count=10, prec=400):
    import sympy
    X = sympy.Symbol("X")
    for _ in range(count):
        deg = rng.randint(1, 4)
        while True:
            coeffs = [rng.randint(-2 ** 20, 2 ** 20) for _ in range(deg)] + [rng.randint(1, 2 ** 20)]
            poly = sympy.Poly(list(reversed(coeffs)), X)
            if poly.is_irreducible:
                break
        with mp.workprec(prec):
            root = mpmath.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=prec)[0]
            rel = algdep(root, deg, prec=prec)
        got = sympy.Poly(list(reversed(rel)), X)
        if got.monic() != poly.monic():
            return False, "algdep returned %s for %s" % (rel, coeffs)
    return True, "%d polynomials" % count


def splitting_oracle(fields=EXAMPLE_FIELDS, bound=100):
    for a, b in fields:
        K = CMField(a, b)
        for p in primes_upto(bound):
            for P in K.K0.primes_above(p):
                if K.relative_splitting(P)[0] != K.residue_algebra_type(P):
                    return False, "disagreement over %d in (%d, %d)" % (p, a, b)
    return True, "primes < %d in %d fields" % (bound, len(fields))


def run_all(rng: random.Random, quick=True):
    scale = 1 if quick else 5
    checks = [
        ("odd thetas vanish", lambda: odd_thetas_vanish(rng, 10 * scale)),
        ("h10 = 2^12 y k", lambda: h10_ibukiyama(rng, 2 * scale)),
        ("j1 invariant under Sp4(Z)", lambda: j1_invariance(rng, 4 * scale)),
        ("Fricke invariance of the (2,3) h10 quotient", lambda: fricke_invariance(rng, 1 * scale)),
        ("LLL Lovasz condition", lambda: lll_lovasz(rng, 20 * scale)),
        ("algdep round trip", lambda: algdep_roundtrip(rng, 10 * scale)),
        ("splitting types agree", lambda: splitting_oracle(bound=100 if not quick else 50)),
    ]
    out = []
    for name, fn in checks:
        ok, detail = fn()
        out.append((name, bool(ok), detail))
    return out
