"""Quadratic polynomials A z^2 + B z + C over O_K0 describing principally
polarized ideals (b, xi) with b = z O_K0 + O_K0 and xi = ((z - conj z) lam)^-1.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .cmfield import CMField, CMType, KElem
from .realquad import RQElem, RQIdeal, bezout_elements, crt, format_rq, parse_rq


class TripleError(ValueError):
    pass


def _k0(K, v):
    if isinstance(v, RQElem):
        return v
    if isinstance(v, str):
        return parse_rq(K.K0, v)
    return K.K0(v)


class QuadraticTriple:
    """[A, B, C] with A totally positive and D = B^2 - 4AC totally negative.

    The root z = (-B + delta)/(2A) uses the square root delta of D for which
    both embeddings of xi = A/(delta lam) lie on the positive imaginary axis.
    With ``cmtype=None`` the CM type is chosen so that such a root exists,
    with s1 = +1.
    """

    __slots__ = ("K", "A", "B", "C", "cmtype", "delta", "__dict__")

    def __init__(self, K: CMField, A, B, C, cmtype: CMType | None = None):
        self.K = K
        A, B, C = _k0(K, A), _k0(K, B), _k0(K, C)
        for v in (A, B, C):
            if not v.is_integral():
                raise TripleError("coefficients must be integral")
        if not A or not A.is_totally_positive():
            raise TripleError("A = %s is not totally positive" % format_rq(A))
        self.A, self.B, self.C = A, B, C
        D = B * B - 4 * A * C
        if D.sign(0) >= 0 or D.sign(1) >= 0:
            raise TripleError("discriminant %s is not totally negative" % format_rq(D))
        r = (D / K.y).sqrt()
        if r is None:
            raise TripleError("discriminant %s does not define K" % format_rq(D))
        nsign = r.norm() > 0 and 1 or -1
        if cmtype is None:
            cmtype = CMType(1, -nsign)
        s1, s2 = cmtype.signs
        if nsign != -s1 * s2:
            raise TripleError("no root of %s is polarized for %r" % (self, cmtype))
        # need sign sigma_1(r) = -s1, sign sigma_2(r) = s2
        if r.sign(0) != -s1:
            r = -r
        assert r.sign(1) == s2
        self.cmtype = cmtype
        self.delta = KElem(K, r, K.K0(0)) * K.x

    @classmethod
    def normalized(cls, K, A, B, C, cmtype=None):
        """Accept a triple whose A is totally negative by negating all three coefficients."""
        A, B, C = _k0(K, A), _k0(K, B), _k0(K, C)
        if A and A.sign(0) < 0 and A.sign(1) < 0:
            A, B, C = -A, -B, -C
        return cls(K, A, B, C, cmtype)

    # -- derived data --------------------------------------------------------
    @property
    def D(self):
        return self.B * self.B - 4 * self.A * self.C

    @property
    def coeffs(self):
        return (self.A, self.B, self.C)

    def content(self):
        """The ideal gcd(A, B, C) of O_K0."""
        return self.K.K0.ideal(*[c for c in self.coeffs if c])

    @property
    def z(self):
        A2 = 2 * self.A
        return (self.delta - self.K.elem(self.B)) * KElem(self.K, A2.inverse(), self.K.K0(0))

    @property
    def xi(self):
        return self.K.elem(self.A) / (self.delta * self.K.elem(self.K.K0.lam))

    def with_cmtype(self, cmtype):
        return QuadraticTriple(self.K, self.A, self.B, self.C, cmtype)

    def __eq__(self, other):
        return isinstance(other, QuadraticTriple) and self.coeffs == other.coeffs and self.cmtype == other.cmtype

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        return "[%s, %s, %s]" % tuple(format_rq(c) for c in self.coeffs)

    def __repr__(self):
        return "QuadraticTriple%s" % self


def parse_triple(K, text, cmtype=None):
    m = re.fullmatch(r"\s*\[(.*)\]\s*", text)
    if not m:
        raise TripleError("triple must look like [A, B, C]: %r" % text)
    parts = [p.strip() for p in m.group(1).split(",")]
    if len(parts) != 3:
        raise TripleError("triple must have three entries: %r" % text)
    return QuadraticTriple.normalized(K, *parts, cmtype=cmtype)


class PolarizedIdeal:
    """(b, xi) with b = z O_K0 + O_K0 and the symplectic basis (z w, z, -1, b22)."""

    def __init__(self, z: KElem, xi: KElem):
        self.z, self.xi = z, xi
        K = z.K
        self.K = K
        w = K.elem(K.K0.w)
        b22 = (K.one - w) if K.K0.d0 % 4 == 1 else -w
        self.symplectic_basis = [z * w, z, -K.one, b22]

    def pairing(self, u, v):
        """E_xi(u, v) = Tr_{K/Q}(xi conj(u) v)."""
        return (self.xi * u.conj() * v).trace_q()

    def symplectic_gram(self):
        B = self.symplectic_basis
        return [[self.pairing(u, v) for v in B] for u in B]


def root_and_polarization(t: QuadraticTriple) -> PolarizedIdeal:
    xi = t.xi
    if xi.conj() != -xi:
        raise AssertionError("xi is not purely imaginary")
    return PolarizedIdeal(t.z, xi)


def multiplier_ring(t: QuadraticTriple):
    """Z-basis of O = d^-1 A z + O_K0 (d = content) and whether it is O_K."""
    K = t.K
    d = t.K.K0.principal_generator(t.content())
    az = K.elem(t.A / d) * t.z
    w = K.elem(K.K0.w)
    basis = [K.one, w, az, w * az]
    G = [[(u * v).trace_q() for v in basis] for u in basis]
    disc = _det_frac(G)
    return basis, disc, disc == K.disc


def _det_frac(M):
    M = [[Fraction(x) for x in r] for r in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


# ---------------------------------------------------------------------------
# SL2(O_K0) action: z' = (alpha z + beta)/(gamma z + delta)

def transform_coefficients(A, B, C, M):
    (al, be), (ga, de) = M
    A2 = A * de * de - B * ga * de + C * ga * ga
    B2 = -2 * A * be * de + B * (1 + 2 * be * ga) - 2 * C * al * ga
    C2 = A * be * be - B * al * be + C * al * al
    return A2, B2, C2


def sl2_transform(t: QuadraticTriple, M) -> QuadraticTriple:
    F = t.K.K0
    M = [[_k0(t.K, v) for v in row] for row in M]
    (al, be), (ga, de) = M
    if al * de - be * ga != F.one:
        raise TripleError("matrix does not have determinant 1")
    A2, B2, C2 = transform_coefficients(t.A, t.B, t.C, M)
    return QuadraticTriple(t.K, A2, B2, C2, t.cmtype)


def conj_triple(t: QuadraticTriple) -> QuadraticTriple:
    """[A, -B, C]: root -conj(z), same xi."""
    return QuadraticTriple(t.K, t.A, -t.B, t.C, t.cmtype)


def is_semiprimitive(t: QuadraticTriple, m: RQIdeal) -> bool:
    return (t.content() + m).is_unit()


def make_A_coprime(t: QuadraticTriple, m: RQIdeal):
    """An SL2-equivalent triple with gcd(A', m) = 1, and the matrix used.

    Per prime p of m: identity if p does not divide A, (0,-1;1,0) if p
    divides A but not C, and (1,0;1,1) if p divides A and C (then p does
    not divide B and A' = A - B + C is prime to p).  The bottom rows are
    glued with the CRT and completed to SL2 with Bezout.
    """
    F = t.K.K0
    if not is_semiprimitive(t, m):
        raise TripleError("triple is not semiprimitive modulo the ideal")
    primes = [P for P, _ in m.factor()]
    if all(not P.contains(t.A) for P in primes):
        one, zero = F.one, F(0)
        return t, ((one, zero), (zero, one))
    gd = []
    for P in primes:
        if not P.contains(t.A):
            gd.append((F(0), F(1), P))
        elif not P.contains(t.C):
            gd.append((F(1), F(0), P))
        else:
            gd.append((F(1), F(1), P))
    rad = F.unit_ideal
    for P in primes:
        rad = rad * P
    gamma = crt([(g, P) for g, _, P in gd])
    if not gamma:
        gamma = rad.basis()[0] if rad.basis()[0] else rad.basis()[1]
    # delta: prescribed mod the primes of m, = 1 mod the other primes of gamma
    pairs = [(d, P) for _, d, P in gd]
    for Q, _ in F.ideal(gamma).factor():
        if Q not in primes:
            pairs.append((F(1), Q))
    delta = crt(pairs)
    u, v = bezout_elements(delta, gamma)
    # u*delta + v*gamma = 1: alpha = u, beta = -v
    M = ((u, -v), (gamma, delta))
    t2 = sl2_transform(t, M)
    assert (F.ideal(t2.A) + m).is_unit()
    return t2, M


# ---------------------------------------------------------------------------
# splitting and the construction of triples with N | C

class Splitting:
    def __init__(self, kind, roots):
        self.kind = kind
        self.roots = roots

    def __eq__(self, other):
        if isinstance(other, str):
            return self.kind == other
        return isinstance(other, Splitting) and self.kind == other.kind

    def __repr__(self):
        return "Splitting(%s)" % self.kind


def _poly_U(t):
    AC = t.A * t.C
    return lambda X: X * X + t.B * X + AC


def splitting_type(t: QuadraticTriple, P: RQIdeal) -> Splitting:
    """Factor X^2 + BX + AC modulo the prime P of O_K0."""
    if not t.content().is_coprime(P):
        raise TripleError("prime divides the content of the triple")
    U = _poly_U(t)
    roots = [r for r in P.residues() if P.contains(U(r))]
    if len(roots) == 2:
        return Splitting("split", roots)
    if len(roots) == 1:
        return Splitting("ramified", roots)
    return Splitting("inert", [])


def ramified_no_root_mod_square(t: QuadraticTriple, P: RQIdeal) -> bool:
    """For a ramified P: X^2 + BX + AC has no root modulo P^2."""
    P2 = P * P
    U = _poly_U(t)
    return not any(P2.contains(U(r)) for r in P2.residues())


def theorem_n_check(K: CMField, n: RQIdeal, conductor: int = 1) -> bool:
    """Every prime of n splits in K/K0, or ramifies and divides n exactly once."""
    if not (K.K0.ideal(conductor) + n).is_unit():
        raise TripleError("modulus is not coprime to the conductor")
    for P, e in n.factor():
        kind, _ = K.relative_splitting(P)
        if kind == "inert":
            return False
        if kind == "ramified" and e > 1:
            return False
    return True


def _residues_in(P, Q):
    """Canonical residues modulo Q that lie in the ideal P (Q inside P)."""
    return [r for r in Q.residues() if P.contains(r)]


def _lift_root(U, P, e):
    """Residues r modulo P^(e+1) with U(r) in P^e but not in P^(e+1), smallest first."""
    sols = [r for r in P.residues() if P.contains(U(r))]
    Pk = P
    for k in range(1, e + 1):
        Pk1 = Pk * P
        steps = _residues_in(Pk, Pk1)
        new = []
        for r in sols:
            for s in steps:
                c = Pk1.reduce(r + s)
                val = U(c)
                if k < e:
                    if Pk1.contains(val):
                        new.append(c)
                else:
                    # final step: root mod P^e, not mod P^(e+1)
                    if Pk.contains(val) and not Pk1.contains(val):
                        new.append(c)
        sols = sorted(set(new), key=lambda x: (x.q, x.p))
        Pk = Pk1
    return sols


def make_C_divisible(t: QuadraticTriple, n: RQIdeal) -> QuadraticTriple:
    """Translate the root by an element of O_K0 so that n | C and gcd(n, C/n) = 1."""
    K = t.K
    F = K.K0
    if not theorem_n_check(K, n):
        raise TripleError("modulus fails the splitting condition")
    if not (F.ideal(t.A) + n).is_unit():
        raise TripleError("A is not coprime to the modulus")
    if _c_ok(t.C, n):
        return t
    U = _poly_U(t)
    pairs = []
    for P, e in n.factor():
        sols = _lift_root(U, P, e)
        if not sols:
            raise TripleError("X^2 + BX + AC has no suitable root modulo a prime power of the modulus")
        pairs.append((sols[0], P ** (e + 1)))
    Aid = F.ideal(t.A)
    if not Aid.is_unit():
        pairs.append((F(0), Aid))
    beta = crt(pairs)
    kappa = beta / t.A
    A2 = t.A
    B2 = t.B + 2 * beta
    C2 = t.A * kappa * kappa + t.B * kappa + t.C
    out = QuadraticTriple(K, A2, B2, C2, t.cmtype)
    assert _c_ok(out.C, n)
    return out


def _c_ok(C, n):
    F = n.field
    if not n.contains(C):
        return False
    for P, e in n.factor():
        if (P ** (e + 1)).contains(C):
            return False
    return True
