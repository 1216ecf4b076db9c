"""Exact arithmetic in a real quadratic field K0 = Q(sqrt d0) and its maximal order.

Elements are (p + q*w)/den with w the standard integral generator:
w = (1 + sqrt d0)/2 when d0 = 1 mod 4, and w = sqrt d0 otherwise.
Ideals of O_K0 are stored as 2x2 row HNF matrices in the basis (1, w).
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt

import mpmath
from mpmath import mp

from .mpnum import hnf, hnf_reduce, in_lattice


def _squarefree(n):
    if n <= 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def _sign_a_plus_b_sqrt(a, b, d):
    """Exact sign of a + b*sqrt(d) for rationals a, b and d > 0 squarefree."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # opposite signs: compare a^2 with b^2 d
    if a * a > b * b * d:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


class RealQuadField:
    def __init__(self, d0):
        if not _squarefree(d0):
            raise ValueError("d0 must be a squarefree integer > 1, got %r" % (d0,))
        self.d0 = d0
        if d0 % 4 == 1:
            self.disc = d0
            self.w_trace, self.w_norm = 1, (1 - d0) // 4   # w^2 = w_trace*w - w_norm
        else:
            self.disc = 4 * d0
            self.w_trace, self.w_norm = 0, -d0

    def __repr__(self):
        return "RealQuadField(%d)" % self.d0

    def __eq__(self, other):
        return isinstance(other, RealQuadField) and other.d0 == self.d0

    def __hash__(self):
        return hash(("K0", self.d0))

    # -- elements
    def __call__(self, p, q=0, den=1):
        return RQElem(self, p, q, den)

    @property
    def one(self):
        return RQElem(self, 1)

    @property
    def zero(self):
        return RQElem(self, 0)

    @property
    def w(self):
        return RQElem(self, 0, 1)

    @cached_property
    def lam(self):
        """Generator of the different with lam^2 = disc, positive at the first embedding."""
        if self.d0 % 4 == 1:
            return RQElem(self, -1, 2)
        return RQElem(self, 0, 2)

    @cached_property
    def sqrt_d0(self):
        if self.d0 % 4 == 1:
            return RQElem(self, -1, 2)
        return RQElem(self, 0, 1)

    def from_sqrt(self, a, b):
        """Element a + b*sqrt(d0) for rationals a, b."""
        a, b = Fraction(a), Fraction(b)
        if self.d0 % 4 == 1:
            # sqrt d0 = 2w - 1
            return RQElem.from_fractions(self, a - b, 2 * b)
        return RQElem.from_fractions(self, a, b)

    def parse(self, text):
        return parse_rq(self, text)

    # -- units and class number
    @cached_property
    def fundamental_unit(self):
        """(eps, norm) with eps > 1 at the first embedding, via the continued fraction of w."""
        D = self.d0
        if D % 4 == 1:
            P, Q = 1, 2
        else:
            P, Q = 0, 1
        sd = isqrt(D)
        h2, h1 = 0, 1
        k2, k1 = 1, 0
        for _ in range(10000):
            a = (P + sd) // Q if Q > 0 else -((-(P + sd)) // Q)
            # floor((P + sqrt D)/Q) for Q>0; the expansion keeps Q>0 for reduced forms
            h2, h1 = h1, a * h1 + h2
            k2, k1 = k1, a * k1 + k2
            u = RQElem(self, h1, -k1)
            nu = u.norm()
            if abs(nu) == 1:
                return _normalize_unit(u), int(nu)
            P = a * Q - P
            Q = (D - P * P) // Q
        raise RuntimeError("continued fraction did not reach a unit")

    @cached_property
    def class_number_is_one(self):
        """Decided by principality of the primes below the Minkowski bound."""
        bound = isqrt(self.disc) // 2 + 1
        for p in _primes_upto(bound):
            for P in self.primes_above(p):
                if P.norm <= bound and self.principal_generator(P) is None:
                    return False
        return True

    @cached_property
    def narrow_class_number_one(self):
        return self.class_number_is_one and self.fundamental_unit[1] == -1

    def embeddings(self, prec):
        with mp.workprec(prec):
            s = mpmath.sqrt(self.d0)
            if self.d0 % 4 == 1:
                return ((1 + s) / 2, (1 - s) / 2)
            return (s, -s)

    # -- ideals
    def ideal(self, *gens):
        return RQIdeal.from_generators(self, gens)

    @cached_property
    def unit_ideal(self):
        return RQIdeal(self, [[1, 0], [0, 1]])

    def splitting_of(self, p):
        """'split', 'inert' or 'ramified' for a rational prime p."""
        roots = self._w_roots_mod(p)
        if len(roots) == 2:
            return "split"
        if len(roots) == 1:
            return "ramified"
        return "inert"

    def _w_roots_mod(self, p):
        t, n = self.w_trace, self.w_norm
        return [r for r in range(p) if (r * r - t * r + n) % p == 0]

    def primes_above(self, p):
        roots = self._w_roots_mod(p)
        if not roots:
            return [RQIdeal(self, [[p, 0], [0, p]])]
        return [self.ideal(self(p), self(-r, 1)) for r in roots]

    def principal_generator(self, I):
        """A generator of the ideal I, or None if I is not principal."""
        if I.norm == 1:
            return self.one
        eps, _ = self.fundamental_unit
        e1, e2 = (abs(v) for v in eps.embed(64))
        n = I.norm
        with mp.workprec(64):
            B = mpmath.sqrt(n * e1) * (1 + mpmath.mpf(2) ** -20)
            w1, w2 = self.embeddings(64)
            # |u + v w_i| <= B for i = 1, 2  => |v| <= 2B/|w1 - w2|
            vmax = int(2 * B / abs(w1 - w2)) + 1
            best = None
            for v in range(-vmax, vmax + 1):
                lo = int(mpmath.floor(max(-B - v * w1, -B - v * w2)))
                hi = int(mpmath.ceil(min(B - v * w1, B - v * w2)))
                for u in range(lo, hi + 1):
                    g = RQElem(self, u, v)
                    if abs(g.norm()) == n and I.contains(g):
                        key = (abs(u) + abs(v), u, v)
                        if best is None or key < best[0]:
                            best = (key, g)
            return None if best is None else best[1]

    def totally_positive_generator(self, I):
        g = self.principal_generator(I)
        if g is None:
            return None
        return make_totally_positive(g)


def _normalize_unit(u):
    F = u.field
    cands = [u, -u, u.inverse(), -u.inverse()]
    for c in cands:
        if c.sign(0) > 0 and (c - F.one).sign(0) > 0:
            return c
    raise AssertionError("unreachable")


def make_totally_positive(g):
    """Multiply g by a unit to make it totally positive, then balance its two
    embeddings with totally positive units.  None if the signs cannot be fixed."""
    F = g.field
    eps, n = F.fundamental_unit
    s1, s2 = g.sign(0), g.sign(1)
    if s1 != s2:
        if n != -1:
            return None
        g = g * eps
    if g.sign(0) < 0:
        g = -g
    u = eps * eps if n == -1 else eps      # totally positive, > 1 at the first embedding
    uinv = u.inverse()
    ratio = u.embed(64)[0]
    for _ in range(1000):
        a, b = (abs(v) for v in g.embed(64))
        if a > b * ratio:
            g = g * uinv
        elif b > a * ratio:
            g = g * u
        else:
            break
    return g


def _primes_upto(n):
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i in range(n + 1) if sieve[i]]


primes_upto = _primes_upto


class RQElem:
    """(p + q*w)/den in K0, kept reduced with den > 0."""

    __slots__ = ("field", "p", "q", "den")

    def __init__(self, field, p, q=0, den=1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            p, q, den = -p, -q, -den
        g = gcd(gcd(p, q), den)
        if g > 1:
            p, q, den = p // g, q // g, den // g
        self.field = field
        self.p, self.q, self.den = int(p), int(q), int(den)

    @classmethod
    def from_fractions(cls, field, a, b):
        a, b = Fraction(a), Fraction(b)
        den = a.denominator * b.denominator // gcd(a.denominator, b.denominator)
        return cls(field, int(a * den), int(b * den), den)

    # coordinates
    @property
    def coords(self):
        return (Fraction(self.p, self.den), Fraction(self.q, self.den))

    def is_integral(self):
        return self.den == 1

    def vec(self):
        if self.den != 1:
            raise ValueError("element is not integral")
        return [self.p, self.q]

    def _coerce(self, other):
        if isinstance(other, RQElem):
            return other
        if isinstance(other, int):
            return RQElem(self.field, other)
        if isinstance(other, Fraction):
            return RQElem(self.field, other.numerator, 0, other.denominator)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RQElem(self.field, self.p * o.den + o.p * self.den,
                      self.q * o.den + o.q * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RQElem(self.field, -self.p, -self.q, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t, n = self.field.w_trace, self.field.w_norm
        # w^2 = t*w - n
        a, b, c, d = self.p, self.q, o.p, o.q
        qq = b * d
        return RQElem(self.field, a * c - n * qq, a * d + b * c + t * qq, self.den * o.den)

    __rmul__ = __mul__

    def conj(self):
        # w -> t - w
        t = self.field.w_trace
        return RQElem(self.field, self.p + t * self.q, -self.q, self.den)

    def norm(self):
        t, n = self.field.w_trace, self.field.w_norm
        a, b = self.p, self.q
        return Fraction(a * a + t * a * b + n * b * b, self.den * self.den)

    def trace(self):
        t = self.field.w_trace
        return Fraction(2 * self.p + t * self.q, self.den)

    def inverse(self):
        nm = self.norm()
        if nm == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return RQElem(self.field, c.p * nm.denominator, c.q * nm.denominator, c.den * nm.numerator)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        r = RQElem(self.field, 1)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, RQElem) else other
        if o is NotImplemented or not isinstance(o, RQElem):
            return False
        return (self.p, self.q, self.den) == (o.p, o.q, o.den)

    def __hash__(self):
        return hash((self.p, self.q, self.den))

    def __bool__(self):
        return bool(self.p or self.q)

    def as_sqrt(self):
        """(a, b) rationals with self = a + b sqrt(d0)."""
        x, y = self.coords
        if self.field.d0 % 4 == 1:
            return x + y / 2, y / 2
        return x, y

    def sign(self, j):
        """Exact sign of the j-th real embedding (j = 0, 1)."""
        a, b = self.as_sqrt()
        if j == 1:
            b = -b
        return _sign_a_plus_b_sqrt(a, b, self.field.d0)

    def is_totally_positive(self):
        if not self:
            raise ValueError("zero is neither positive nor negative")
        return self.norm() > 0 and self.trace() > 0

    def embed(self, prec):
        with mp.workprec(prec):
            w1, w2 = self.field.embeddings(prec)
            return ((self.p + self.q * w1) / self.den, (self.p + self.q * w2) / self.den)

    def sqrt(self):
        """Exact square root in K0 or None."""
        a, b = self.as_sqrt()
        d = self.field.d0
        nm = a * a - b * b * d
        r = _frac_sqrt(nm)
        if r is None:
            return None
        for s in (r, -r):
            u2 = (a + s) / 2
            ru = _frac_sqrt(u2)
            if ru is not None and ru != 0:
                v = b / (2 * ru)
                return self.field.from_sqrt(ru, v)
            if ru == 0:
                v2 = _frac_sqrt(a / d) if b == 0 else None
                if v2 is not None:
                    return self.field.from_sqrt(0, v2)
        return None

    def __repr__(self):
        return "RQElem(%s)" % format_rq(self)

    def __str__(self):
        return format_rq(self)


def _frac_sqrt(x):
    x = Fraction(x)
    if x < 0:
        return None
    n, d = isqrt(x.numerator), isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None


def format_rq(x):
    """Canonical text ``p + q*w`` (or ``(p + q*w)/den``)."""
    p, q = x.p, x.q
    if q == 0:
        s = str(p)
    elif p == 0:
        s = "%d*w" % q if q not in (1, -1) else ("w" if q == 1 else "-w")
    else:
        qa = abs(q)
        qs = "w" if qa == 1 else "%d*w" % qa
        s = "%d %s %s" % (p, "+" if q > 0 else "-", qs)
    if x.den != 1:
        s = "(%s)/%d" % (s, x.den)
    return s


def parse_rq(F, text):
    """Parse a linear expression in w such as ``-35*w - 19``, ``3w+6`` or ``(1 + w)/2``."""
    s = text.replace(" ", "")
    den = 1
    m = re.fullmatch(r"\((.*)\)/(\d+)", s)
    if m:
        s, den = m.group(1), int(m.group(2))
    if not s or not re.fullmatch(r"[-+0-9*w]+", s):
        raise ValueError("bad coefficient text %r" % text)
    p = q = 0
    for term in s.replace("-", "+-").split("+"):
        if not term:
            continue
        if term.endswith("w"):
            c = term[:-1]
            if c.endswith("*"):
                c = c[:-1]
                if c in ("", "-"):
                    raise ValueError("bad coefficient text %r" % text)
            q += -1 if c == "-" else (1 if c == "" else int(c))
        else:
            p += int(term)
    return RQElem(F, p, q, den)


class RQIdeal:
    """Nonzero ideal of O_K0 as a row HNF [[a, b], [0, c]] in the basis (1, w)."""

    __slots__ = ("field", "H", "norm")

    def __init__(self, field, rows):
        H = hnf(rows, 2)
        if len(H) != 2:
            raise ValueError("zero or degenerate ideal")
        self.field = field
        self.H = tuple(tuple(r) for r in H)
        self.norm = H[0][0] * H[1][1]

    @classmethod
    def from_generators(cls, F, gens):
        rows = []
        for g in gens:
            if isinstance(g, int):
                g = F(g)
            if not g.is_integral():
                raise ValueError("ideal generators must be integral")
            rows.append(g.vec())
            rows.append((g * F.w).vec())
        if not any(any(r) for r in rows):
            raise ValueError("zero ideal")
        return cls(F, rows)

    def basis(self):
        return [RQElem(self.field, r[0], r[1]) for r in self.H]

    def __mul__(self, other):
        if isinstance(other, (RQElem, int)):
            other = RQIdeal.from_generators(self.field, [other])
        rows = []
        for a in self.basis():
            for b in other.basis():
                rows.append((a * b).vec())
        return RQIdeal(self.field, rows)

    def __pow__(self, e):
        r = self.field.unit_ideal
        for _ in range(e):
            r = r * self
        return r

    def __add__(self, other):
        return RQIdeal(self.field, list(self.H) + list(other.H))

    gcd = __add__

    def __eq__(self, other):
        return isinstance(other, RQIdeal) and self.H == other.H

    def __hash__(self):
        return hash(self.H)

    def contains(self, x):
        if isinstance(x, int):
            x = self.field(x)
        if not x.is_integral():
            return False
        return in_lattice(self.H, x.vec())

    def divides(self, x):
        return self.contains(x)

    def contains_ideal(self, other):
        return all(in_lattice(self.H, r) for r in other.H)

    def is_unit(self):
        return self.norm == 1

    def is_coprime(self, other):
        return (self + other).is_unit()

    def reduce(self, x):
        """Canonical residue of the integral element x modulo the ideal."""
        v = hnf_reduce(self.H, x.vec())
        return RQElem(self.field, v[0], v[1])

    def residues(self):
        """All canonical residues, ordered by (coefficient of 1, coefficient of w)."""
        a, c = self.H[0][0], self.H[1][1]
        out = []
        # canonical residues: 0 <= first coord < a, 0 <= second < c
        for v in range(c):
            for u in range(a):
                out.append(RQElem(self.field, u, v))
        out.sort(key=lambda e: (e.q, e.p))
        return out

    def factor(self):
        """List of (prime ideal, exponent)."""
        n = self.norm
        ps = []
        m = n
        k = 2
        while k * k <= m:
            if m % k == 0:
                ps.append(k)
                while m % k == 0:
                    m //= k
            k += 1
        if m > 1:
            ps.append(m)
        out = []
        for p in ps:
            for P in self.field.primes_above(p):
                e = self.valuation(P)
                if e:
                    out.append((P, e))
        return out

    def valuation(self, P):
        e = 0
        Q = P
        while Q.contains_ideal(self):
            e += 1
            Q = Q * P
            if e > 200:
                raise ValueError("valuation did not terminate")
        return e

    def __repr__(self):
        return "RQIdeal(%s)" % (list(map(list, self.H)),)


def crt(pairs):
    """Solve x = r_i mod I_i for pairwise coprime ideals; returns canonical x mod prod I_i."""
    F = pairs[0][1].field
    x = F(0)
    M = F.unit_ideal
    for r, I in pairs:
        # find e in M with e = 1 mod I, via the Bezout identity M + I = O
        e = bezout_ideals(M, I)
        # x' = x + e*(r - x) keeps x mod M and gives r mod I
        x = x + e * (r - x)
        M = M * I
        x = M.reduce(x)
    return x


def bezout_ideals(I, J):
    """Element e in I with 1 - e in J (I and J coprime)."""
    rows = [list(r) for r in I.H] + [list(r) for r in J.H]
    H, U = hnf(rows, 2, transform=True)
    if H != [[1, 0], [0, 1]]:
        raise ValueError("ideals are not coprime")
    # row 0 of U*rows is (1, 0); split its combination into the I part
    u = U[0]
    e = [sum(u[k] * rows[k][j] for k in range(len(I.H))) for j in range(2)]
    return RQElem(I.field, e[0], e[1])


def bezout_elements(x, y):
    """(u, v) in O_K0 with u*x + v*y = 1 when x, y generate the unit ideal."""
    F = x.field
    gens = [x, x * F.w, y, y * F.w]
    rows = [g.vec() for g in gens]
    H, U = hnf(rows, 2, transform=True)
    if H != [[1, 0], [0, 1]]:
        raise ValueError("elements are not coprime")
    c = U[0]
    u = F(c[0], c[1])
    v = F(c[2], c[3])
    assert u * x + v * y == F.one
    return u, v
