"""Primitive quartic CM fields K = Q[x]/(x^4 + a x^2 + b) over K0 = Q(x^2).

Elements are stored relative to an O_K0-basis (1, theta) of O_K, so that
u + v*theta with u, v in K0.  Because K0 is assumed to have class number one,
O_K is free over O_K0 and such a theta always exists.  The Z-basis of O_K
used for ideals is (1, w, theta, w*theta).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, isqrt

import mpmath
from mpmath import mp

from .mpnum import det_int, hnf, in_lattice, hnf_reduce, lll_reduce, smith_form, inverse_unimodular
from .realquad import RealQuadField, RQElem, RQIdeal, primes_upto


class CMFieldError(ValueError):
    pass


def _kernel_mod_p(rows, p):
    """Basis of {c : sum_i c_i rows_i = 0 mod p} (left kernel)."""
    m = len(rows)
    ncols = len(rows[0])
    # augment with identity to track combinations
    A = [[v % p for v in rows[i]] + [int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [v * inv % p for v in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(v - f * u) % p for v, u in zip(A[i], A[r])]
        r += 1
    return [row[ncols:] for row in A[r:]]


def _inverse_fraction(M):
    n = len(M)
    A = [[Fraction(v) for v in M[i]] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if A[i][c])
        A[c], A[piv] = A[piv], A[c]
        pv = A[c][c]
        A[c] = [v / pv for v in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [v - f * u for v, u in zip(A[i], A[c])]
    return [row[n:] for row in A]


# ---------------------------------------------------------------------------
# bootstrap arithmetic in the power basis (1, x, x^2, x^3)

def _pmul(f, g, a, b):
    prod = [Fraction(0)] * 7
    for i, fi in enumerate(f):
        if fi:
            for j, gj in enumerate(g):
                if gj:
                    prod[i + j] += fi * gj
    # x^4 = -a x^2 - b
    for k in (6, 5, 4):
        c = prod[k]
        if c:
            prod[k] = Fraction(0)
            prod[k - 2] -= a * c
            prod[k - 4] -= b * c
    return tuple(prod[:4])


def _charpoly_int(M):
    """Characteristic polynomial coefficients c_1..c_n (X^n + c_1 X^(n-1) + ...)
    of an integer matrix, by Faddeev-LeVerrier with exact division."""
    n = len(M)
    Mk = [[int(i == j) for j in range(n)] for i in range(n)]
    cs = []
    c = 1
    AM = None
    for k in range(1, n + 1):
        AM = [[sum(M[i][l] * Mk[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        tr = sum(AM[i][i] for i in range(n))
        c = Fraction(-tr, k)
        assert c.denominator == 1
        c = int(c)
        cs.append(c)
        Mk = [[AM[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
    return cs


class CMType:
    """Signs (s1, s2) of Im phi_j(x); phi_j restricts to the j-th real embedding of K0."""

    def __init__(self, s1, s2):
        if s1 not in (1, -1) or s2 not in (1, -1):
            raise ValueError("CM type signs must be +1 or -1")
        self.signs = (s1, s2)

    def __eq__(self, other):
        return isinstance(other, CMType) and self.signs == other.signs

    def __hash__(self):
        return hash(self.signs)

    def conjugate(self):
        return CMType(-self.signs[0], -self.signs[1])

    def __repr__(self):
        return "CMType(%+d, %+d)" % self.signs


class CMField:
    def __init__(self, a, b):
        a, b = int(a), int(b)
        if not (a > 0 and b > 0 and a * a > 4 * b):
            raise CMFieldError("x^4 + %d x^2 + %d is not a CM field equation" % (a, b))
        disc = a * a - 4 * b
        if isqrt(disc) ** 2 == disc:
            raise CMFieldError("x^4 + %d x^2 + %d is reducible" % (a, b))
        if isqrt(b) ** 2 == b:
            raise CMFieldError("biquadratic field (b is a square)")
        if isqrt(b * disc) ** 2 == b * disc:
            raise CMFieldError("cyclic field (b(a^2-4b) is a square)")
        self.a, self.b = a, b
        f, d0 = 1, disc
        k = 2
        while k * k <= d0:
            while d0 % (k * k) == 0:
                d0 //= k * k
                f *= k
            k += 1
        self.f, self.d0 = f, d0
        self.K0 = RealQuadField(d0)
        self._bootstrap()

    def __repr__(self):
        return "CMField(%d, %d)" % (self.a, self.b)

    # -- setup ---------------------------------------------------------------
    @cached_property
    def y(self):
        """x^2 as an element of K0: y = (f sqrt(d0) - a)/2."""
        return self.K0.from_sqrt(Fraction(-self.a, 2), Fraction(self.f, 2))

    def _k0_to_power(self, e):
        a_, b_ = e.as_sqrt()
        # sqrt d0 = (2y + a)/f
        return (a_ + b_ * Fraction(self.a, self.f), Fraction(0), b_ * Fraction(2, self.f), Fraction(0))

    def _power_mul(self, f, g):
        return _pmul(f, g, self.a, self.b)

    def _power_trace(self, f):
        # traces of 1, x, x^2, x^3
        tr = (4, 0, -2 * self.a, 0)
        return sum(c * t for c, t in zip(f, tr))

    def _bootstrap(self):
        w = self._k0_to_power(self.K0.w)
        one = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        x = (Fraction(0), Fraction(1), Fraction(0), Fraction(0))
        basis = [one, w, x, self._power_mul(w, x)]
        basis = self._maximal_order(basis)
        self._theta_power = self._find_theta(basis)
        th = self._theta_power
        thc = (th[0], -th[1], th[2], -th[3])
        T = tuple(p + q for p, q in zip(th, thc))
        N = self._power_mul(th, thc)
        self.theta_trace = self._power_to_k0(T)
        self.theta_norm = self._power_to_k0(N)
        if not (self.theta_trace.is_integral() and self.theta_norm.is_integral()):
            raise AssertionError("theta is not integral")

    def _power_to_k0(self, f):
        if f[1] or f[3]:
            raise ValueError("element is not in K0")
        # c0 + c2 y
        return self.K0.from_sqrt(0, 0) + self.K0(0) + _k0_from(self.K0, f[0]) + self.y * _k0_from(self.K0, f[2])

    def _disc(self, basis):
        G = [[self._power_trace(self._power_mul(u, v)) for v in basis] for u in basis]
        return det_int(G)

    def _order_coords(self, basis, elem):
        # solve elem = sum c_i basis_i over Q
        n = 4
        A = [[basis[j][i] for j in range(n)] + [elem[i]] for i in range(n)]
        for c in range(n):
            p = next(r for r in range(c, n) if A[r][c] != 0)
            A[c], A[p] = A[p], A[c]
            pv = A[c][c]
            A[c] = [v / pv for v in A[c]]
            for r in range(n):
                if r != c and A[r][c]:
                    fct = A[r][c]
                    A[r] = [v - fct * u for v, u in zip(A[r], A[c])]
        return [A[i][n] for i in range(n)]

    def _mult_matrix(self, basis, elem):
        # rows: coordinates of elem * basis_j
        return [[int(c) for c in self._order_coords(basis, self._power_mul(elem, bj))] for bj in basis]

    def _maximal_order(self, basis):
        """Enlarge an order to the maximal order, one round-two step per index prime."""
        while True:
            d = abs(self._disc(basis))
            grown = False
            for p in _prime_factors(d):
                if d % (p * p):
                    continue
                new = self._p_enlargement(basis, p)
                if new:
                    basis = self._ring_closure(basis + new)
                    grown = True
                    break
            if not grown:
                return basis

    def _p_enlargement(self, basis, p):
        """Elements of the multiplier ring of the p-radical that are not in the order."""
        n = 4
        mats = [self._mult_matrix(basis, bj) for bj in basis]

        def mul(u, v):
            # coordinates of u*v, u and v given in basis coordinates
            return [sum(u[k] * v[i] * mats[k][i][j] for k in range(n) for i in range(n)) for j in range(n)]

        q = p
        while q < n:
            q *= p
        frob = []
        for i in range(n):
            e = [int(i == j) for j in range(n)]
            r = [int(j == 0) for j in range(n)]
            k = q
            while k:
                if k & 1:
                    r = [c % p for c in mul(r, e)]
                e = [c % p for c in mul(e, e)]
                k >>= 1
            frob.append(r)
        rad = _kernel_mod_p(frob, p)
        I = hnf([list(v) for v in rad] + [[p * int(i == j) for j in range(n)] for i in range(n)], n)
        inv = _inverse_fraction(I)
        cond = []
        for g in I:
            for i in range(n):
                e = [int(i == j) for j in range(n)]
                prod = mul(e, g)
                cs = [sum(Fraction(prod[k]) * inv[k][j] for k in range(n)) for j in range(n)]
                cond.append([int(c) % p for c in cs])
        # c in F_p^n with sum_i c_i (b_i g) in p I for every generator g
        rows = [[cond[gi * n + i][j] for i in range(n)] for gi in range(n) for j in range(n)]
        sols = _kernel_mod_p(list(map(list, zip(*rows))), p)
        out = []
        for c in sols:
            out.append(tuple(sum(Fraction(c[k], p) * basis[k][i] for k in range(n)) for i in range(n)))
        return out

    def _ring_closure(self, elems):
        basis = self._lattice_basis(elems)
        while True:
            prods = [self._power_mul(u, v) for i, u in enumerate(basis) for v in basis[i:]]
            nb = self._lattice_basis(basis + prods)
            if nb == basis:
                return basis
            basis = nb

    def _lattice_basis(self, elems):
        den = 1
        for e in elems:
            for c in e:
                den = den * c.denominator // gcd(den, c.denominator)
        rows = [[int(c * den) for c in e] for e in elems]
        H = hnf(rows, 4)
        return [tuple(Fraction(c, den) for c in r) for r in H]

    def _find_theta(self, basis):
        """theta with O_K = O_K0 + O_K0 theta.

        The odd parts of O_K, divided by x, form a fractional O_K0-ideal L;
        any element of O_K whose odd part is a generator of L works.
        """
        one = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        w = self._k0_to_power(self.K0.w)
        x = (Fraction(0), Fraction(1), Fraction(0), Fraction(0))
        qbasis = [one, w, x, self._power_mul(w, x)]
        odd = [self._order_coords(qbasis, b)[2:] for b in basis]
        den = 1
        for r in odd:
            for c in r:
                den = den * c.denominator // gcd(den, c.denominator)
        rows = [[int(c * den) for c in r] for r in odd]
        I = RQIdeal(self.K0, rows)
        g = self.K0.principal_generator(I)
        if g is None:
            raise CMFieldError("no O_K0-basis (1, theta) of O_K found")
        H, U = hnf(rows, 2, transform=True)
        full = [list(r) for r in (H + [[0, 0]] * (len(rows) - len(H)))]
        target = [g.p, g.q] if g.den == 1 else None
        if target is None:
            raise AssertionError("generator of an integral ideal is not integral")
        y = [0] * len(rows)
        rem = list(target)
        for k, r in enumerate(full):
            piv = next((c for c, v in enumerate(r) if v), None)
            if piv is None:
                continue
            q, m = divmod(rem[piv], r[piv])
            if m:
                raise AssertionError("generator not in lattice")
            y[k] = q
            rem = [a - q * b for a, b in zip(rem, r)]
        assert not any(rem)
        coef = [sum(y[k] * U[k][i] for k in range(len(rows))) for i in range(len(rows))]
        th = tuple(sum(coef[k] * basis[k][i] for k in range(len(basis))) for i in range(4))
        # remove the integral part of the even component
        c = self._order_coords(qbasis, th)
        shift = [Fraction(c[0] // 1), Fraction(c[1] // 1)]
        th = tuple(t - shift[0] * o - shift[1] * ww for t, o, ww in zip(th, one, w))
        return th

    # -- elements ----------------------------------------------------------
    def elem(self, u, v=None):
        if v is None:
            v = self.K0(0)
        if isinstance(u, int):
            u = self.K0(u)
        if isinstance(v, int):
            v = self.K0(v)
        return KElem(self, u, v)

    @property
    def one(self):
        return KElem(self, self.K0.one, self.K0(0))

    @cached_property
    def theta(self):
        return KElem(self, self.K0(0), self.K0.one)

    def from_power(self, f):
        """Element given by power-basis coordinates (c0, c1, c2, c3)."""
        f = tuple(Fraction(c) for c in f) + (Fraction(0),) * (4 - len(f))
        th = self._theta_power
        # odd parts are x*(e1 + e3 y)
        e_odd = _k0_from(self.K0, f[1]) + self.y * _k0_from(self.K0, f[3])
        t_odd = _k0_from(self.K0, th[1]) + self.y * _k0_from(self.K0, th[3])
        v = e_odd / t_odd
        e_even = _k0_from(self.K0, f[0]) + self.y * _k0_from(self.K0, f[2])
        t_even = _k0_from(self.K0, th[0]) + self.y * _k0_from(self.K0, th[2])
        u = e_even - v * t_even
        return KElem(self, u, v)

    @cached_property
    def x(self):
        return self.from_power((0, 1, 0, 0))

    def parse(self, text):
        """Parse a polynomial expression in x with rational coefficients."""
        import sympy
        X = sympy.Symbol("x")
        W = sympy.Symbol("w")
        expr = sympy.sympify(text.replace("^", "**"), locals={"x": X, "w": W})
        wpow = self._k0_to_power(self.K0.w)
        expr = sympy.expand(expr.subs(W, sum(sympy.Rational(c.numerator, c.denominator) * X ** i
                                              for i, c in enumerate(wpow))))
        num, den = sympy.fraction(sympy.together(expr))
        if den.free_symbols:
            raise ValueError("only polynomial expressions in x are supported: %r" % text)
        P = sympy.Poly(num, X)
        coeffs = [Fraction(0)] * 4
        acc = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        xp = (Fraction(0), Fraction(1), Fraction(0), Fraction(0))
        powers = [acc]
        for _ in range(P.degree()):
            acc = self._power_mul(acc, xp)
            powers.append(acc)
        dd = Fraction(int(sympy.Integer(den)))
        for (k,), c in P.terms():
            c = Fraction(int(sympy.numer(c)), int(sympy.denom(c))) / dd
            coeffs = [s + c * t for s, t in zip(coeffs, powers[k])]
        return self.from_power(coeffs)

    # -- numerics ----------------------------------------------------------
    def x_embeddings(self, cmtype, prec):
        with mp.workprec(prec):
            ys = self.y.embed(prec)
            return tuple(mpmath.mpc(0, s * mpmath.sqrt(-yj)) for s, yj in zip(cmtype.signs, ys))

    def theta_embeddings(self, cmtype, prec):
        xs = self.x_embeddings(cmtype, prec)
        th = self._theta_power
        with mp.workprec(prec):
            return tuple(sum(mpmath.mpf(c.numerator) / c.denominator * xj ** i for i, c in enumerate(th)) for xj in xs)

    # -- integral structure --------------------------------------------------
    @cached_property
    def disc(self):
        G = [[(e * f).trace_q() for f in self.zbasis] for e in self.zbasis]
        return det_int(G)

    @cached_property
    def zbasis(self):
        K0 = self.K0
        return [self.one, self.elem(K0.w), self.theta, self.elem(0, K0.w)]

    @cached_property
    def trace_gram(self):
        """Gram matrix of Tr_{K/Q}(e_i * conj(e_j)) on the Z-basis of O_K."""
        return [[int((e * f.conj()).trace_q()) for f in self.zbasis] for e in self.zbasis]

    @cached_property
    def minkowski_bound(self):
        with mp.workprec(64):
            return mpmath.mpf(24) / 256 * (4 / mpmath.pi) ** 2 * mpmath.sqrt(abs(self.disc))

    def ideal(self, *gens):
        return CMIdeal.from_generators(self, gens)

    @cached_property
    def unit_ideal(self):
        return CMIdeal(self, [[int(i == j) for j in range(4)] for i in range(4)])

    def extend_ideal(self, I):
        """O_K-ideal generated by an ideal of O_K0."""
        return CMIdeal.from_generators(self, [self.elem(g) for g in I.basis()])

    def relative_splitting(self, P):
        """Splitting of a prime P of O_K0 in K/K0 via the O_K0-generator theta.

        Returns (type, roots) with roots the residues r for which
        P O_K + (theta - r) O_K are the primes above P.
        """
        T, N = self.theta_trace, self.theta_norm
        roots = [r for r in P.residues() if P.contains(r * r - T * r + N)]
        if len(roots) == 2:
            return "split", roots
        if len(roots) == 1:
            return "ramified", roots
        return "inert", []

    def residue_algebra_type(self, P):
        """Splitting of P read off from the F_p-algebra O_K / P O_K.

        Independent of theta: a nonzero radical means ramified, otherwise the
        dimension of the Frobenius-fixed subalgebra counts the primes above P.
        """
        p = P.norm
        for q in primes_upto(p):
            if p % q == 0:
                p = q
                break
        zb = self.zbasis
        table = [[(u * v).coords() for v in zb] for u in zb]

        def mul(a, b):
            out = [0] * 4
            for i in range(4):
                if a[i]:
                    for j in range(4):
                        if b[j]:
                            c = a[i] * b[j]
                            out = [(o + c * t) % p for o, t in zip(out, table[i][j])]
            return out

        def power(a, e):
            r, b = [1, 0, 0, 0], a
            while e:
                if e & 1:
                    r = mul(r, b)
                b = mul(b, b)
                e >>= 1
            return r

        W = [[v % p for v in row] for row in self.extend_ideal(P).H]
        dimW = 4 - len(_kernel_mod_p([list(c) for c in zip(*W)], p))

        def preimage_dim(images):
            # dim {c : sum c_i images_i in W}
            rows = [list(img) for img in images] + W
            ker = _kernel_mod_p(rows, p)
            proj = [k[:4] for k in ker]
            return 4 - len(_kernel_mod_p([list(c) for c in zip(*proj)], p)) if proj else 0

        e = [[int(i == j) for j in range(4)] for i in range(4)]
        q = p
        while q < 4:
            q *= p
        rad = preimage_dim([power(b, q) for b in e]) - dimW
        if rad > 0:
            return "ramified"
        fixed = preimage_dim([[(x - y) % p for x, y in zip(power(b, p), b)] for b in e]) - dimW
        return "split" if fixed == 2 else "inert"

    def primes_over(self, P):
        typ, roots = self.relative_splitting(P)
        PK = self.extend_ideal(P)
        if typ == "inert":
            return [PK]
        return [PK + self.ideal(self.theta - self.elem(r)) for r in roots]

    def primes_above(self, p):
        out = []
        for P in self.K0.primes_above(p):
            out.extend(self.primes_over(P))
        return out

    @cached_property
    def unit_bound(self):
        eps, _ = self.K0.fundamental_unit
        e = eps.embed(64)[0]
        return e + 1 / e

    def is_principal(self, I):
        return is_principal(I)

    @cached_property
    def class_group(self):
        return ClassGroup(self)

    # -- CM types and reflex -------------------------------------------------
    def cm_types(self):
        return [CMType(1, 1), CMType(1, -1), CMType(-1, 1), CMType(-1, -1)]

    def reflex(self, cmtype):
        return ReflexData(self, cmtype)

    # -- Shimura group -------------------------------------------------------
    def shimura_group(self, orbit_generators=None):
        return ShimuraGroup(self, orbit_generators)


def _k0_from(K0, c):
    c = Fraction(c)
    return RQElem(K0, c.numerator, 0, c.denominator)


def _prime_factors(n):
    n = abs(n)
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------

def maximal_order_disc(a, b):
    """Discriminant of the ring of integers of Q[x]/(x^4 + a x^2 + b), without the full field set-up."""
    stub = object.__new__(CMField)
    stub.a, stub.b = a, b
    basis = [tuple(Fraction(int(i == j)) for j in range(4)) for i in range(4)]
    return stub._disc(stub._maximal_order(basis))


class KElem:
    """u + v*theta with u, v in K0."""

    __slots__ = ("K", "u", "v")

    def __init__(self, K, u, v):
        self.K, self.u, self.v = K, u, v

    def _c(self, o):
        if isinstance(o, KElem):
            return o
        if isinstance(o, (int, Fraction)):
            return KElem(self.K, self.K.K0(0) + o, self.K.K0(0))
        if isinstance(o, RQElem):
            return KElem(self.K, o, self.K.K0(0))
        return NotImplemented

    def __add__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        return KElem(self.K, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __neg__(self):
        return KElem(self.K, -self.u, -self.v)

    def __sub__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        return KElem(self.K, self.u - o.u, self.v - o.v)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._c(o)
        if o is NotImplemented:
            return o
        T, N = self.K.theta_trace, self.K.theta_norm
        vv = self.v * o.v
        # theta^2 = T theta - N
        return KElem(self.K, self.u * o.u - N * vv, self.u * o.v + self.v * o.u + T * vv)

    __rmul__ = __mul__

    def conj(self):
        T = self.K.theta_trace
        return KElem(self.K, self.u + self.v * T, -self.v)

    def rel_norm(self):
        T, N = self.K.theta_trace, self.K.theta_norm
        return self.u * self.u + self.u * self.v * T + self.v * self.v * N

    def rel_trace(self):
        return 2 * self.u + self.v * self.K.theta_trace

    def norm_q(self):
        return self.rel_norm().norm()

    def trace_q(self):
        return self.rel_trace().trace()

    def inverse(self):
        n = self.rel_norm()
        if not n:
            raise ZeroDivisionError("inverse of zero")
        ni = n.inverse()
        c = self.conj()
        return KElem(self.K, c.u * ni, c.v * ni)

    def __truediv__(self, o):
        o = self._c(o)
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self._c(o) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        r = self.K.one
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def __eq__(self, o):
        o = self._c(o) if not isinstance(o, KElem) else o
        if not isinstance(o, KElem):
            return False
        return self.u == o.u and self.v == o.v

    def __hash__(self):
        return hash((self.u, self.v))

    def __bool__(self):
        return bool(self.u) or bool(self.v)

    def in_k0(self):
        return not self.v

    def as_k0(self):
        if self.v:
            raise ValueError("element is not in K0")
        return self.u

    def is_integral(self):
        return self.u.is_integral() and self.v.is_integral()

    def coords(self):
        """Integer coordinates in the Z-basis (1, w, theta, w*theta)."""
        if not self.is_integral():
            raise ValueError("element is not integral")
        return [self.u.p, self.u.q, self.v.p, self.v.q]

    def embed(self, cmtype, prec):
        """(phi_1(self), phi_2(self)) for the CM type."""
        ths = self.K.theta_embeddings(cmtype, prec)
        with mp.workprec(prec):
            us, vs = self.u.embed(prec), self.v.embed(prec)
            return tuple(us[j] + vs[j] * ths[j] for j in range(2))

    def to_power(self):
        K = self.K
        u = K._k0_to_power(self.u)
        v = K._k0_to_power(self.v)
        tv = K._power_mul(v, K._theta_power)
        return tuple(p + q for p, q in zip(u, tv))

    def __repr__(self):
        return "KElem(%s)" % self

    def __str__(self):
        c = self.to_power()
        terms = []
        for i, ci in enumerate(c):
            if ci:
                mon = "" if i == 0 else ("x" if i == 1 else "x^%d" % i)
                terms.append((ci, mon))
        if not terms:
            return "0"
        den = reduce(lambda acc, t: acc * t[0].denominator // gcd(acc, t[0].denominator), terms, 1)
        parts = []
        for ci, mon in reversed(terms):
            n = int(ci * den)
            if mon:
                s = mon if abs(n) == 1 else "%d*%s" % (abs(n), mon)
            else:
                s = str(abs(n))
            parts.append(("-" if n < 0 else "+", s))
        txt = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sg, s in parts[1:]:
            txt += " %s %s" % (sg, s)
        return txt if den == 1 else "(%s)/%d" % (txt, den)


# ---------------------------------------------------------------------------

class CMIdeal:
    """Nonzero O_K-ideal as a 4x4 row HNF in the Z-basis (1, w, theta, w*theta)."""

    __slots__ = ("K", "H", "norm")

    def __init__(self, K, rows):
        H = hnf(rows, 4)
        if len(H) != 4:
            raise ValueError("degenerate ideal lattice")
        self.K = K
        self.H = tuple(tuple(r) for r in H)
        n = 1
        for i in range(4):
            n *= H[i][i]
        self.norm = n

    @classmethod
    def from_generators(cls, K, gens):
        rows = []
        for g in gens:
            if isinstance(g, (int, RQElem)):
                g = K.elem(g)
            if not g.is_integral():
                raise ValueError("ideal generators must be integral")
            for e in K.zbasis:
                rows.append((g * e).coords())
        return cls(K, rows)

    def basis(self):
        K = self.K
        return [KElem(K, RQElem(K.K0, r[0], r[1]), RQElem(K.K0, r[2], r[3])) for r in self.H]

    def __mul__(self, other):
        if isinstance(other, (KElem, int, RQElem)):
            other = CMIdeal.from_generators(self.K, [other])
        rows = [(a * b).coords() for a in self.basis() for b in other.basis()]
        return CMIdeal(self.K, rows)

    def __pow__(self, e):
        r = self.K.unit_ideal
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def __add__(self, other):
        return CMIdeal(self.K, list(self.H) + list(other.H))

    def conj(self):
        return CMIdeal(self.K, [e.conj().coords() for e in self.basis()])

    def __eq__(self, other):
        return isinstance(other, CMIdeal) and self.H == other.H

    def __hash__(self):
        return hash(self.H)

    def contains(self, x):
        if isinstance(x, (int, RQElem)):
            x = self.K.elem(x)
        if not x.is_integral():
            return False
        return in_lattice(self.H, x.coords())

    def contains_ideal(self, other):
        return all(in_lattice(self.H, r) for r in other.H)

    def is_unit(self):
        return self.norm == 1

    def relative_norm(self):
        """N_{K/K0}(I) as an ideal of O_K0, computed as (I * conj I) meet O_K0."""
        J = self * self.conj()
        # put the theta coordinates first so that the last rows lie in O_K0
        rows = [[r[3], r[2], r[1], r[0]] for r in J.H]
        H = hnf(rows, 4)
        sub = [[r[3], r[2]] for r in H if r[0] == 0 and r[1] == 0]
        return RQIdeal(self.K.K0, sub)

    def is_primitive(self):
        """No nontrivial ideal of O_K0 divides I."""
        return self.relative_norm().norm == self.norm

    def __repr__(self):
        return "CMIdeal(norm=%d, %s)" % (self.norm, [list(r) for r in self.H])


def _fincke_pohst(G, bound):
    """All nonzero integer vectors v with v G v^T <= bound (G positive definite)."""
    n = len(G)
    with mp.workprec(128):
        Q = [[mpmath.mpf(G[i][j]) for j in range(n)] for i in range(n)]
        # q_ii, q_ij (i<j) per Cohen 2.7.5
        for i in range(n):
            for j in range(i + 1, n):
                Q[j][i] = Q[i][j]
                Q[i][j] = Q[i][j] / Q[i][i]
            for k in range(i + 1, n):
                for l in range(k, n):
                    Q[k][l] -= Q[k][i] * Q[i][l]
        C = mpmath.mpf(bound) * (1 + mpmath.mpf(2) ** -40) + mpmath.mpf(2) ** -40
        out = []
        x = [0] * n

        def rec(i, rem):
            # centre of coordinate i given x[i+1:]
            c = -sum(Q[i][j] * x[j] for j in range(i + 1, n))
            r = mpmath.sqrt(max(rem, 0) / Q[i][i])
            lo = int(mpmath.ceil(c - r))
            hi = int(mpmath.floor(c + r))
            for xi in range(lo, hi + 1):
                x[i] = xi
                t = rem - Q[i][i] * (xi - c) ** 2
                if t < 0:
                    continue
                if i == 0:
                    if any(x):
                        out.append(list(x))
                else:
                    rec(i - 1, t)
            x[i] = 0

        rec(n - 1, C)
        return out


def reduced_basis(I):
    """LLL-reduced basis of I for the positive definite form Tr(a conj b)."""
    K = I.K
    B = [list(r) for r in I.H]
    G0 = K.trace_gram

    def form(u, v):
        return sum(u[i] * G0[i][j] * v[j] for i in range(4) for j in range(4))

    red = lll_reduce(B, inner=form)
    G = [[form(u, v) for v in red] for u in red]
    return red, G


def is_principal(I):
    """A generator of I or None.

    If I = alpha O_K, some unit multiple of alpha has both |phi_j(alpha)|^2
    within a factor eps of sqrt(N(I)), so Tr(alpha conj alpha) is at most
    2 sqrt(N I) (eps + 1/eps).  All lattice vectors below that bound are
    enumerated, which makes a None answer a proof.
    """
    K = I.K
    if I.norm == 1:
        return K.one
    red, G = reduced_basis(I)
    with mp.workprec(64):
        bound = 2 * mpmath.sqrt(I.norm) * K.unit_bound
    cands = _fincke_pohst(G, bound)
    cands.sort(key=lambda v: (sum(abs(c) for c in v), v))
    for v in cands:
        coords = [sum(v[i] * red[i][j] for i in range(4)) for j in range(4)]
        al = KElem(K, RQElem(K.K0, coords[0], coords[1]), RQElem(K.K0, coords[2], coords[3]))
        if al.norm_q() == I.norm:
            return al
    return None


def same_class(I, J):
    """[I] == [J] in Cl(O_K): I * conj(J) is principal since J conj(J) comes from K0."""
    return is_principal(I * J.conj()) is not None


# ---------------------------------------------------------------------------

class ClassGroup:
    """Cl(O_K) from the primes below the Minkowski bound.

    Classes are enumerated by closing the identity under multiplication by
    the factor-base primes, comparing classes with principality tests.  The
    Cayley-graph relations give a relation lattice whose Smith form yields
    the cyclic decomposition.
    """

    def __init__(self, K):
        self.K = K
        bound = K.minkowski_bound
        if bound > 10 ** 4:
            raise CMFieldError("Minkowski bound %s too large for desk-scale class groups" % bound)
        fb = []
        for p in primes_upto(int(bound)):
            for P in K.primes_above(p):
                if P.norm <= bound:
                    fb.append(P)
        self.factor_base = fb
        r = len(fb)
        reps = [K.unit_ideal]
        words = [[0] * r]
        relations = []
        i = 0
        while i < len(reps):
            for k, P in enumerate(fb):
                J = reps[i] * P
                j = self._find(reps, J)
                w = list(words[i])
                w[k] += 1
                if j is None:
                    reps.append(J)
                    words.append(w)
                else:
                    relations.append([a - b for a, b in zip(w, words[j])])
            i += 1
        self.order = len(reps)
        self._reps = reps
        self._words = words
        if r == 0:
            self.invariants = []
            self.generators = []
            self._V = []
            return
        rel = [row for row in relations if any(row)] or [[0] * r]
        diag, U, V = smith_form(rel)
        # coordinates of a word v are (v V)_i mod d_i
        keep = [i for i, d in enumerate(diag) if d > 1]
        diag_full = diag + [0] * (r - len(diag))
        if any(d == 0 for d in diag_full[:r]):
            raise AssertionError("relation lattice not of full rank")
        self._V = V
        self._keep = keep
        self.invariants = [diag[i] for i in keep]
        Vinv = inverse_unimodular(V)
        self.generators = []
        for i in keep:
            word = Vinv[i]
            self.generators.append(self.ideal_from_word(word))
        assert reduce(lambda a, b: a * b, self.invariants, 1) == self.order

    def _find(self, reps, J):
        for j, R in enumerate(reps):
            if same_class(J, R):
                return j
        return None

    def ideal_from_word(self, word):
        I = self.K.unit_ideal
        for e, P in zip(word, self.factor_base):
            if e > 0:
                I = I * P ** e
            elif e < 0:
                I = I * P.conj() ** (-e)
        return self.reduce(I)

    def reduce(self, I):
        """An integral ideal of small norm in the class of I, chosen among the representatives."""
        j = self._find(self._reps, I)
        return self._reps[j] if j is not None else I

    def word_coords(self, word):
        vV = [sum(word[k] * self._V[k][i] for k in range(len(word))) for i in range(len(word))]
        return tuple(vV[i] % d for i, d in zip(self._keep, self.invariants))

    def log(self, I):
        """Coordinates of the class of I with respect to the cyclic decomposition."""
        if not self.invariants:
            return ()
        j = self._find(self._reps, I)
        if j is None:
            raise AssertionError("class not found among representatives")
        return self.word_coords(self._words[j])

    def elements(self):
        """All coordinate vectors, in lexicographic order."""
        return [tuple(c) for c in itertools.product(*[range(d) for d in self.invariants])]

    def add(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def neg(self, a):
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def zero(self):
        return tuple(0 for _ in self.invariants)

    def representative(self, c):
        for R, w in zip(self._reps, self._words):
            if self.word_coords(w) == tuple(c):
                return R
        raise KeyError(c)

    def element_order(self, c):
        k, acc = 1, tuple(c)
        while acc != self.zero():
            acc = self.add(acc, c)
            k += 1
        return k

    def subgroup(self, gens):
        """Elements of the subgroup generated by the given coordinate vectors, in BFS order."""
        seen = [self.zero()]
        frontier = [self.zero()]
        while frontier:
            nxt = []
            for e in frontier:
                for g in gens:
                    s = self.add(e, g)
                    if s not in seen:
                        seen.append(s)
                        nxt.append(s)
            frontier = nxt
        return seen


class ShimuraGroup:
    """The group of pairs (b, nu) with N(b)^-1 = nu O_K0, nu >> 0, modulo principal pairs.

    Built only when the fundamental unit of K0 has norm -1 and K0 has narrow
    class number one; then forgetting nu identifies it with Cl(O_K).
    """

    def __init__(self, K, orbit_generators=None):
        K0 = K.K0
        if K0.fundamental_unit[1] != -1:
            raise CMFieldError("fundamental unit of K0 has norm +1; Shimura group not identified with Cl(O_K)")
        if not K0.narrow_class_number_one:
            raise CMFieldError("K0 does not have narrow class number one")
        self.K = K
        self.cl = K.class_group
        self.order = self.cl.order
        if orbit_generators:
            gens = [self.cl.log(I) for I in orbit_generators]
        else:
            gens = self._standard_generators()
        self.orbit = self.cl.subgroup(gens)

    def _standard_generators(self):
        out = []
        for i, d in enumerate(self.cl.invariants):
            out.append(tuple(int(j == i) for j in range(len(self.cl.invariants))))
        return out

    @property
    def orbit_order(self):
        return len(self.orbit)

    def nu(self, c):
        """Totally positive generator of N(b)^-1 for the class representative b of c."""
        b = self.cl.representative(c)
        g = self.K.K0.totally_positive_generator(b.relative_norm())
        return g.inverse()

    def label(self, I):
        return self.cl.log(I)


class ReflexData:
    def __init__(self, K, cmtype):
        self.K = K
        self.cmtype = cmtype
        a, b = K.a, K.b
        self.poly = [a * a - 4 * b, 0, 2 * a, 0, 1]     # constant term first
        fr, dr = 1, b
        k = 2
        while k * k <= dr:
            while dr % (k * k) == 0:
                dr //= k * k
                fr *= k
            k += 1
        self.fr, self.dr = fr, dr
        self.K0r = RealQuadField(dr)

    def t(self, prec):
        xs = self.K.x_embeddings(self.cmtype, prec)
        with mp.workprec(prec):
            return xs[0] + xs[1]

    def omega_r(self, prec):
        return self.K0r.embeddings(prec)[0]

    def sqrt_b_in_t(self):
        """Rational coordinates of sqrt(b) over (1, t, t^2, t^3): -s1 s2 (t^2 + a)/2."""
        s = -self.cmtype.signs[0] * self.cmtype.signs[1]
        return [Fraction(s * self.K.a, 2), Fraction(0), Fraction(s, 2), Fraction(0)]

    def omega_r_in_t(self):
        sb = self.sqrt_b_in_t()
        sd = [c / self.fr for c in sb]
        if self.dr % 4 == 1:
            return [Fraction(1, 2) + sd[0] / 2, sd[1] / 2, sd[2] / 2, sd[3] / 2]
        return sd

    @cached_property
    def ring_index(self):
        """Index of Z[t] in the ring of integers of the reflex field."""
        a2, b2 = 2 * self.K.a, self.K.a ** 2 - 4 * self.K.b
        # discriminant of X^4 + a2 X^2 + b2
        dpoly = 16 * b2 * (a2 * a2 - 4 * b2) ** 2
        return isqrt(dpoly // abs(maximal_order_disc(a2, b2)))
