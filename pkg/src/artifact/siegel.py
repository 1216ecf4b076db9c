"""Genus-2 period matrices, theta constants, Igusa and Ibukiyama modular forms,
invariant functions and the Fricke involution.
"""

from __future__ import annotations

import ast
import itertools
import math
import re
from functools import reduce

import mpmath
from mpmath import mp, mpc, mpf

from .mpnum import GUARD_BITS
from .realquad import RealQuadField


class SiegelError(ArithmeticError):
    pass


class PoleError(SiegelError):
    pass


EVEN = (0, 1, 2, 3, 4, 6, 8, 9, 12, 15)
ODD = (5, 7, 10, 11, 13, 14)


def char_bits(j):
    return (j >> 3) & 1, (j >> 2) & 1, (j >> 1) & 1, j & 1


def is_even(j):
    a1, a2, b1, b2 = char_bits(j)
    return (a1 * b1 + a2 * b2) % 2 == 0


def _char_sum(i, j):
    return tuple((u + v) % 2 for u, v in zip(char_bits(i), char_bits(j)))


def _gopel_quadruples():
    out = []
    for q in itertools.combinations(EVEN, 4):
        tot = reduce(lambda acc, j: tuple((u + v) % 2 for u, v in zip(acc, char_bits(j))), q, (0, 0, 0, 0))
        if tot == (0, 0, 0, 0):
            out.append(q)
    return out


GOPEL = tuple(_gopel_quadruples())

# signs of the fourth powers of theta products over the syzygous triples in
# the weight 6 form (fixed by automorphy under the generators of Sp4(Z))
_H6_PLUS = """0,1,2 0,1,3 0,2,3 0,4,8 0,4,12 0,6,9 0,6,15 0,8,12 0,9,15 1,2,3 1,2,12
1,2,15 1,3,4 1,3,6 1,4,12 1,6,15 2,3,8 2,3,9 2,8,12 2,9,15 3,4,8 4,8,12 4,8,15
4,9,12 4,9,15 6,8,12 6,8,15 6,9,12 6,9,15 3,6,9"""
_H6_MINUS = """0,1,8 0,1,9 0,2,4 0,2,6 0,3,12 0,3,15 0,4,6 0,8,9 0,12,15 1,4,6 1,4,9 1,6,8
1,8,9 1,8,15 1,9,12 1,12,15 2,4,6 2,4,9 2,4,15 2,6,8 2,6,12 2,8,9 2,12,15 3,4,6
3,4,15 3,6,12 3,8,9 3,8,15 3,9,12 3,12,15"""


def _parse_triples(txt):
    return [tuple(int(v) for v in tok.split(",")) for tok in txt.split()]


H6_SIGNS = {t: 1 for t in _parse_triples(_H6_PLUS)}
H6_SIGNS.update({t: -1 for t in _parse_triples(_H6_MINUS)})
assert len(H6_SIGNS) == 60

# global constants of the theta expressions of h4, h6, h10, h12; all equal to
# one for the expressions above, as checked against the printed class polynomials
FORM_CONSTANTS = {4: 1, 6: 1, 10: 1, 12: 1}


# ---------------------------------------------------------------------------
# period matrices

class PeriodMatrix:
    """Symmetric 2x2 complex matrix with positive definite imaginary part, stored as (t11, t12, t22)."""

    __slots__ = ("t11", "t12", "t22", "prec", "label")

    def __init__(self, t11, t12, t22, prec, label=None, check=True):
        with mp.workprec(prec):
            self.t11, self.t12, self.t22 = mpc(t11), mpc(t12), mpc(t22)
        self.prec = prec
        self.label = label
        if check:
            y11, y12, y22 = self.t11.imag, self.t12.imag, self.t22.imag
            if not (y11 > 0 and y11 * y22 - y12 * y12 > 0):
                raise SiegelError("imaginary part is not positive definite")

    @classmethod
    def from_matrix(cls, M, prec, label=None, check=True):
        return cls(M[0, 0], (M[0, 1] + M[1, 0]) / 2, M[1, 1], prec, label, check)

    def matrix(self):
        return mpmath.matrix([[self.t11, self.t12], [self.t12, self.t22]])

    def scale(self, c):
        with mp.workprec(self.prec):
            return PeriodMatrix(self.t11 * c, self.t12 * c, self.t22 * c, self.prec, self.label)

    def __truediv__(self, n):
        with mp.workprec(self.prec):
            return self.scale(mpf(1) / n)

    def neg_conj(self):
        with mp.workprec(self.prec):
            return PeriodMatrix(-mpmath.conj(self.t11), -mpmath.conj(self.t12), -mpmath.conj(self.t22), self.prec)

    def entries(self):
        return self.t11, self.t12, self.t22

    def lambda_min(self):
        y11, y12, y22 = self.t11.imag, self.t12.imag, self.t22.imag
        tr, det = y11 + y22, y11 * y22 - y12 * y12
        return (tr - mpmath.sqrt(tr * tr - 4 * det)) / 2

    def __repr__(self):
        return "PeriodMatrix(%s, %s, %s)" % tuple(mpmath.nstr(v, 15) for v in self.entries())


def s_matrix(F: RealQuadField):
    if F.disc % 2 == 0:
        return ((0, -1), (-1, 0))
    return ((0, -1), (-1, 1))


def period_matrix(t, prec) -> PeriodMatrix:
    """tau = (1/(-lam_1)) [[z1 w1^2 - z2 w2^2, z1 w1 - z2 w2], [., z1 - z2]]."""
    K = t.K
    F = K.K0
    wp = prec + 16
    z1, z2 = t.z.embed(t.cmtype, wp)
    with mp.workprec(wp):
        w1, w2 = F.w.embed(wp)
        lam1 = F.lam.embed(wp)[0]
        c = -1 / lam1
        tau = PeriodMatrix(c * (z1 * w1 * w1 - z2 * w2 * w2), c * (z1 * w1 - z2 * w2), c * (z1 - z2), prec,
                           label=str(t))
    return tau


# ---------------------------------------------------------------------------
# theta constants

def theta_all(tau: PeriodMatrix, prec=None, floor=None):
    """All sixteen theta constants theta_j(tau), j = 8 a1 + 4 a2 + 2 b1 + b2.

    The sum over m = 2n + a in Z^2 runs over the ellipse m^T Y m <= R where
    the terms exp(-pi m^T Y m / 4) drop below 2^-(prec + guard).
    """
    prec = prec or tau.prec
    t11, t12, t22 = tau.entries()
    with mp.workprec(prec + 64):
        lmin = tau.lambda_min()
        if floor is not None and lmin < floor:
            raise SiegelError("precision blowup: smallest eigenvalue %s of Im tau below floor; reduce tau first"
                              % mpmath.nstr(lmin, 5))
        y11, y12, y22 = t11.imag, t12.imag, t22.imag
        det = y11 * y22 - y12 * y12
        npts = float(mpmath.pi * 4 * prec * math.log(2) / mpmath.pi / mpmath.sqrt(det)) + 1
        big = max(abs(t11.real), abs(t12.real), abs(t22.real), 1)
        guard = GUARD_BITS + int(math.log2(npts + 1)) + 1
    wp = prec + guard + 2 * int(mpmath.log(big, 2)) + 16
    with mp.workprec(wp):
        R = 4 * (prec + guard) * mpmath.log(2) / mpmath.pi
        m1max = int(mpmath.floor(mpmath.sqrt(R * y22 / det))) + 1
        c = mpc(0, 1) * mpmath.pi / 4
        S = [[mpc(0)] * 4 for _ in range(4)]
        s = mpmath.exp(2 * c * t22)
        for m1 in range(-m1max, m1max + 1):
            disc = y12 * y12 * m1 * m1 - y22 * (y11 * m1 * m1 - R)
            if disc < 0:
                continue
            sd = mpmath.sqrt(disc)
            lo = int(mpmath.floor((-y12 * m1 - sd) / y22))
            hi = int(mpmath.ceil((-y12 * m1 + sd) / y22))
            w = mpmath.exp(c * (t11 * m1 * m1 + 2 * t12 * m1 * lo + t22 * lo * lo))
            ratio = mpmath.exp(c * (t22 * (2 * lo + 1) + 2 * t12 * m1))
            row = S[m1 % 4]
            for m2 in range(lo, hi + 1):
                row[m2 % 4] += w
                w *= ratio
                ratio *= s
        out = []
        ipow = [mpc(1), mpc(0, 1), mpc(-1), mpc(0, -1)]
        for j in range(16):
            a1, a2, b1, b2 = char_bits(j)
            tot = mpc(0)
            for r1 in range(a1, 4, 2):
                for r2 in range(a2, 4, 2):
                    tot += S[r1][r2] * ipow[(r1 * b1 + r2 * b2) % 4]
            out.append(tot)
    with mp.workprec(prec):
        return [+v for v in out]


def theta(j, tau: PeriodMatrix, prec=None):
    return theta_all(tau, prec)[j]


# ---------------------------------------------------------------------------
# Sp4(Z) helpers: M = (a b; c d) with 2x2 integer blocks

def sp4_blocks(M):
    a = [[M[0][0], M[0][1]], [M[1][0], M[1][1]]]
    b = [[M[0][2], M[0][3]], [M[1][2], M[1][3]]]
    c = [[M[2][0], M[2][1]], [M[3][0], M[3][1]]]
    d = [[M[2][2], M[2][3]], [M[3][2], M[3][3]]]
    return a, b, c, d


def sp4_mul(M, N):
    return [[sum(M[i][k] * N[k][j] for k in range(4)) for j in range(4)] for i in range(4)]


def is_symplectic(M):
    J = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    Mt = [list(r) for r in zip(*M)]
    return sp4_mul(sp4_mul(Mt, J), M) == J


SP4_J = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]


def sp4_translation(B):
    return [[1, 0, B[0][0], B[0][1]], [0, 1, B[1][0], B[1][1]], [0, 0, 1, 0], [0, 0, 0, 1]]


def sp4_rotation(U):
    """diag(U, U^-T) for U in GL2(Z)."""
    det = U[0][0] * U[1][1] - U[0][1] * U[1][0]
    Ui = [[U[1][1] * det, -U[0][1] * det], [-U[1][0] * det, U[0][0] * det]]
    UiT = [[Ui[0][0], Ui[1][0]], [Ui[0][1], Ui[1][1]]]
    return [[U[0][0], U[0][1], 0, 0], [U[1][0], U[1][1], 0, 0],
            [0, 0, UiT[0][0], UiT[0][1]], [0, 0, UiT[1][0], UiT[1][1]]]


def sp4_act(M, tau: PeriodMatrix):
    """(M tau, det(c tau + d))."""
    a, b, c, d = sp4_blocks(M)
    with mp.workprec(tau.prec + 32):
        T = tau.matrix()
        A, B, C, D = (mpmath.matrix(x) for x in (a, b, c, d))
        num = A * T + B
        den = C * T + D
        out = num * mpmath.inverse(den)
        return PeriodMatrix.from_matrix(out, tau.prec, check=False), mpmath.det(den)


def random_sp4(rng, steps=4, height=2):
    """Product of random generators J, translations and rotations."""
    M = [[int(i == j) for j in range(4)] for i in range(4)]
    for _ in range(steps):
        kind = rng.randrange(3)
        if kind == 0:
            G = SP4_J
        elif kind == 1:
            x, y, z = (rng.randint(-height, height) for _ in range(3))
            G = sp4_translation([[x, y], [y, z]])
        else:
            k = rng.randint(-height, height)
            G = sp4_rotation(rng.choice([[[1, k], [0, 1]], [[1, 0], [k, 1]], [[0, 1], [1, 0]], [[-1, 0], [0, 1]]]))
        M = sp4_mul(G, M)
    return M


def reduce_tau(tau: PeriodMatrix, max_iter=200):
    """Move tau towards the Siegel fundamental domain.

    Returns (tau', J) with h(tau) = h(tau') J^-k for every modular form h of
    even weight k for Sp4(Z).  Steps: reduce Im tau with GL2(Z), translate
    Re tau to [-1/2, 1/2], and invert the first coordinate while |tau_11| < 1.
    """
    J = mpc(1)
    prec = tau.prec
    with mp.workprec(prec + 32):
        t11, t12, t22 = tau.entries()
        for _ in range(max_iter):
            # Lagrange-Gauss reduction of the quadratic form Im tau
            while True:
                y11, y12, y22 = t11.imag, t12.imag, t22.imag
                if y22 < y11:
                    t11, t22 = t22, t11
                    continue
                k = int(mpmath.nint(y12 / y11))
                if k:
                    # U = (1 0; -k 1): tau -> U tau U^T
                    t12, t22 = t12 - k * t11, t22 - 2 * k * t12 + k * k * t11
                    continue
                if t12.imag < 0:
                    t12 = -t12
                break
            t11 -= mpmath.nint(t11.real)
            t12 -= mpmath.nint(t12.real)
            t22 -= mpmath.nint(t22.real)
            if abs(t11) >= 1:
                break
            # a = diag(0,1), b = diag(-1,0), c = diag(1,0), d = diag(0,1)
            J *= t11
            t12, t22, t11 = t12 / t11, t22 - t12 * t12 / t11, -1 / t11
        else:
            raise SiegelError("reduction did not terminate")
        out = PeriodMatrix(t11, t12, t22, prec, tau.label)
    return out, J


# ---------------------------------------------------------------------------
# modular forms

def _prod(vals):
    return reduce(lambda a, b: a * b, vals, 1)


def igusa_from_thetas(th):
    t4 = {j: th[j] ** 4 for j in EVEN}
    h4 = sum(t4[j] * t4[j] for j in EVEN)
    h6 = sum(s * (t4[a] * t4[b] * t4[c]) for (a, b, c), s in H6_SIGNS.items())
    h10 = _prod(th[j] ** 2 for j in EVEN)
    h12 = sum(_prod(t4[j] for j in EVEN if j not in q) for q in GOPEL)
    return {4: FORM_CONSTANTS[4] * h4, 6: FORM_CONSTANTS[6] * h6,
            10: FORM_CONSTANTS[10] * h10, 12: FORM_CONSTANTS[12] * h12}


def igusa_forms(tau: PeriodMatrix, prec=None, reduce=True):
    """(h4, h6, h10, h12) at tau, evaluated at a reduced point when reduce=True."""
    prec = prec or tau.prec
    if reduce:
        tr, J = reduce_tau(tau)
    else:
        tr, J = tau, mpc(1)
    wp = prec + 8 * max(0, int(abs(mpmath.log(abs(J), 2))) if J else 0) + 16
    th = theta_all(PeriodMatrix(*tr.entries(), prec=wp, check=False), wp)
    with mp.workprec(wp):
        h = igusa_from_thetas(th)
        out = {k: v / J ** k for k, v in h.items()}
    with mp.workprec(prec):
        return tuple(+out[k] for k in (4, 6, 10, 12))


def ibukiyama_from_thetas(th):
    x = (th[0] ** 4 + th[1] ** 4 + th[2] ** 4 + th[3] ** 4) / 4
    y = (th[0] * th[1] * th[2] * th[3]) ** 2
    z = (th[4] ** 4 - th[6] ** 4) ** 2 / 2 ** 14
    k = (th[4] * th[6] * th[8] * th[9] * th[12] * th[15]) ** 2 / 2 ** 12
    return x, y, z, k


def ibukiyama_forms(tau: PeriodMatrix, prec=None):
    """((x, y, z, k) at tau, (X, Y, Z, K) = (x, y, z, k) at tau/2)."""
    prec = prec or tau.prec
    wp = prec + 16
    t = PeriodMatrix(*tau.entries(), prec=wp, check=False)
    with mp.workprec(wp):
        low = ibukiyama_from_thetas(theta_all(t, wp))
        half = PeriodMatrix(*(v / 2 for v in t.entries()), prec=wp, check=False)
        up = ibukiyama_from_thetas(theta_all(half, wp))
    with mp.workprec(prec):
        return tuple(+v for v in low), tuple(+v for v in up)


# ---------------------------------------------------------------------------
# invariants

class InvariantSpec:
    """Text forms: igusa_j1, simple_hk_quotient(k=4,N=3), double_hk_quotient(k=10,N1=2,N2=3),
    level2(X^2/Y), sqrt(<spec>, signs=[+,+,-])."""

    KINDS = ("igusa_j1", "igusa_j2", "igusa_j3", "simple_hk_quotient", "double_hk_quotient", "level2", "sqrt")

    def __init__(self, kind, k=None, N=None, N1=None, N2=None, expr=None, inner=None, signs=None):
        if kind not in self.KINDS:
            raise ValueError("unknown invariant kind %r" % kind)
        self.kind, self.k, self.N, self.N1, self.N2 = kind, k, N, N1, N2
        self.expr, self.inner, self.signs = expr, inner, signs
        if kind in ("simple_hk_quotient", "double_hk_quotient") and k not in (4, 6, 10, 12):
            raise ValueError("weight must be one of 4, 6, 10, 12")
        if kind == "level2":
            _compile_level2(expr)

    @property
    def level(self):
        if self.kind.startswith("igusa"):
            return 1
        if self.kind == "simple_hk_quotient":
            return self.N
        if self.kind == "double_hk_quotient":
            return self.N1 * self.N2
        if self.kind == "level2":
            return 2
        return self.inner.level

    @property
    def fricke_invariant(self):
        if self.kind.startswith("igusa"):
            return True
        if self.kind == "double_hk_quotient":
            return True
        if self.kind == "sqrt":
            return False
        return False

    @classmethod
    def parse(cls, text):
        s = text.strip()
        if s in ("igusa_j1", "igusa_j2", "igusa_j3", "j1", "j2", "j3"):
            return cls("igusa_" + s[-2:])
        m = re.fullmatch(r"sqrt\((.*),\s*signs\s*=\s*\[([+\-,\s]*)\]\)", s)
        if m:
            signs = [1 if c == "+" else -1 for c in re.findall(r"[+\-]", m.group(2))]
            return cls("sqrt", inner=cls.parse(m.group(1)), signs=signs)
        m = re.fullmatch(r"sqrt\((.*)\)", s)
        if m:
            return cls("sqrt", inner=cls.parse(m.group(1)), signs=None)
        m = re.fullmatch(r"level2\((.*)\)", s)
        if m:
            return cls("level2", expr=m.group(1).strip())
        m = re.fullmatch(r"(simple_hk_quotient|double_hk_quotient)\((.*)\)", s)
        if m:
            kw = {}
            for part in m.group(2).split(","):
                key, _, val = part.partition("=")
                kw[key.strip()] = int(val)
            return cls(m.group(1), **kw)
        raise ValueError("cannot parse invariant %r" % text)

    def __str__(self):
        if self.kind.startswith("igusa"):
            return self.kind
        if self.kind == "simple_hk_quotient":
            return "simple_hk_quotient(k=%d,N=%d)" % (self.k, self.N)
        if self.kind == "double_hk_quotient":
            return "double_hk_quotient(k=%d,N1=%d,N2=%d)" % (self.k, self.N1, self.N2)
        if self.kind == "level2":
            return "level2(%s)" % self.expr
        if self.signs is None:
            return "sqrt(%s)" % self.inner
        return "sqrt(%s, signs=[%s])" % (self.inner, ",".join("+" if s > 0 else "-" for s in self.signs))

    def __eq__(self, other):
        return isinstance(other, InvariantSpec) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))


_LEVEL2_NAMES = ("x", "y", "z", "k", "X", "Y", "Z", "K")


def _compile_level2(expr):
    tree = ast.parse(expr.replace("^", "**"), mode="eval")
    allowed = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Name, ast.Load, ast.Constant,
               ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)
    for node in ast.walk(tree):
        if not isinstance(node, allowed):
            raise ValueError("unsupported syntax in level-2 expression %r" % expr)
        if isinstance(node, ast.Name) and node.id not in _LEVEL2_NAMES:
            raise ValueError("unknown form %r in level-2 expression" % node.id)
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise ValueError("only integer constants are allowed")
    return compile(tree, "<level2>", "eval")


def _hk(tau, k, prec):
    h = igusa_forms(tau, prec)
    return h[(4, 6, 10, 12).index(k)]


def _div(a, b, what):
    if b == 0 or abs(b) < mpf(2) ** (-mp.prec + 16) * max(1, abs(a)):
        raise PoleError("denominator %s vanishes at tau" % what)
    return a / b


def invariant_eval(spec: InvariantSpec, tau: PeriodMatrix, prec=None, index=None):
    """Value of the invariant at tau; ``index`` selects the sign override of sqrt specs."""
    prec = prec or tau.prec
    wp = prec + 32
    t = PeriodMatrix(*tau.entries(), prec=wp, check=False)
    with mp.workprec(wp):
        if spec.kind.startswith("igusa"):
            h4, h6, h10, h12 = igusa_forms(t, wp)
            if spec.kind == "igusa_j1":
                val = _div(h4 * h6, h10, "h10")
            elif spec.kind == "igusa_j2":
                val = _div(h4 * h4 * h12, h10 * h10, "h10^2")
            else:
                val = _div(h4 ** 5, h10 * h10, "h10^2")
        elif spec.kind == "simple_hk_quotient":
            val = _div(_hk(t / spec.N, spec.k, wp), _hk(t, spec.k, wp), "h_k(tau)")
        elif spec.kind == "double_hk_quotient":
            n1, n2 = spec.N1, spec.N2
            num = _hk(t / n1, spec.k, wp) * _hk(t / n2, spec.k, wp)
            den = _hk(t, spec.k, wp) * _hk(t / (n1 * n2), spec.k, wp)
            val = _div(num, den, "h_k(tau) h_k(tau/N1N2)")
        elif spec.kind == "level2":
            (x, y, z, k), (X, Y, Z, K) = ibukiyama_forms(t, wp)
            env = dict(zip(_LEVEL2_NAMES, (x, y, z, k, X, Y, Z, K)))
            try:
                val = eval(_compile_level2(spec.expr), {"__builtins__": {}}, env)
            except ZeroDivisionError as exc:
                raise PoleError("level-2 expression has a pole at tau") from exc
        else:
            inner = invariant_eval(spec.inner, t, wp)
            val = principal_sqrt(inner)
            if spec.signs is not None and index is not None:
                val = spec.signs[index] * val
    with mp.workprec(prec):
        return +val


def principal_sqrt(v):
    r = mpmath.sqrt(v)
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


# ---------------------------------------------------------------------------

def fricke(tau: PeriodMatrix, N: int, F: RealQuadField) -> PeriodMatrix:
    """iota'(tau) = -N (S tau S)^-1."""
    S = mpmath.matrix(s_matrix(F))
    with mp.workprec(tau.prec + 32):
        T = tau.matrix()
        STS = S * T * S
        if abs(mpmath.det(STS)) == 0:
            raise SiegelError("singular period matrix")
        out = -N * mpmath.inverse(STS)
        return PeriodMatrix.from_matrix(out, tau.prec, tau.label)
