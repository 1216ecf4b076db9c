"""Multiprecision helpers, exact integer lattice reduction and relation finding.

Floating values are mpmath ``mpf``/``mpc`` numbers.  Every routine that
depends on precision takes it as an explicit ``prec`` argument (bits) and
runs inside ``mp.workprec``; nothing relies on the global default.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

import mpmath
from mpmath import mp

GUARD_BITS = 32


class RankDeficientError(ValueError):
    pass


class InconclusiveError(ArithmeticError):
    """Raised when precision is too low to decide whether a relation exists."""


# ---------------------------------------------------------------------------
# integer matrices

def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def mat_mul(A, B):
    Bt = list(zip(*B))
    return [[dot(row, col) for col in Bt] for row in A]


def det_int(M):
    """Exact determinant of a square integer (or Fraction) matrix (Bareiss)."""
    n = len(M)
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                A[i][j] = num // prev if isinstance(num, int) else num / prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def hnf(rows, ncols=None, transform=False):
    """Row-style Hermite normal form of the lattice spanned by integer ``rows``.

    Returns the nonzero rows, upper triangular with positive pivots and the
    entries above each pivot reduced into ``[0, pivot)``.  With
    ``transform=True`` also returns ``U`` such that ``U * rows`` equals the
    full reduced matrix (zero rows last), which is what CRT and Bezout use.
    """
    A = [list(r) for r in rows]
    m = len(A)
    if ncols is None:
        ncols = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    pivots = []
    for c in range(ncols):
        if r >= m:
            break
        # euclid on column c among rows r..m-1
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[i0] = A[i0], A[r]
            U[r], U[i0] = U[i0], U[r]
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < m and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-x for x in A[r]]
                U[r] = [-x for x in U[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[r])]
            pivots.append(c)
            r += 1
    H = A[:r]
    if transform:
        return H, U
    return H


def hnf_reduce(H, v):
    """Canonical representative of ``v`` modulo the full-rank HNF lattice ``H``."""
    v = list(v)
    for row in H:
        c = next(j for j, x in enumerate(row) if x)
        q = v[c] // row[c]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return v


def in_lattice(H, v):
    return not any(hnf_reduce(H, v))


def smith_form(M):
    """Smith normal form D = U*M*V of an integer matrix; returns (D_diag, U, V)."""
    A = [list(r) for r in M]
    m = len(A)
    n = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst -= q * row src
        A[dst] = [x - q * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x - q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(i, t, q)
                    if A[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(j, t, q)
                    if A[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            # divisibility condition
            bad = [(i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                   if A[i][j] % A[t][t]]
            if bad:
                i, _ = bad[0]
                A[t] = [x + y for x, y in zip(A[t], A[i])]
                U[t] = [x + y for x, y in zip(U[t], U[i])]
                continue
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = [A[i][i] for i in range(min(m, n))]
    return diag, U, V


def inverse_unimodular(V):
    """Exact inverse of a unimodular integer matrix."""
    n = len(V)
    aug = [list(V[i]) + [int(i == j) for j in range(n)] for i in range(n)]
    A = [[Fraction(x) for x in row] for row in aug]
    for c in range(n):
        p = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[p] = A[p], A[c]
        pv = A[c][c]
        A[c] = [x / pv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    out = [[A[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


# ---------------------------------------------------------------------------
# LLL (integral version, exact arithmetic throughout)

def lll_reduce(basis, delta=Fraction(99, 100), inner=None, return_transform=False):
    """LLL-reduce the rows of an integer basis.

    ``inner`` may be given as an integer-valued symmetric bilinear form on
    the rows (e.g. a Gram matrix form); the default is the dot product.
    Works with the integral Gram-Schmidt data d_i, lambda_ij so that no
    rational numbers ever appear.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise ValueError("delta must lie in (1/4, 1]")
    p, q = delta.numerator, delta.denominator
    ip = inner or dot
    b = [list(r) for r in basis]
    n = len(b)
    if n == 0:
        return ([], []) if return_transform else []
    H = [[int(i == j) for j in range(n)] for i in range(n)]
    d = [1] + [0] * n          # d[0] = 1, d[i] for i = 1..n
    lam = [[0] * n for _ in range(n)]

    def bdot(i, j):
        return ip(b[i], b[j])

    def redi(k, l):
        # indices 0-based; d index is l+1
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            H[k] = [x - r * y for x, y in zip(H[k], H[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swapi(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        H[k], H[k - 1] = H[k - 1], H[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k + 1]
        d[k] = B

    d[1] = bdot(0, 0)
    if d[1] == 0:
        raise RankDeficientError("rank-deficient basis (zero vector)")
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = bdot(k, j)
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise RankDeficientError("rank-deficient basis")
        redi(k, k - 1)
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lam[k][k - 1] ** 2:
            swapi(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    if return_transform:
        return b, H
    return b


def lovasz_holds(basis, delta=Fraction(99, 100), inner=None):
    """Check size reduction and the Lovasz condition with exact rationals."""
    ip = inner or dot
    n = len(basis)
    bstar = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    Bn = []
    # Gram-Schmidt through the Gram matrix only
    G = [[Fraction(ip(basis[i], basis[j])) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            s = G[i][j] - sum(mu[j][k] * mu[i][k] * Bn[k] for k in range(j))
            mu[i][j] = s / Bn[j]
        Bn.append(G[i][i] - sum(mu[i][k] ** 2 * Bn[k] for k in range(i)))
    del bstar
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if Bn[k] < (Fraction(delta) - mu[k][k - 1] ** 2) * Bn[k - 1]:
            return False
    return True


# ---------------------------------------------------------------------------
# relations

def _to_mp(v):
    if isinstance(v, (mpmath.mpc, complex)):
        return mpmath.mpc(v)
    return mpmath.mpf(v)


def integer_relation(values, max_bits=None, prec=None, guard=GUARD_BITS, delta=Fraction(99, 100)):
    """Find a small integer vector m with sum m_i * values_i ~ 0.

    Returns the relation (a list of ints, sign normalised so the last nonzero
    entry is positive), or None when no relation with coefficients below
    2^max_bits exists according to the LLL bound.  Raises InconclusiveError
    when the reduced lattice is too short to rule a relation out yet the
    candidate fails verification.
    """
    prec = prec or mp.prec
    n = len(values)
    if n < 2:
        raise ValueError("need at least two values")
    with mp.workprec(prec):
        vals = [_to_mp(v) for v in values]
        is_complex = any(isinstance(v, mpmath.mpc) and v.imag != 0 for v in vals)
        k = 2 if is_complex else 1
        s = prec - guard
        if max_bits is None:
            max_bits = max(4, int(0.75 * k * s / n))
        scale = mpmath.ldexp(1, s)
        cols = []
        for v in vals:
            if is_complex:
                v = mpmath.mpc(v)
                cols.append((int(mpmath.nint(v.real * scale)), int(mpmath.nint(v.imag * scale))))
            else:
                cols.append((int(mpmath.nint(mpmath.re(v) * scale)),))
        rows = []
        for i in range(n):
            rows.append([int(i == j) for j in range(n)] + list(cols[i]))
        red = lll_reduce(rows, delta)
        vmax = max(abs(v) for v in vals)
        tol = mpmath.ldexp(vmax, -(prec // 2))
        for row in red[:max(1, n // 2)]:
            m = row[:n]
            if not any(m):
                continue
            if max(abs(x) for x in m).bit_length() > max_bits:
                continue
            resid = abs(mpmath.fsum(mi * vi for mi, vi in zip(m, vals)))
            if resid < tol:
                last = next(x for x in reversed(m) if x)
                return m if last > 0 else [-x for x in m]
        # decide between "none" and "inconclusive"
        alpha = (Fraction(4) / (4 * Fraction(delta) - 1)) ** (n - 1)   # squared factor
        b1sq = dot(red[0], red[0])
        # a relation of height < 2^max_bits gives a vector of squared norm below this
        bound_sq = n * 4 ** max_bits * (1 + k * n * n)
        if b1sq > alpha * bound_sq:
            return None
        raise InconclusiveError("relation search inconclusive at %d bits" % prec)


def poly_content_normalize(coeffs):
    """Divide out the content and make the leading coefficient positive.

    ``coeffs`` lists coefficients from the constant term upwards.
    """
    from math import gcd
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    g = 0
    for c in coeffs:
        g = gcd(g, c)
    if g == 0:
        return coeffs
    out = [c // g for c in coeffs]
    if out[-1] < 0:
        out = [-c for c in out]
    return out


def algdep(x, degree, max_bits=None, prec=None):
    """Integer polynomial of minimal degree <= ``degree`` vanishing at ``x``.

    Coefficients are returned constant term first, content removed and
    leading coefficient positive.  Tries degrees 1, 2, ... in turn so that
    the answer is the minimal polynomial rather than a multiple of it.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    prec = prec or mp.prec
    inconclusive = False
    with mp.workprec(prec):
        x = _to_mp(x)
        for d in range(1, degree + 1):
            powers = [x ** i for i in range(d + 1)]
            try:
                rel = integer_relation(powers, max_bits=max_bits, prec=prec)
            except InconclusiveError:
                inconclusive = True
                continue
            if rel is not None and rel[-1] != 0:
                return poly_content_normalize(rel)
    if inconclusive:
        raise InconclusiveError("algdep inconclusive at %d bits" % prec)
    return None


def isqrt_exact(n):
    r = isqrt(n)
    return r if r * r == n else None


def bits_of(x):
    """Rough log2 magnitude of an mpmath number (for reporting)."""
    if x == 0:
        return float("-inf")
    return float(mpmath.log(abs(x), 2))
