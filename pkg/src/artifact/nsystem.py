"""N-systems: equiprimitive triples, one per class of an orbit subgroup, with
gcd(A_i, N) = 1 and B_i = B_j mod 2N, plus the two real-structure pairings.
"""

from __future__ import annotations

import itertools

from .cmfield import CMField, CMIdeal, CMType, KElem
from .polforms import QuadraticTriple, TripleError, conj_triple, is_semiprimitive, parse_triple
from .realquad import RQIdeal, crt, format_rq


class NSystemError(ValueError):
    pass


class NotApplicable(NSystemError):
    pass


def triple_ideal(t: QuadraticTriple) -> CMIdeal:
    """A*b = A O_K0 + ((-B + delta)/2) O_K0 as an integral O_K-ideal."""
    K = t.K
    g = (t.delta - K.elem(t.B)) * KElem(K, K.K0(1, 0, 2), K.K0(0))
    return K.ideal(t.A, g)


class NSystem:
    def __init__(self, K: CMField, N: int, triples, F: int = 1, labels=None, orbit=None, generators=None):
        self.K = K
        self.generators = generators      # orbit generators as lists of element strings
        self.N = int(N)
        self.F = int(F)
        self.triples = list(triples)
        self.labels = labels
        self.orbit = orbit
        self.pairing = None

    @property
    def modulus(self) -> RQIdeal:
        return self.K.K0.ideal(self.N)

    @property
    def D(self):
        return self.triples[0].D

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def compute_labels(self, cl=None):
        cl = cl or self.K.class_group
        base = cl.log(triple_ideal(self.triples[0]))
        self.labels = [cl.add(cl.log(triple_ideal(t)), cl.neg(base)) for t in self.triples]
        return self.labels

    # -- text format -------------------------------------------------------
    def to_text(self):
        lines = ["field: %d %d" % (self.K.a, self.K.b),
                 "level: %d" % self.N,
                 "conductor: %d" % self.F,
                 "cm_type: %s" % " ".join("+" if s > 0 else "-" for s in self.triples[0].cmtype.signs)]
        lines += ["orbit: " + ", ".join(g) for g in (self.generators or [])]
        lines += [str(t) for t in self.triples]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, K: CMField | None = None):
        meta = {}
        rows = []
        gens = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                rows.append(line)
            else:
                key, _, val = line.partition(":")
                if key.strip() == "orbit":
                    gens.append([g.strip() for g in val.split(",")])
                else:
                    meta[key.strip()] = val.strip()
        try:
            a, b = (int(v) for v in meta["field"].split())
            N = int(meta["level"])
        except (KeyError, ValueError) as exc:
            raise NSystemError("N-system file needs 'field: a b' and 'level: N'") from exc
        F = int(meta.get("conductor", 1))
        if K is None or (K.a, K.b) != (a, b):
            K = CMField(a, b)
        cmtype = None
        if meta.get("cm_type", "auto") != "auto":
            s = meta["cm_type"].split()
            cmtype = CMType(*[1 if c == "+" else -1 for c in s])
        triples = [parse_triple(K, r, cmtype) for r in rows]
        if cmtype is None and triples:
            ct = triples[0].cmtype
            triples = [t.with_cmtype(ct) for t in triples]
        return cls(K, N, triples, F, generators=gens or None)

    def orbit_ideals(self):
        if not self.generators:
            return None
        return [self.K.ideal(*[self.K.parse(g) for g in gen]) for gen in self.generators]


# ---------------------------------------------------------------------------

def epsilon_scale(t1: QuadraticTriple, t2: QuadraticTriple, m: RQIdeal | None = None) -> QuadraticTriple:
    """eps * t2 with eps = delta_1/delta_2 in K0, so that both share delta."""
    if t1.cmtype != t2.cmtype:
        raise NSystemError("CM types differ")
    K = t1.K
    q = t1.delta / t2.delta
    if not q.in_k0():
        raise NSystemError("discriminants differ by a non-square")
    eps = q.as_k0()
    out = QuadraticTriple(K, eps * t2.A, eps * t2.B, eps * t2.C, t2.cmtype)
    if m is not None and not is_semiprimitive(out, m):
        raise NSystemError("scaled triple is not semiprimitive")
    return out


class Report:
    def __init__(self):
        self.checks = []

    def add(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def first_failure(self):
        for name, ok, detail in self.checks:
            if not ok:
                return name
        return None

    def __str__(self):
        out = []
        for name, ok, detail in self.checks:
            out.append("%s  %s%s" % ("PASS" if ok else "FAIL", name, ("  (" + detail + ")") if detail else ""))
        return "\n".join(out)


def verify_nsystem(S: NSystem, orbit_generators=None, check_labels=True) -> Report:
    K = S.K
    F0 = K.K0
    n = S.modulus
    rep = Report()
    ts = S.triples
    if orbit_generators is None:
        orbit_generators = S.orbit_ideals()
    rep.add("A_i totally positive", all(t.A.is_totally_positive() for t in ts))
    rep.add("same CM type", len({t.cmtype for t in ts}) == 1)
    D = ts[0].D
    rep.add("equal discriminants", all(t.D == D for t in ts), "D = %s" % format_rq(D))
    m2 = F0.ideal(2 * S.F * S.N)
    rep.add("semiprimitive mod 2FN", all(is_semiprimitive(t, m2) for t in ts))
    rep.add("gcd(A_i, N) = 1", all((F0.ideal(t.A) + n).is_unit() for t in ts))
    n2 = F0.ideal(2 * S.N)
    bad = [i + 1 for i, t in enumerate(ts) if not n2.contains(t.B - ts[0].B)]
    rep.add("B_i = B_j mod 2N", not bad, "differs for entries %s" % bad if bad else "")
    if n.contains(ts[0].C):
        bad = [i + 1 for i, t in enumerate(ts) if not n.contains(t.C)]
        rep.add("N | C_i", not bad, "fails for entries %s" % bad if bad else "")
    if check_labels:
        try:
            cl = K.class_group
            labels = S.compute_labels(cl)
            rep.add("labels distinct", len(set(labels)) == len(labels))
            if orbit_generators:
                H = K.shimura_group(orbit_generators).orbit
            else:
                H = cl.subgroup([lab for lab in labels])
                if len(H) != len(labels):
                    H = K.shimura_group().orbit
            rep.add("labels exhaust orbit subgroup", set(labels) == set(H),
                    "orbit order %d, system size %d" % (len(H), len(labels)))
        except (TripleError, NSystemError, ValueError) as exc:
            rep.add("labels", False, str(exc))
    return rep


# ---------------------------------------------------------------------------

def _degree_one_primes(K, bound, avoid: RQIdeal):
    """Primes of O_K of relative degree one, not dividing avoid, with norm <= bound."""
    from .realquad import primes_upto
    out = []
    for p in primes_upto(bound):
        for P in K.K0.primes_above(p):
            if not (P + avoid).is_unit():
                continue
            kind, _ = K.relative_splitting(P)
            if kind == "inert":
                continue
            for Q in K.primes_over(P):
                if Q.norm <= bound:
                    out.append((Q, P, kind))
    out.sort(key=lambda e: (e[0].norm, e[0].H))
    return out


def _primitive_ideals(K, bound, avoid):
    """Primitive integral ideals that are products of at most three degree-one primes."""
    primes = [Q for Q, _, _ in _degree_one_primes(K, bound, avoid)]
    seen = set()
    for k in range(0, 4):
        for combo in itertools.combinations_with_replacement(primes, k):
            norm = 1
            for Q in combo:
                norm *= Q.norm
            if norm > bound:
                continue
            I = K.unit_ideal
            for Q in combo:
                I = I * Q
            if I.is_primitive():
                seen.add(I)
    return sorted(seen, key=lambda I: (I.norm, I.H))


def build_nsystem(base: QuadraticTriple, N: int, orbit_generators=None, F: int = 1, max_norm=None) -> NSystem:
    """An N-system containing base, one triple per class of the orbit subgroup H.

    For each target class, the smallest primitive ideal I coprime to 2FN in
    the class is written as A O_K0 + (theta_1 - r) O_K0 with A the totally
    positive generator of its relative norm, theta_1 = (delta - B_1)/2 and
    r = 0 mod N, giving B = B_1 + 2r.
    """
    K = base.K
    F0 = K.K0
    n = F0.ideal(N)
    if not (F0.ideal(base.A) + n).is_unit():
        raise NSystemError("base triple has A not coprime to N")
    if not base.content().is_unit():
        raise NSystemError("base triple must be primitive")
    sg = K.shimura_group(orbit_generators)
    cl = sg.cl
    I1 = triple_ideal(base)
    c1 = cl.log(I1)
    targets = [c for c in sg.orbit]
    theta1 = (base.delta - K.elem(base.B)) * KElem(K, F0(1, 0, 2), F0(0))
    avoid = F0.ideal(2 * F * N)
    bound = max_norm or max(64, int(4 * K.minkowski_bound) + 1)
    chosen = {cl.zero(): base}
    remaining = [c for c in targets if c != cl.zero()]
    for I in _primitive_ideals(K, bound, avoid):
        if not remaining:
            break
        rel = cl.add(cl.log(I), cl.neg(c1))
        if rel not in remaining:
            continue
        a_ideal = I.relative_norm()
        A = F0.totally_positive_generator(a_ideal)
        r0 = next((r for r in a_ideal.residues() if I.contains(theta1 - K.elem(r))), None)
        if r0 is None:
            continue
        r = crt([(r0, a_ideal), (F0(0), n)]) if not a_ideal.is_unit() else F0(0)
        B = base.B + 2 * r
        C = (B * B - base.D) / (4 * A)
        if not C.is_integral():
            continue
        t = QuadraticTriple(K, A, B, C, base.cmtype)
        if t.delta != base.delta:
            raise AssertionError("constructed triple is not equiprimitive with the base")
        chosen[rel] = t
        remaining.remove(rel)
    if remaining:
        raise NSystemError("no representative found for classes %s (norm bound %d)" % (remaining, bound))
    order = [cl.zero()] + [c for c in targets if c != cl.zero()]
    S = NSystem(K, N, [chosen[c] for c in order], F, labels=order, orbit=targets)
    return S


def base_triple(K: CMField, N: int, cmtype: CMType | None = None) -> QuadraticTriple:
    """A triple with A = 1, N | C and gcd(N, C/N) = 1 whose root generates O_K over O_K0.

    Starts from X^2 - T X + Nm for the O_K0-generator theta of O_K, scaled by a
    unit of norm -1 when needed to reach the requested CM type, with B reduced
    modulo 2.
    """
    from .polforms import make_C_divisible
    F0 = K.K0
    T, Nm = K.theta_trace, K.theta_norm
    eps, _ = F0.fundamental_unit
    last = None
    for u in (F0.one, eps):
        B0 = -T * u
        D = B0 * B0 - 4 * Nm * u * u
        # translate the root so that B has coordinates 0 or 1
        B = F0(B0.p % 2, B0.q % 2)
        C = (B * B - D) / 4
        try:
            t = QuadraticTriple(K, F0.one, B, C, cmtype)
        except TripleError as exc:
            last = exc
            continue
        return make_C_divisible(t, F0.ideal(N))
    raise NSystemError("no base triple for the requested CM type: %s" % last)


# ---------------------------------------------------------------------------

def _labels(S):
    if S.labels is None:
        S.compute_labels()
    return S.labels


def pair_conjugates_ramified(S: NSystem, N: int | None = None):
    """i -> j with Q_j equivalent to [A_i, -B_i, C_i]; valid when every prime of N ramifies in K/K0."""
    K = S.K
    N = N or S.N
    from math import gcd
    if gcd(S.F, N) != 1:
        raise NotApplicable("conductor and level are not coprime")
    for P, _ in K.K0.ideal(N).factor():
        if K.relative_splitting(P)[0] != "ramified":
            raise NotApplicable("a prime of N is not ramified in K/K0")
    cl = K.class_group
    labels = _labels(S)
    base = cl.log(triple_ideal(S.triples[0]))
    out = {}
    for i, t in enumerate(S.triples):
        c = cl.add(cl.log(triple_ideal(conj_triple(t))), cl.neg(base))
        if c not in labels:
            raise NotApplicable("conjugate triple is outside the orbit")
        out[i] = labels.index(c)
    return out


def fricke_partner(S: NSystem, N: int | None = None) -> QuadraticTriple:
    N = N or S.N
    t1 = S.triples[0]
    K = t1.K
    if not K.K0.ideal(N).contains(t1.C):
        raise NotApplicable("N does not divide C_1")
    C1n = t1.C / N
    try:
        return QuadraticTriple(K, C1n, t1.B, t1.A * N, t1.cmtype)
    except TripleError as exc:
        raise NotApplicable(str(exc)) from exc


def pair_conjugates_fricke(S: NSystem, N: int | None = None):
    """i -> j with a_j in the class of a_2 a_i^-1, a_2 the class of [C_1/N, B_1, A_1 N]."""
    K = S.K
    cl = K.class_group
    labels = _labels(S)
    base = cl.log(triple_ideal(S.triples[0]))
    q2 = fricke_partner(S, N)
    rho = cl.add(cl.log(triple_ideal(q2)), cl.neg(base))
    if rho not in labels:
        raise NotApplicable("Fricke partner is outside the orbit")
    out = {}
    for i, c in enumerate(labels):
        cj = cl.add(rho, cl.neg(c))
        if cj not in labels:
            raise NotApplicable("orbit is not closed under the Fricke pairing")
        out[i] = labels.index(cj)
    return out


def describe_pairing(pairing):
    real = sorted(i for i, j in pairing.items() if i == j)
    pairs = sorted({tuple(sorted((i, j))) for i, j in pairing.items() if i != j})
    return real, pairs
