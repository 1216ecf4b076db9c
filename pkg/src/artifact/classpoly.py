"""Class polynomials of class invariants: N-system, evaluation at the
conjugate period matrices, floating product and exact reconstruction over
the reflex field K^r or its real subfield.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd

import mpmath
from mpmath import mp, mpc, mpf

from .cmfield import CMField, CMType
from .mpnum import GUARD_BITS, InconclusiveError, algdep, integer_relation
from .nsystem import (NotApplicable, NSystem, base_triple, build_nsystem, describe_pairing,
                      pair_conjugates_fricke, pair_conjugates_ramified, verify_nsystem)
from .polforms import parse_triple, theorem_n_check
from .siegel import InvariantSpec, PoleError, invariant_eval, period_matrix

log = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def resolve_path(path, base_dir=None):
    """A file as given, relative to base_dir, or by name among the bundled example files."""
    candidates = [path]
    if base_dir:
        candidates.append(os.path.join(base_dir, path))
    candidates.append(os.path.join(DATA_DIR, os.path.basename(path)))
    for c in candidates:
        if os.path.isfile(c):
            return c
    raise FileNotFoundError(path)


class ClassPolyError(RuntimeError):
    pass


class ReconstructionFailed(ClassPolyError):
    pass


class JobConfig:
    def __init__(self, field, invariant, level=1, cm_type="auto", orbit_generators=None,
                 precision=None, signs=None, system=None, jobs=1, name=None, expected=None, output=None,
                 base_dir=None):
        self.field = tuple(int(v) for v in field)
        self.invariant = invariant if isinstance(invariant, InvariantSpec) else InvariantSpec.parse(invariant)
        self.level = int(level)
        if self.level < 1:
            raise ValueError("level must be >= 1")
        self.cm_type = cm_type
        self.orbit_generators = orbit_generators
        p = dict(start=500, max=8000, growth=2)
        p.update(precision or {})
        if not (p["start"] > 0 and p["max"] >= p["start"] and p["growth"] > 1):
            raise ValueError("precision schedule must be increasing")
        self.precision = p
        self.signs = signs
        if signs is not None:
            if self.invariant.kind != "sqrt":
                raise ValueError("sign overrides apply only to sqrt invariants")
            vals = [1 if str(v).strip() in ("+", "1", "+1") else -1 for v in signs]
            self.invariant = InvariantSpec("sqrt", inner=self.invariant.inner, signs=vals)
        self.system = system
        self.jobs = int(jobs)
        self.name = name
        self.expected = expected
        self.output = output or {}
        self.base_dir = base_dir

    @classmethod
    def from_dict(cls, d, base_dir=None):
        keys = ("field", "invariant", "level", "cm_type", "orbit_generators", "precision", "signs",
                "system", "jobs", "name", "expected", "output")
        return cls(base_dir=base_dir, **{k: d[k] for k in keys if k in d})

    @classmethod
    def load(cls, path):
        path = resolve_path(path)
        with open(path) as fh:
            return cls.from_dict(json.load(fh), os.path.dirname(os.path.abspath(path)))

    def schedule(self):
        p = self.precision["start"]
        out = []
        while p < self.precision["max"]:
            out.append(int(p))
            p = p * self.precision["growth"]
        out.append(int(self.precision["max"]))
        return out

    def cmtype(self):
        ct = self.cm_type
        if ct in (None, "auto"):
            return None
        if isinstance(ct, str):
            return CMType(*[1 if c == "+" else -1 for c in ct.replace(",", "").replace(" ", "")])
        return CMType(*ct)


# ---------------------------------------------------------------------------
# coefficient rings

class CoefficientRing:
    """K^r0 with basis (1, w_r) (tag 'Kr0') or K^r with basis (1, t, t^2, t^3) (tag 'Kr')."""

    def __init__(self, K: CMField, cmtype: CMType, tag):
        self.K, self.cmtype, self.tag = K, cmtype, tag
        self.reflex = K.reflex(cmtype)

    @property
    def dim(self):
        return 2 if self.tag == "Kr0" else 4

    def basis(self, prec):
        with mp.workprec(prec):
            if self.tag == "Kr0":
                return [mpf(1), self.reflex.omega_r(prec)]
            t = self.reflex.t(prec)
            return [mpc(1), t, t * t, t ** 3]

    def names(self):
        return ["1", "w_r"] if self.tag == "Kr0" else ["1", "t", "t^2", "t^3"]

    def embed(self, coords, den, prec):
        with mp.workprec(prec):
            return mpmath.fsum(c * b for c, b in zip(coords, self.basis(prec))) / den


def reconstruct_coefficient(c, ring: CoefficientRing, prec, max_bits=None):
    """(coords, den) with c = sum coords_i b_i / den, or raise InconclusiveError."""
    with mp.workprec(prec):
        basis = ring.basis(prec)
        if ring.tag == "Kr0":
            if abs(mpmath.im(c)) > mpmath.ldexp(max(1, abs(c)), -(prec // 2)):
                raise ClassPolyError("coefficient is not real")
            c = mpmath.re(c)
        rel = integer_relation([c] + basis, max_bits=max_bits, prec=prec)
        if rel is None or rel[0] == 0:
            raise InconclusiveError("no relation found at %d bits" % prec)
        den = rel[0]
        coords = [-v for v in rel[1:]]
        if den < 0:
            den, coords = -den, [-v for v in coords]
        g = den
        for v in coords:
            g = gcd(g, v)
        return [v // g for v in coords], den // g


def denominator_bound(c, ring: CoefficientRing, prec):
    """Leading coefficient of the minimal polynomial of c times the index of the basis order.

    Any denominator found by a direct relation against the basis must divide this.
    """
    with mp.workprec(prec):
        if ring.tag == "Kr0":
            c = mpmath.re(c)
        mp_ = algdep(c, ring.dim, prec=prec)
    if mp_ is None:
        raise InconclusiveError("no minimal polynomial found")
    index = 1 if ring.tag == "Kr0" else ring.reflex.ring_index
    return mp_[-1] * index


def check_denominators(P, floats, prec):
    """'pass', 'fail' or 'inconclusive' for the algdep route on every coefficient."""
    for k, c in enumerate(floats[:-1]):
        coords = P.coords[k]
        g = P.den
        for v in coords:
            g = gcd(g, v)
        den = P.den // g
        try:
            bound = denominator_bound(c, P.ring, prec)
        except InconclusiveError:
            return "inconclusive"
        if bound % den:
            return "fail"
    return "pass"


def expand_from_roots(values, pairing=None):
    """Coefficients (constant term first) of prod (X - v).

    With a pairing, conjugate pairs are multiplied first as real quadratics.
    """
    factors = []
    used = set()
    if pairing:
        for i, j in sorted(pairing.items()):
            if i in used:
                continue
            if i == j:
                factors.append([-values[i], 1])
            else:
                a = values[i]
                factors.append([mpmath.re(a) ** 2 + mpmath.im(a) ** 2, -2 * mpmath.re(a), 1])
                used.add(j)
            used.add(i)
    for i, v in enumerate(values):
        if i not in used:
            factors.append([-v, 1])
    poly = [mpf(1)]
    for f in factors:
        out = [0] * (len(poly) + len(f) - 1)
        for i, a in enumerate(poly):
            for j, b in enumerate(f):
                out[i + j] += a * b
        poly = out
    return poly


class ClassPolynomial:
    def __init__(self, ring: CoefficientRing, coords, den, residual=None, prec=None):
        self.ring = ring
        self.coords = [list(c) for c in coords]     # constant term first
        self.den = den
        self.residual = residual
        self.prec = prec

    @property
    def degree(self):
        return len(self.coords) - 1

    def monic(self):
        """Coefficients as tuples of Fractions over the basis."""
        return [tuple(Fraction(v, self.den) for v in c) for c in self.coords]

    def __eq__(self, other):
        return isinstance(other, ClassPolynomial) and self.ring.tag == other.ring.tag and self.monic() == other.monic()

    def embedded(self, prec):
        return [self.ring.embed(c, self.den, prec) for c in self.coords]

    def leading(self):
        return self.coords[-1][0]

    def to_paper(self):
        names = self.ring.names()
        terms = []
        h = self.degree
        for k in range(h, -1, -1):
            c = self.coords[k]
            parts = []
            for v, nm in reversed(list(zip(c, names))):
                if v:
                    parts.append((v, nm))
            if not parts:
                continue
            txt = ""
            for i, (v, nm) in enumerate(parts):
                mag = str(abs(v)) if (nm == "1" or abs(v) != 1) else ""
                term = mag + ("" if nm == "1" else ("" if not mag else " ") + nm)
                if i == 0:
                    txt = ("-" if v < 0 else "") + term
                else:
                    txt += (" - " if v < 0 else " + ") + term
            mon = "" if k == 0 else ("X" if k == 1 else "X^%d" % k)
            if len(parts) > 1 and mon:
                txt = "(%s)" % txt
            terms.append(txt + (" " + mon if mon else ""))
        out = terms[0]
        for t in terms[1:]:
            if t.startswith("-"):
                out += "\n  - " + t[1:]
            else:
                out += "\n  + " + t
        return out

    def to_json(self):
        return {
            "ring": self.ring.tag,
            "basis": self.ring.names(),
            "degree": self.degree,
            "denominator": self.den,
            "coefficients": self.coords,
            "residual_log2": None if self.residual is None else float(self.residual),
            "precision": self.prec,
            "status": "heuristically verified (residual < 2^-(p/2))",
        }

    @classmethod
    def from_json(cls, K, cmtype, d):
        return cls(CoefficientRing(K, cmtype, d["ring"]), d["coefficients"], d["denominator"],
                   d.get("residual_log2"), d.get("precision"))


def normalize_coefficients(coef_list):
    """Common denominator and content reduction of [(coords, den), ...] (monic leading term included)."""
    L = 1
    for _, d in coef_list:
        L = L * d // gcd(L, d)
    rows = [[v * (L // d) for v in c] for c, d in coef_list]
    g = L
    for r in rows:
        for v in r:
            g = gcd(g, v)
    return [[v // g for v in r] for r in rows], L // g


# ---------------------------------------------------------------------------

def realness_detect(K: CMField, N: int, spec: InvariantSpec, F: int = 1, system: NSystem | None = None):
    """'real_ramified', 'real_fricke' or 'complex'."""
    if gcd(F, N) == 1 and all(K.relative_splitting(P)[0] == "ramified" for P, _ in K.K0.ideal(N).factor()):
        return "real_ramified"
    if spec.fricke_invariant and system is not None:
        try:
            pair_conjugates_fricke(system, N)
            return "real_fricke"
        except NotApplicable:
            pass
    return "complex"


def _eval_one(args):
    spec, tau, prec, index = args
    return invariant_eval(spec, tau, prec, index=index)


class RunReport(dict):
    pass


def prepare(job: JobConfig):
    """Field, N-system, pairing mode and coefficient ring for a job."""
    a, b = job.field
    K = CMField(a, b)
    N = job.level
    if N % job.invariant.level:
        raise ClassPolyError("invariant level %d does not divide N = %d" % (job.invariant.level, N))
    n = K.K0.ideal(N)
    if not theorem_n_check(K, n):
        raise ClassPolyError("level %d fails the splitting condition for this field" % N)
    gens = None
    if job.orbit_generators:
        gens = [K.ideal(*[K.parse(g) for g in gen]) for gen in job.orbit_generators]
    ct = job.cmtype()
    if job.system:
        if isinstance(job.system, str):
            S = NSystem.from_text(open(resolve_path(job.system, job.base_dir)).read(), K)
            if (S.K.a, S.K.b) != (a, b) or S.N != N:
                raise ClassPolyError("system file does not match the configured field and level")
            if ct is not None and S.triples[0].cmtype != ct:
                raise ClassPolyError("system file CM type differs from the configured one")
        else:
            triples = [parse_triple(K, s, ct) for s in job.system]
            if ct is None:
                ct0 = triples[0].cmtype
                triples = [t.with_cmtype(ct0) for t in triples]
            S = NSystem(K, N, triples, generators=job.orbit_generators)
        rep = verify_nsystem(S, gens)
        if not rep.ok:
            raise ClassPolyError("supplied N-system fails: %s" % rep.first_failure())
    else:
        base = base_triple(K, N, ct)
        S = build_nsystem(base, N, gens)
    cmtype = S.triples[0].cmtype
    mode = realness_detect(K, N, job.invariant, 1, S)
    pairing = None
    if mode == "real_ramified":
        pairing = pair_conjugates_ramified(S, N)
    elif mode == "real_fricke":
        pairing = pair_conjugates_fricke(S, N)
    ring = CoefficientRing(K, cmtype, "Kr0" if mode != "complex" else "Kr")
    if job.invariant.kind == "sqrt" and job.invariant.signs is not None and len(job.invariant.signs) != len(S):
        raise ClassPolyError("sign list length does not match the system size")
    return K, S, mode, pairing, ring


def evaluate_values(job, S, pairing, prec, jobs=1):
    """Invariant values at all tau_i (partners of conjugate pairs are obtained by conjugation)."""
    h = len(S)
    todo = []
    for i in range(h):
        if pairing and pairing[i] < i:
            continue
        todo.append(i)
    wp = prec + GUARD_BITS
    taus = {i: period_matrix(S.triples[i], wp) for i in todo}
    args = [(job.invariant, taus[i], wp, i) for i in todo]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            vals = list(ex.map(_eval_one, args))
    else:
        vals = [_eval_one(a) for a in args]
    out = [None] * h
    for i, v in zip(todo, vals):
        out[i] = v
    if pairing:
        with mp.workprec(wp):
            for i in range(h):
                j = pairing[i]
                if i == j:
                    out[i] = mpc(mpmath.re(out[i]), 0)
                elif out[i] is None:
                    out[i] = mpmath.conj(out[j])
    return out


def reconstruct(floats, ring, prec):
    coefs = []
    for c in floats[:-1]:
        coefs.append(reconstruct_coefficient(c, ring, prec))
    coefs.append(([1] + [0] * (ring.dim - 1), 1))
    coords, den = normalize_coefficients(coefs)
    P = ClassPolynomial(ring, coords, den, prec=prec)
    with mp.workprec(prec):
        emb = P.embedded(prec)
        worst = mpf(0)
        for e, f in zip(emb, floats):
            err = abs(e - f) / max(1, abs(f))
            worst = max(worst, err)
        limit = mpmath.ldexp(1, -(prec // 2))
        if worst > limit:
            raise InconclusiveError("re-embedding residual too large")
        P.residual = float(mpmath.log(worst, 2)) if worst > 0 else -float(prec)
    return P


def run(job: JobConfig, jobs=None, log_fn=None, check_denoms=True):
    """Class polynomial and a report dictionary."""
    t_start = time.time()
    K, S, mode, pairing, ring = prepare(job)
    report = RunReport(
        field=list(job.field), level=job.level, invariant=str(job.invariant),
        cm_type=list(S.triples[0].cmtype.signs), system=[str(t) for t in S.triples],
        labels=[list(c) for c in (S.labels or [])], pairing_mode=mode)
    if pairing:
        real, pairs = describe_pairing(pairing)
        report["real_entries"] = [i + 1 for i in real]
        report["conjugate_pairs"] = [[i + 1, j + 1] for i, j in pairs]
    jobs = jobs or job.jobs
    attempts = []
    for prec in job.schedule():
        t0 = time.time()
        try:
            vals = evaluate_values(job, S, pairing, prec, jobs)
        except PoleError:
            raise
        with mp.workprec(prec + GUARD_BITS):
            floats = expand_from_roots(vals, pairing)
            if mode != "complex":
                imag = max(abs(mpmath.im(c)) for c in floats)
                report["max_imag_part_log2"] = float(mpmath.log(imag, 2)) if imag else None
        try:
            P = reconstruct(floats, ring, prec)
        except (InconclusiveError, ClassPolyError) as exc:
            attempts.append({"precision": prec, "result": "inconclusive", "reason": str(exc),
                             "seconds": round(time.time() - t0, 3)})
            if log_fn:
                log_fn("precision %d: %s" % (prec, exc))
            continue
        attempts.append({"precision": prec, "result": "ok", "seconds": round(time.time() - t0, 3)})
        report["attempts"] = attempts
        report["precision"] = prec
        report["seconds"] = round(time.time() - t_start, 3)
        report["values"] = [mpmath.nstr(v, 25) for v in vals]
        if check_denoms:
            status, used = "inconclusive", prec
            for p2 in [q for q in job.schedule() if q >= prec]:
                if p2 > prec:
                    vals2 = evaluate_values(job, S, pairing, p2, jobs)
                    with mp.workprec(p2 + GUARD_BITS):
                        floats = expand_from_roots(vals2, pairing)
                with mp.workprec(p2 + GUARD_BITS):
                    status, used = check_denominators(P, floats, p2), p2
                if status != "inconclusive":
                    break
            report["denominator_check"] = status
            report["denominator_check_precision"] = used
        report["coefficient_bits"] = max(abs(v).bit_length() for c in P.coords for v in c)
        return P, report
    report["attempts"] = attempts
    raise ReconstructionFailed("reconstruction failed up to %d bits" % job.schedule()[-1])


def expected_polynomial(K, cmtype, expected):
    """ClassPolynomial from a fixture's 'expected' entry (coefficients constant term first)."""
    ring = CoefficientRing(K, cmtype, expected["ring"])
    coeffs = [list(map(int, c)) for c in expected["coefficients"]]
    lead = coeffs[-1][0]
    return ClassPolynomial(ring, coeffs, lead)


def compare(P: ClassPolynomial, Q: ClassPolynomial):
    """(monic equality, literal equality of integer coordinates and denominators)."""
    same = P == Q
    literal = same and P.coords == Q.coords and P.den == Q.den
    return same, literal
