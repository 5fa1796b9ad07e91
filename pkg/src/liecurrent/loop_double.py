"""
Classical doubles of g[x] and their Lagrangian complements.

    family A   g[x, 1/x]            (f1|f2) = Res K(f1, f2) a(x)
    family B   g[x, 1/x] + g        (f1 + g1|f2 + g2) = Res K(f1, f2) b(x)/x - K(g1, g2)
    family C   g[x, 1/x] + g[eps]   (f1 + g1 eps + h1|...) = Res K(f1, f2)/x^2
                                        - K(g1, h2) - K(h1, g2) - c1 K(h1, h2)

with a = 1/p for p in {1, 1-x, (1-x)^2, (1-m1 x)(1-m2 x)}, b = 1/p for
p in {1, 1-x}, and c = 1 (so c1 = 0).  K is the invariant form of the
algebra normalized by K(e_a, e_-a) = 1.

Lagrangian subalgebras W are stored as a finite list of exceptional
generators plus a tail q(t) g[t] with t = 1/x.  Every W built here lives
inside g[t] (+ finite part), so membership reduces to a remainder modulo
q(t) followed by one exact linear solve.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import _linalg as la
from ._pool import pmap
from .errors import (BadConstantTerm, BadDegree, DegenerateParameters, MismatchWitness,
                     WindowTooSmall)
from .exact_arith import (ONE, ZERO, LaurentPoly, MultiPoly, Q, TruncSeries, frac_str,
                          residue_pair, series_inverse)
from .lie_core import BasisAutomorphism, LieAlgebraData

CASES = ("A1", "A2", "A3", "A4", "B1", "B2", "C")


# ---------------------------------------------------------------------------
# case tags and forms


@dataclass(frozen=True)
class CaseTag:
    name: str
    m1: Optional[Fraction] = None
    m2: Optional[Fraction] = None

    def __post_init__(self):
        if self.name not in CASES:
            raise ValueError(f"unknown case {self.name!r}; expected one of {', '.join(CASES)}")
        if self.name == "A4":
            if self.m1 is None or self.m2 is None:
                raise DegenerateParameters("A4 needs m1 and m2")
            m1, m2 = Q(self.m1), Q(self.m2)
            object.__setattr__(self, "m1", m1)
            object.__setattr__(self, "m2", m2)
            if m1 == m2 or m1 * m2 == 0:
                raise DegenerateParameters(
                    f"A4 needs m1 != m2 and m1*m2 != 0 (got {m1}, {m2}); "
                    "such p(x) degenerate to A2/A3, see classify_a_poly")
        elif self.m1 is not None or self.m2 is not None:
            raise ValueError(f"case {self.name} takes no parameters")

    @classmethod
    def parse(cls, name: str, m1=None, m2=None) -> "CaseTag":
        name = name.strip().upper()
        if name == "A4":
            return cls(name, None if m1 is None else Q(m1), None if m2 is None else Q(m2))
        return cls(name)

    @property
    def family(self) -> str:
        return self.name[0]

    def __str__(self):
        if self.name == "A4":
            return f"A4(m1={self.m1}, m2={self.m2})"
        return self.name

    def to_json_obj(self):
        obj = {"name": self.name}
        if self.name == "A4":
            obj["m1"] = frac_str(self.m1)
            obj["m2"] = frac_str(self.m2)
        return obj


def _x_poly(coeffs) -> MultiPoly:
    return MultiPoly.from_coeffs([Q(c) for c in coeffs], "x")


@dataclass(frozen=True)
class FormSpec:
    """Canonical form of the double for one case.

    ``inv_poly`` is p = 1/weight; ``shift`` is the power of 1/x multiplying
    the residue (0 for A, 1 for B, 2 for C).
    """

    case: CaseTag
    inv_poly: Tuple[Fraction, ...]
    shift: int
    c1: Fraction = ZERO

    @classmethod
    def for_case(cls, case: CaseTag) -> "FormSpec":
        n = case.name
        if n == "A1":
            p = (1,)
        elif n == "A2":
            p = (1, -1)
        elif n == "A3":
            p = (1, -2, 1)
        elif n == "A4":
            p = (1, -(case.m1 + case.m2), case.m1 * case.m2)
        elif n == "B1":
            p = (1,)
        elif n == "B2":
            p = (1, -1)
        else:
            p = (1,)
        shift = {"A": 0, "B": 1, "C": 2}[case.family]
        return cls(case, tuple(Q(c) for c in p), shift)

    @property
    def family(self):
        return self.case.family

    def inverse_weight(self) -> LaurentPoly:
        return LaurentPoly(dict(enumerate(self.inv_poly)), "x")

    def weight(self, order: int) -> TruncSeries:
        return _weight_series(self.inv_poly, max(order, 0))

    def loop_pair(self, f: LaurentPoly, h: LaurentPoly) -> Fraction:
        """Scalar residue Res(f h x^-shift weight)."""
        prod = f * h
        if prod.is_zero():
            return ZERO
        prod = prod.shift(-self.shift)
        order = max(0, -prod.lo - 1)
        return residue_pair(prod, LaurentPoly.const(1), self.weight(order))


@lru_cache(maxsize=None)
def _weight_series(inv_poly, order):
    return series_inverse(_x_poly(inv_poly), order)


# ---------------------------------------------------------------------------
# elements of the double


def _lp_dict(d: Mapping[int, LaurentPoly]) -> Dict[int, LaurentPoly]:
    return {i: p for i, p in d.items() if p is not None and not p.is_zero()}


def _vec(d) -> Dict[int, Fraction]:
    return {i: Q(c) for i, c in (d or {}).items() if c}


class DoubleElem:
    """Loop part {basis index: LaurentPoly} plus a finite part.

    family 'A': no finite part; 'B': vector in g; 'C': pair (h, g) for h + g eps.
    """

    __slots__ = ("family", "loop", "fin", "feps")

    def __init__(self, family: str, loop: Mapping[int, LaurentPoly] | None = None,
                 fin: Mapping[int, Fraction] | None = None, feps: Mapping[int, Fraction] | None = None):
        if family not in ("A", "B", "C"):
            raise ValueError(family)
        self.family = family
        self.loop = _lp_dict(loop or {})
        if family == "A" and (fin or feps):
            raise ValueError("family A has no finite part")
        if family == "B" and feps:
            raise ValueError("family B has no eps part")
        self.fin = _vec(fin)
        self.feps = _vec(feps)

    @classmethod
    def mono(cls, family: str, idx: int, degree: int, coeff=1) -> "DoubleElem":
        return cls(family, {idx: LaurentPoly({degree: coeff})})

    def is_zero(self):
        return not (self.loop or self.fin or self.feps)

    def _check(self, other):
        if other.family != self.family:
            raise ValueError("elements of different doubles")

    def __add__(self, other: "DoubleElem"):
        self._check(other)
        loop = dict(self.loop)
        for i, p in other.loop.items():
            loop[i] = loop[i] + p if i in loop else p
        fin = dict(self.fin)
        for i, c in other.fin.items():
            fin[i] = fin.get(i, ZERO) + c
        feps = dict(self.feps)
        for i, c in other.feps.items():
            feps[i] = feps.get(i, ZERO) + c
        return DoubleElem(self.family, loop, fin, feps)

    def scale(self, c) -> "DoubleElem":
        c = Q(c)
        return DoubleElem(self.family, {i: p.scale(c) for i, p in self.loop.items()},
                          {i: v * c for i, v in self.fin.items()}, {i: v * c for i, v in self.feps.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def mul_loop(self, p: LaurentPoly) -> "DoubleElem":
        """Multiply the loop part by a scalar Laurent polynomial (finite part must be 0)."""
        if self.fin or self.feps:
            raise ValueError("only pure loop elements can be multiplied by a function")
        return DoubleElem(self.family, {i: f * p for i, f in self.loop.items()})

    def __eq__(self, other):
        if not isinstance(other, DoubleElem):
            return NotImplemented
        return (self.family == other.family and self.loop == other.loop
                and self.fin == other.fin and self.feps == other.feps)

    def __hash__(self):
        return hash((self.family, tuple(sorted((i, p) for i, p in self.loop.items())),
                     tuple(sorted(self.fin.items())), tuple(sorted(self.feps.items()))))

    def degree_range(self):
        los = [p.lo for p in self.loop.values()]
        his = [p.hi for p in self.loop.values()]
        if not los:
            return None
        return min(los), max(his)

    def render(self, g: LieAlgebraData | None = None):
        """Deterministic monomial list: [[label, degree, 'p/q'], ...] plus finite parts."""
        lab = (lambda i: g.labels[i]) if g is not None else str
        out = {"loop": [[lab(i), k, frac_str(c)] for i in sorted(self.loop) for k, c in self.loop[i].items()]}
        if self.family != "A":
            out["finite"] = [[lab(i), frac_str(c)] for i, c in sorted(self.fin.items())]
        if self.family == "C":
            out["eps"] = [[lab(i), frac_str(c)] for i, c in sorted(self.feps.items())]
        return out

    def __repr__(self):
        return f"DoubleElem({self.render()})"


def double_bracket(u: DoubleElem, v: DoubleElem, g: LieAlgebraData) -> DoubleElem:
    u._check(v)
    loop: Dict[int, LaurentPoly] = {}
    for i, f in u.loop.items():
        for j, h in v.loop.items():
            br = g.bracket(i, j)
            if not br:
                continue
            fh = f * h
            for k, c in br.items():
                term = fh.scale(c)
                loop[k] = loop[k] + term if k in loop else term
    fin, feps = {}, {}
    if u.family in ("B", "C"):
        fin = g.bracket_vec(u.fin, v.fin)
    if u.family == "C":
        a = g.bracket_vec(u.fin, v.feps)
        b = g.bracket_vec(u.feps, v.fin)
        feps = dict(a)
        for k, c in b.items():
            feps[k] = feps.get(k, ZERO) + c
    return DoubleElem(u.family, loop, fin, feps)


def canonical_pair(u: DoubleElem, v: DoubleElem, form: FormSpec, g: LieAlgebraData) -> Fraction:
    u._check(v)
    G = g.normalized_form
    total = ZERO
    for i, f in u.loop.items():
        for j, h in v.loop.items():
            if G[i][j]:
                total += G[i][j] * form.loop_pair(f, h)
    if form.family == "B":
        total -= g.form(u.fin, v.fin)
    elif form.family == "C":
        total -= g.form(u.feps, v.fin) + g.form(u.fin, v.feps)
        if form.c1:
            total -= form.c1 * g.form(u.fin, v.fin)
    return total


def embed_gx(f, case: CaseTag) -> DoubleElem:
    """g[x] -> double.  A: identity.  B: f -> (f, f(0)).  C: f -> (f, a0 + a1 eps)."""
    loop = f.loop if isinstance(f, DoubleElem) else _lp_dict(f)
    for p in loop.values():
        if p.lo < 0:
            raise ValueError("embed_gx expects a polynomial element of g[x]")
    fam = case.family
    if fam == "A":
        return DoubleElem("A", loop)
    a0 = {i: p.coeff(0) for i, p in loop.items()}
    if fam == "B":
        return DoubleElem("B", loop, a0)
    a1 = {i: p.coeff(1) for i, p in loop.items()}
    return DoubleElem("C", loop, a0, a1)


# ---------------------------------------------------------------------------
# Lagrangian patterns


def _t_coeffs(p: LaurentPoly) -> List[Fraction] | None:
    """Coefficients of p as a polynomial in t = 1/x, or None if p has positive x-powers."""
    if p.is_zero():
        return []
    if p.hi > 0:
        return None
    out = [ZERO] * (-p.lo + 1)
    for k, c in p.terms.items():
        out[-k] = c
    return out


def _t_rem(coeffs: Sequence[Fraction], q: Sequence[Fraction]) -> List[Fraction]:
    """Remainder of a t-polynomial modulo q (coefficient lists, low degree first)."""
    r = list(coeffs)
    dq = len(q) - 1
    lead = q[-1]
    for k in range(len(r) - 1, dq - 1, -1):
        c = r[k]
        if c:
            f = c / lead
            for i in range(dq + 1):
                r[k - dq + i] -= f * q[i]
    r = r[:dq] if dq > 0 else []
    return r + [ZERO] * (dq - len(r))


@dataclass(frozen=True)
class LagrangianPattern:
    """span(exceptional) + tail * g[1/x]  (tail None: no tail)."""

    case: CaseTag
    exceptional: Tuple[DoubleElem, ...]
    tail: Optional[LaurentPoly]
    dim: int
    labels: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()

    @property
    def family(self):
        return self.case.family

    @property
    def tail_t(self) -> Optional[List[Fraction]]:
        return None if self.tail is None else _t_coeffs(self.tail)

    @property
    def exact(self) -> bool:
        """Membership is exact when the tail and all exceptional loop parts lie in C[1/x]."""
        if self.tail is None:
            return True
        if self.tail_t is None:
            return False
        return all(_t_coeffs(p) is not None for w in self.exceptional for p in w.loop.values())

    def tail_generator(self, j: int, idx: int) -> DoubleElem:
        return DoubleElem(self.family, {idx: self.tail.shift(-j)})

    # -- reduction modulo the tail
    def _reduce(self, u: DoubleElem):
        """Coordinates of u modulo tail * g[t], or None if u has positive x-powers."""
        q = self.tail_t
        d = len(q) - 1
        vec: Dict[int, Fraction] = {}
        for i, p in u.loop.items():
            tc = _t_coeffs(p)
            if tc is None:
                return None
            for k, c in enumerate(_t_rem(tc, q)):
                if c:
                    vec[i * d + k] = c
        base = self.dim * d
        for i, c in u.fin.items():
            vec[base + i] = c
        for i, c in u.feps.items():
            vec[base + self.dim + i] = c
        return vec, base + 2 * self.dim

    def _span_coords(self, elems: Sequence[DoubleElem], extra: DoubleElem):
        """Monomial coordinates (no tail) for a finite span problem."""
        keys = set()
        for w in list(elems) + [extra]:
            for i, p in w.loop.items():
                keys.update(("L", i, k) for k in p.terms)
            keys.update(("F", i) for i in w.fin)
            keys.update(("E", i) for i in w.feps)
        order = {k: n for n, k in enumerate(sorted(keys, key=str))}

        def coords(w):
            v = {}
            for i, p in w.loop.items():
                for k, c in p.terms.items():
                    v[order[("L", i, k)]] = c
            for i, c in w.fin.items():
                v[order[("F", i)]] = c
            for i, c in w.feps.items():
                v[order[("E", i)]] = c
            return v

        return [coords(w) for w in elems], coords(extra), len(order)

    def contains(self, u: DoubleElem) -> Tuple[bool, Optional[List[Fraction]]]:
        """Exact membership; returns (True, coefficients on exceptional) or (False, None)."""
        if u.family != self.family:
            raise ValueError("family mismatch")
        if self.tail is None:
            rows, v, n = self._span_coords(self.exceptional, u)
            sol = la.in_span(rows, n, v)
            return (sol is not None), sol
        if not self.exact:
            raise ValueError("membership is exact only for patterns inside g[1/x]")
        red = self._reduce(u)
        if red is None:
            return False, None
        v, n = red
        rows = []
        for w in self.exceptional:
            rw = self._reduce(w)
            rows.append(rw[0])
        sol = la.in_span(rows, n, v)
        return (sol is not None), sol

    def generators_in_window(self, lo: int, hi: int) -> List[Tuple[str, DoubleElem]]:
        out = [(lab, w) for lab, w in zip(self.labels or [f"w{i}" for i in range(len(self.exceptional))],
                                          self.exceptional)]
        if self.tail is not None:
            j = 0
            while self.tail.lo - j >= lo:
                if self.tail.hi - j <= hi:
                    for idx in range(self.dim):
                        out.append((f"tail[j={j},b={idx}]", self.tail_generator(j, idx)))
                j += 1
        return out

    def apply(self, sigma: BasisAutomorphism) -> "LagrangianPattern":
        """Image under a Lie algebra automorphism acting on g (x fixed)."""
        new = []
        for w in self.exceptional:
            loop: Dict[int, LaurentPoly] = {}
            for i, p in w.loop.items():
                for k, c in sigma.image(i).items():
                    term = p.scale(c)
                    loop[k] = loop[k] + term if k in loop else term
            new.append(DoubleElem(w.family, loop, sigma.apply(w.fin), sigma.apply(w.feps)))
        return LagrangianPattern(self.case, tuple(new), self.tail, self.dim,
                                 tuple(f"sigma({lab})" for lab in self.labels), self.notes)


def build_W(case: CaseTag, g: LieAlgebraData) -> LagrangianPattern:
    fam = case.family
    t = LaurentPoly({-1: 1})
    one = LaurentPoly({0: 1})
    exc: List[DoubleElem] = []
    labels: List[str] = []
    notes: List[str] = []

    def add(label, idx, poly, fin=None, feps=None):
        loop = {idx: poly} if poly is not None else {}
        exc.append(DoubleElem(fam, loop, fin, feps))
        labels.append(label)

    pos, neg = g.positive_indices, g.negative_indices
    name = case.name
    if name == "A1":
        tail = t
    elif name == "A2":
        for q in range(g.rank):
            add(f"(1/x-1/2){g.labels[g.h(q + 1)]}", g.h(q + 1), t - Fraction(1, 2))
        for a, b in zip(pos, neg):
            add(f"(1/x-1){g.labels[b]}", b, t - 1)
            add(f"(1/x){g.labels[a]}", a, t)
        tail = (one - t) * t
        notes.append("exceptional e_a x^-1 and (x^-1 - 1) e_-a taken over positive roots a")
    elif name == "A3":
        for a, b in zip(pos, neg):
            add(f"(1/x-1){g.labels[a]}", a, t - 1)
            add(f"(1/x-1){g.labels[b]}", b, t - 1)
        for q in range(g.rank):
            add(f"(1/x-1){g.labels[g.h(q + 1)]}", g.h(q + 1), t - 1)
        tail = (one - LaurentPoly({1: 1})) * (one - LaurentPoly({1: 1})) * LaurentPoly({-2: 1})
    elif name == "A4":
        m1, m2 = case.m1, case.m2
        for a, b in zip(pos, neg):
            add(f"(1/x-{m1}){g.labels[a]}", a, t - m1)
            add(f"(1/x-{m2}){g.labels[b]}", b, t - m2)
        for q in range(g.rank):
            add(f"(1/x-{(m1 + m2) / 2}){g.labels[g.h(q + 1)]}", g.h(q + 1), t - (m1 + m2) / 2)
        tail = (one - LaurentPoly({1: m1})) * (one - LaurentPoly({1: m2})) * LaurentPoly({-2: 1})
    elif name in ("B1", "B2"):
        for a in pos:
            add(f"({g.labels[a]},0)", a, one)
        for b in neg:
            add(f"(0,{g.labels[b]})", b, None, fin={b: ONE})
        for q in range(g.rank):
            h = g.h(q + 1)
            add(f"({g.labels[h]},-{g.labels[h]})", h, one, fin={h: -ONE})
        tail = t if name == "B1" else one - t
    else:  # C
        for i in range(g.dim):
            add(f"eps*{g.labels[i]}", i, None, feps={i: ONE})
        tail = one
    return LagrangianPattern(case, tuple(exc), tail, g.dim, tuple(labels), tuple(notes))


def polynomial_pattern(case: CaseTag, g: LieAlgebraData, max_degree: int = 2) -> LagrangianPattern:
    """Span of the embedded b x^d, d <= max_degree (a W that meets g[x]; negative control)."""
    exc, labels = [], []
    for d in range(max_degree + 1):
        for i in range(g.dim):
            exc.append(embed_gx({i: LaurentPoly({d: 1})}, case))
            labels.append(f"{g.labels[i]}*x^{d}")
    return LagrangianPattern(case, tuple(exc), None, g.dim, tuple(labels), ("polynomial control",))


# ---------------------------------------------------------------------------
# window coordinates


class Window:
    """Coordinates on span{b x^d : lo <= d <= hi} plus the finite directions."""

    def __init__(self, g: LieAlgebraData, family: str, lo: int, hi: int):
        self.g, self.family, self.lo, self.hi = g, family, lo, hi
        self.dim = g.dim
        self.nloop = (hi - lo + 1) * g.dim
        self.nfin = {"A": 0, "B": g.dim, "C": 2 * g.dim}[family]
        self.size = self.nloop + self.nfin

    def col(self, idx: int, degree: int) -> int:
        return (degree - self.lo) * self.dim + idx

    def fin_col(self, idx: int, eps: bool = False) -> int:
        return self.nloop + (self.dim if eps else 0) + idx

    def inside(self, u: DoubleElem) -> bool:
        r = u.degree_range()
        return r is None or (r[0] >= self.lo and r[1] <= self.hi)

    def vec(self, u: DoubleElem) -> Dict[int, Fraction]:
        if not self.inside(u):
            raise WindowTooSmall(f"element leaves the window [{self.lo}, {self.hi}]", witness=u)
        v = {}
        for i, p in u.loop.items():
            for k, c in p.terms.items():
                v[self.col(i, k)] = c
        for i, c in u.fin.items():
            v[self.fin_col(i)] = c
        for i, c in u.feps.items():
            v[self.fin_col(i, True)] = c
        return v

    def elem(self, v: Mapping[int, Fraction]) -> DoubleElem:
        loop: Dict[int, Dict[int, Fraction]] = {}
        fin, feps = {}, {}
        for col, c in v.items():
            if col < self.nloop:
                d, i = divmod(col, self.dim)
                loop.setdefault(i, {})[d + self.lo] = c
            elif col < self.nloop + self.dim:
                fin[col - self.nloop] = c
            else:
                feps[col - self.nloop - self.dim] = c
        return DoubleElem(self.family, {i: LaurentPoly(t) for i, t in loop.items()}, fin, feps)

    def monomial_cols(self, lo: int, hi: int) -> List[int]:
        return [self.col(i, d) for d in range(lo, hi + 1) for i in range(self.dim)]

    def finite_cols(self) -> List[int]:
        return list(range(self.nloop, self.size))


# ---------------------------------------------------------------------------
# verification


@dataclass
class Check:
    name: str
    status: str
    witness: object = None

    def to_json_obj(self):
        return {"name": self.name, "status": self.status, "witness": self.witness}


@dataclass
class ManinReport:
    case: str
    algebra: str
    window: Tuple[int, int]
    safe_window: Tuple[int, int]
    checks: List[Check]
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def check(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_obj(self):
        return {
            "case": self.case,
            "algebra": self.algebra,
            "window": list(self.window),
            "safe_window": list(self.safe_window),
            "checks": [c.to_json_obj() for c in self.checks],
            "notes": list(self.notes),
        }


def safe_window_for(W: LagrangianPattern, lo: int, hi: int) -> Tuple[int, int]:
    if W.tail is None:
        return lo, hi
    return lo - W.tail.lo, hi


def manin_verify(W: LagrangianPattern, case: CaseTag, g: LieAlgebraData,
                 window: Tuple[int, int] = (-10, 6)) -> ManinReport:
    lo, hi = window
    if not lo < 0 < hi:
        raise WindowTooSmall(f"window must straddle 0, got {window}")
    form = FormSpec.for_case(case)
    fam = case.family
    if W.family != fam:
        raise ValueError("pattern and case belong to different doubles")
    for w in W.exceptional:
        r = w.degree_range()
        if r and (r[0] < lo or r[1] > hi):
            raise WindowTooSmall(f"generator degrees {r} exceed the window {window}", witness=w.render(g))
    if W.tail is not None and (W.tail.lo < lo or W.tail.hi > hi):
        raise WindowTooSmall(f"tail degrees exceed the window {window}")
    safe = safe_window_for(W, lo, hi)
    if safe[0] > 0:
        raise WindowTooSmall("safe window is empty")
    notes = list(W.notes) + ["scalars and parameters are rational (field QQ)"]
    checks = [
        _isotropy(W, form, g, lo, hi),
        _closure(W, g),
        _transversality(W, case, g, lo, hi, safe),
    ]
    return ManinReport(str(case), g.type, (lo, hi), safe, checks, notes)


def _isotropy(W, form, g, lo, hi) -> Check:
    gens = W.generators_in_window(lo, hi)
    n_exc = len(W.exceptional)
    pairs = [(a, b) for a in range(len(gens)) for b in range(a, len(gens))]

    def one(pair):
        a, b = pair
        val = canonical_pair(gens[a][1], gens[b][1], form, g)
        return None if val == 0 else (gens[a][0], gens[b][0], frac_str(val))

    bad = [r for r in pmap(one, pairs) if r is not None]
    if bad:
        a, b, v = bad[0]
        return Check("isotropy", "fail", {"pair": [a, b], "value": v, "count": len(bad)})
    return Check("isotropy", "pass", None)


def _closure(W: LagrangianPattern, g) -> Check:
    if W.tail is not None and not W.exact:
        return Check("subalgebra", "fail", {"reason": "pattern not inside g[1/x]; exact closure unavailable"})
    items = []
    exc = list(zip(W.labels, W.exceptional))
    for (la_, a), (lb, b) in itertools.combinations_with_replacement(exc, 2):
        items.append(("exc", la_, lb, a, b))
    if W.tail is not None:
        # [w, q b] and [q a, q b]: the bracket is C[1/x]-linear on pure loop
        # elements, so these cover the whole tail
        for lab, w in exc:
            for idx in range(W.dim):
                items.append(("tail", lab, f"tail*{g.labels[idx]}", w, W.tail_generator(0, idx)))
        for i, j in itertools.combinations_with_replacement(range(W.dim), 2):
            items.append(("tail", f"tail*{g.labels[i]}", f"tail*{g.labels[j]}",
                          W.tail_generator(0, i), W.tail_generator(0, j)))

    def one(item):
        kind, la_, lb, a, b = item
        br = double_bracket(a, b, g)
        if kind == "tail":
            red = W._reduce(br)
            ok = red is not None and not red[0]
        else:
            ok = W.contains(br)[0]
        return None if ok else {"pair": [la_, lb], "bracket": br.render(g)}

    bad = [r for r in pmap(one, items) if r is not None]
    if bad:
        w = dict(bad[0])
        w["count"] = len(bad)
        return Check("subalgebra", "fail", w)
    return Check("subalgebra", "pass", None)


def _transversality(W, case, g, lo, hi, safe) -> Check:
    win = Window(g, case.family, lo, hi)
    gx = [embed_gx({i: LaurentPoly({d: 1})}, case) for d in range(0, hi + 1) for i in range(g.dim)]
    wg = [w for _, w in W.generators_in_window(lo, hi)]
    rows = [win.vec(u) for u in gx] + [win.vec(w) for w in wg]
    dep = la.left_nullspace(rows, win.size)
    if dep:
        c = dep[0]
        part = DoubleElem(case.family)
        for k, v in sorted(c.items()):
            if k < len(gx):
                part = part + gx[k].scale(v)
        return Check("transversality", "fail",
                     {"reason": "W meets g[x]", "common_element": part.render(g), "dependencies": len(dep)})
    targets = win.monomial_cols(safe[0], safe[1]) + win.finite_cols()
    base_rank = len(rows)
    if la.rank(rows + [{c: ONE} for c in targets], win.size) != base_rank:
        basis = la.span_basis(rows, win.size)
        missing = next(c for c in targets if la.in_span(basis, win.size, {c: ONE}) is None)
        el = win.elem({missing: ONE})
        return Check("transversality", "fail", {"reason": "not spanned", "monomial": el.render(g)})
    return Check("transversality", "pass", None)


# ---------------------------------------------------------------------------
# perps inside a window (family A forms)


def symmetric_window(lo: int, hi: int) -> Tuple[int, int]:
    """Degrees d for which the residue partner -1-d of x^d stays in [lo, hi]."""
    return max(lo, -1 - hi), min(hi, -1 - lo)


@dataclass
class PerpResult:
    basis: List[DoubleElem]
    safe_window: Tuple[int, int]
    multiplier_identity: Optional[bool] = None
    biduality: Optional[bool] = None


def _loop_window(g, lo, hi):
    return Window(g, "A", lo, hi)


def perp_in_window(V: Sequence[DoubleElem], form: FormSpec, g: LieAlgebraData,
                   window: Tuple[int, int]) -> Tuple[List[Dict[int, Fraction]], Window]:
    """Kernel of the pairing of V against the safe-window monomials (coords in that window)."""
    S = symmetric_window(*window)
    if S[0] > S[1]:
        raise WindowTooSmall("empty safe window")
    win = _loop_window(g, S[0], S[1])
    mons = [(i, d) for d in range(S[0], S[1] + 1) for i in range(g.dim)]
    rows = []
    for v in V:
        row = {}
        for i, d in mons:
            val = canonical_pair(v, DoubleElem.mono("A", i, d), form, g)
            if val:
                row[win.col(i, d)] = val
        rows.append(row)
    return la.nullspace(rows, win.size) if rows else [{c: ONE} for c in range(win.size)], win


def perp_window(V: Sequence[DoubleElem], form: FormSpec, g: LieAlgebraData,
                window: Tuple[int, int] = (-10, 6)) -> PerpResult:
    """Orthogonal of V (given inside the window) within the safe window.

    Also checks that the perp under the weighted form equals p(x) times the
    perp under the plain residue form (p = 1/weight), modulo degrees above
    the safe window.
    """
    if form.family != "A":
        raise ValueError("perp_window handles the loop forms of family A")
    lo, hi = window
    win_full = _loop_window(g, lo, hi)
    for v in V:
        win_full.vec(v)  # raises WindowTooSmall if v leaves the window
    K, win = perp_in_window(V, form, g, window)
    plain = FormSpec.for_case(CaseTag("A1"))
    K0, _ = perp_in_window(V, plain, g, window)
    # p has only nonnegative powers, so multiplying by it pushes support
    # upward; dropping degrees above the safe window does not change any
    # pairing with V, so both sides are compared after that projection
    p = form.inverse_weight()
    K0_scaled = []
    for k in K0:
        prod = win.elem(k).mul_loop(p)
        kept = {i: LaurentPoly({d: c for d, c in f.terms.items() if d <= win.hi}) for i, f in prod.loop.items()}
        K0_scaled.append(win.vec(DoubleElem("A", kept)))
    mult_ok = la.same_span(K, K0_scaled, win.size)
    basis = [win.elem(k) for k in la.span_basis(K, win.size)]
    return PerpResult(basis, (win.lo, win.hi), mult_ok)


def biduality_check(V: Sequence[DoubleElem], form: FormSpec, g: LieAlgebraData,
                    window: Tuple[int, int] = (-10, 6)) -> bool:
    """perp(perp(V)) == V, both restricted to the safe window."""
    res = perp_window(V, form, g, window)
    S = res.safe_window
    K2, win = perp_in_window(res.basis, form, g, window)
    full = _loop_window(g, *window)
    Vs = la.intersect_coordinate([full.vec(v) for v in V], full.size, set(full.monomial_cols(*S)))
    Vs_in_S = [win.vec(full.elem(v)) for v in Vs]
    return la.same_span(Vs_in_S, K2, win.size)


# ---------------------------------------------------------------------------
# classification of 1/a(x)


@dataclass(frozen=True)
class AClass:
    case: str
    scale: Optional[Fraction] = None   # c with p(c x) equal to the representative (A2, A3)
    j: Optional[Fraction] = None       # b1^2 / b2 for A4
    discriminant: Optional[Fraction] = None

    def __str__(self):
        if self.case == "A4":
            return f"A4, j={self.j.numerator}/{self.j.denominator}" if self.j.denominator != 1 \
                else f"A4, j={self.j.numerator}"
        return self.case


def classify_a_poly(p) -> AClass:
    """Class of p = 1/a(x) (constant term 1, degree <= 2) up to x -> c x."""
    if isinstance(p, MultiPoly):
        pt = p.trim()
        if len(pt.variables) > 1:
            raise BadDegree("expected a univariate polynomial")
        coeffs = [ZERO] * (pt.total_degree() + 1 if pt.terms else 1)
        for e, c in pt.terms.items():
            coeffs[e[0] if e else 0] = c
    else:
        coeffs = [Q(c) for c in p]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs or coeffs[0] != 1:
        raise BadConstantTerm(f"p(0) must be 1, got {coeffs[0] if coeffs else 0}")
    deg = len(coeffs) - 1
    if deg > 2:
        raise BadDegree(f"degree {deg} > 2")
    if deg == 0:
        return AClass("A1")
    b1 = coeffs[1]
    if deg == 1:
        return AClass("A2", scale=-1 / b1)
    b2 = coeffs[2]
    disc = b1 * b1 - 4 * b2
    if disc == 0:
        return AClass("A3", scale=-2 / b1, discriminant=disc)
    return AClass("A4", j=b1 * b1 / b2, discriminant=disc)


# ---------------------------------------------------------------------------
# Cartan involution on W_4


def involution_on_W(W: LagrangianPattern, sigma: BasisAutomorphism, g: LieAlgebraData,
                    target: Optional[Tuple[Fraction, Fraction]] = None) -> LagrangianPattern:
    """sigma(W) for an A4 pattern, checked equal to build_W(A4(m2, m1)).

    ``target`` overrides the expected (m1, m2); a wrong target raises
    MismatchWitness naming a generator that is not contained.
    """
    if W.case.name != "A4":
        raise ValueError("involution_on_W applies to A4 patterns")
    img = W.apply(sigma)
    m1, m2 = (W.case.m2, W.case.m1) if target is None else (Q(target[0]), Q(target[1]))
    ref = build_W(CaseTag("A4", m1, m2), g)
    if img.tail != ref.tail:
        raise MismatchWitness("tails differ", witness={"tail": str(img.tail), "expected": str(ref.tail)})
    for lab, w in zip(img.labels, img.exceptional):
        if not ref.contains(w)[0]:
            raise MismatchWitness(f"{lab} is not in W4({m1},{m2})", witness={"generator": lab,
                                                                             "element": w.render(g)})
    for lab, w in zip(ref.labels, ref.exceptional):
        if not img.contains(w)[0]:
            raise MismatchWitness(f"{lab} is not in the image", witness={"generator": lab,
                                                                         "element": w.render(g)})
    return LagrangianPattern(ref.case, img.exceptional, img.tail, img.dim, img.labels, img.notes)
