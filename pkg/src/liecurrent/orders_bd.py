"""
Orders O_h in g((1/x)), parabolic subalgebras, F-data and Belavin-Drinfeld triples.

Elements of g((1/x)) with finite support are DoubleElem loop parts in x.
The valuation counts powers of 1/x: v(x^-3) = 3, v(x^2) = -2, v(0) = +inf.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import _linalg as la
from ._pool import pmap
from .errors import RankTooLarge, WindowTooSmall
from .exact_arith import ONE, ZERO, LaurentPoly, Q, frac_str, parse_frac
from .lie_core import LieAlgebraData
from .loop_double import DoubleElem, symmetric_window

INF = math.inf


def valuation(f: LaurentPoly) -> Union[int, float]:
    """Least k with a nonzero coefficient of x^-k; +inf for 0."""
    if f.is_zero():
        return INF
    return -f.hi


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


# ---------------------------------------------------------------------------
# orders


@dataclass(frozen=True)
class OrderSpec:
    """O_h for a simplex vertex h_i (vertex 0 is h = 0) or an explicit h.

    ``h_values[j]`` is alpha_{j+1}(h).
    """

    algebra: LieAlgebraData
    vertex: Optional[int]
    h_values: Tuple[Fraction, ...]

    @classmethod
    def at_vertex(cls, g: LieAlgebraData, vertex: int) -> "OrderSpec":
        if not 0 <= vertex <= g.rank:
            raise ValueError(f"vertex must be in 0..{g.rank}")
        k = g.roots.marks[vertex]
        vals = tuple(Fraction(1, k) if j + 1 == vertex else ZERO for j in range(g.rank))
        return cls(g, vertex, vals)

    @classmethod
    def from_h(cls, g: LieAlgebraData, h_values: Sequence) -> "OrderSpec":
        vals = tuple(Q(v) for v in h_values)
        if len(vals) != g.rank:
            raise ValueError("one value per simple root")
        return cls(g, None, vals)

    @property
    def mark(self) -> Optional[int]:
        return None if self.vertex is None else self.algebra.roots.marks[self.vertex]

    def coefficient(self, idx: int) -> int:
        """alpha_i-coefficient r of the grade of basis element idx (0 for vertex 0)."""
        if not self.vertex:
            return 0
        return self.algebra.alpha_coefficient(idx, self.vertex)

    def root_value(self, idx: int) -> Fraction:
        """beta(h) for the grade beta of basis element idx (0 on the Cartan)."""
        return sum((c * v for c, v in zip(self.algebra.grades[idx], self.h_values)), ZERO)

    def need_display(self, idx: int) -> int:
        """Least valuation allowed by the graded description of O_{alpha_i}."""
        if self.vertex is None:
            raise ValueError("the graded display exists only at simplex vertices")
        g = self.algebra
        if idx in g.cartan_indices:
            return 0
        k = self.mark
        r = self.coefficient(idx)
        if 1 <= r <= k:
            return 1
        if 1 - k <= r <= 0:
            return 0
        if r == -k:
            return -1
        raise ValueError(f"coefficient {r} outside [-{k}, {k}]")

    def need_valuation(self, idx: int) -> int:
        """Least valuation from v(f_beta) >= beta(h)."""
        if idx in self.algebra.cartan_indices:
            return 0
        return _ceil(self.root_value(idx))

    def max_degree(self, idx: int, criterion: str = "display") -> int:
        need = self.need_display(idx) if criterion == "display" else self.need_valuation(idx)
        return -need


@dataclass
class Membership:
    member: bool
    display: Optional[bool]
    valuation: bool
    witness: object = None

    @property
    def agree(self) -> bool:
        return self.display is None or self.display == self.valuation


def order_membership(f, spec: OrderSpec) -> Membership:
    loop = f.loop if isinstance(f, DoubleElem) else dict(f)
    g = spec.algebra
    wit_d = wit_v = None
    for idx in sorted(loop):
        v = valuation(loop[idx])
        if spec.vertex is not None and wit_d is None and v < spec.need_display(idx):
            wit_d = {"component": g.labels[idx], "valuation": v, "required": spec.need_display(idx)}
        if wit_v is None and v < spec.need_valuation(idx):
            wit_v = {"component": g.labels[idx], "valuation": v, "required": spec.need_valuation(idx)}
    disp = None if spec.vertex is None else wit_d is None
    val = wit_v is None
    member = disp if disp is not None else val
    return Membership(member, disp, val, wit_d if spec.vertex is not None else wit_v)


def _monomials_in_order(spec: OrderSpec, lo: int, hi: int) -> List[Tuple[int, int]]:
    g = spec.algebra
    return [(i, d) for d in range(lo, hi + 1) for i in range(g.dim) if d <= spec.max_degree(i)]


def _residue_kernel(g: LieAlgebraData, gens: Sequence[Tuple[int, int]], S: Tuple[int, int]):
    """Monomial basis of {u in span(b x^d, d in S) : Res K(u, gen) = 0 for all gens}."""
    cols = [(i, d) for d in range(S[0], S[1] + 1) for i in range(g.dim)]
    pos = {c: n for n, c in enumerate(cols)}
    G = g.normalized_form
    rows = []
    for i, d in gens:
        e = -1 - d
        if not S[0] <= e <= S[1]:
            continue
        row = {pos[(j, e)]: G[i][j] for j in range(g.dim) if G[i][j]}
        if row:
            rows.append(row)
    kernel = la.nullspace(rows, len(cols)) if rows else [{c: ONE} for c in range(len(cols))]
    return la.span_basis(kernel, len(cols)), cols


def _coord_span(mons: Sequence[Tuple[int, int]], cols) -> List[Dict[int, Fraction]]:
    pos = {c: n for n, c in enumerate(cols)}
    return la.span_basis([{pos[m]: ONE} for m in mons if m in pos], len(cols))


def display_perp(spec: OrderSpec, idx: int) -> int:
    """Top x-degree of the g_r component of the displayed perp of O_{alpha_i} (-3, -2 or -1)."""
    g = spec.algebra
    k = spec.mark
    r = 0 if idx in g.cartan_indices else spec.coefficient(idx)
    if r == k:
        return -3
    if 0 <= r <= k - 1:
        return -2
    return -1


@dataclass
class OrderPerpReport:
    algebra: str
    vertex: int
    mark: int
    window: Tuple[int, int]
    safe_window: Tuple[int, int]
    perp_matches_display: bool
    x2_identity: bool
    membership_agree: bool
    closed: bool
    biduality: bool
    witnesses: Dict[str, object] = field(default_factory=dict)

    @property
    def x2_as_expected(self) -> bool:
        return self.x2_identity == (self.mark == 1)

    @property
    def ok(self) -> bool:
        return (self.perp_matches_display and self.x2_as_expected and self.membership_agree
                and self.closed and self.biduality)

    def to_json_obj(self):
        return {
            "name": "order_perp",
            "algebra": self.algebra,
            "vertex": self.vertex,
            "mark": self.mark,
            "window": list(self.window),
            "safe_window": list(self.safe_window),
            "status": "pass" if self.ok else "fail",
            "perp_matches_display": self.perp_matches_display,
            "x2_identity": self.x2_identity,
            "membership_agree": self.membership_agree,
            "closed": self.closed,
            "biduality": self.biduality,
            "witness": self.witnesses or None,
        }


def order_perp_check(spec: OrderSpec, window: Tuple[int, int] = (-8, 6)) -> OrderPerpReport:
    """Residue-form perp of O_{alpha_i} cap g[x, 1/x] inside a window, against the display."""
    if spec.vertex is None or spec.vertex == 0:
        raise ValueError("order_perp_check needs a vertex i >= 1")
    g = spec.algebra
    lo, hi = window
    S = symmetric_window(lo, hi)
    if S[0] > -3 or S[1] < 1:
        raise WindowTooSmall(f"safe window {S} must contain degrees -3..1")
    gens = _monomials_in_order(spec, lo, hi)
    perp, cols = _residue_kernel(g, gens, S)
    wit: Dict[str, object] = {}

    expected = [(i, d) for i, d in cols if d <= display_perp(spec, i)]
    match = perp == _coord_span(expected, cols)
    if not match:
        wit["perp"] = "computed perp differs from the displayed formula"

    shifted = [(i, d - 2) for i, d in _monomials_in_order(spec, lo, hi + 2)]
    x2 = perp == _coord_span(shifted, cols)

    agree = True
    for i, d in itertools.product(range(g.dim), range(lo, hi + 1)):
        m = order_membership({i: LaurentPoly({d: 1})}, spec)
        if not m.agree:
            agree = False
            wit["membership"] = {"monomial": f"{g.labels[i]}*x^{d}"}
            break

    in_order = set(gens)

    def closure(pair):
        (i, d), (j, e) = pair
        if not lo <= d + e <= hi:
            return None
        for k in g.bracket(i, j):
            if (k, d + e) not in in_order:
                return [f"{g.labels[i]}*x^{d}", f"{g.labels[j]}*x^{e}"]
        return None

    bad = [b for b in pmap(closure, list(itertools.combinations(gens, 2))) if b is not None]
    if bad:
        wit["closure"] = bad[0]

    # perp of the perp, both inside the safe window
    perp_mons = [cols[min(v)] for v in perp if len(v) == 1]
    bi = False
    if len(perp_mons) == len(perp):
        back, _ = _residue_kernel(g, perp_mons, S)
        bi = back == _coord_span([m for m in gens if S[0] <= m[1] <= S[1]], cols)
    if not bi:
        wit["biduality"] = "perp of perp differs from the order inside the safe window"
    return OrderPerpReport(g.type, spec.vertex, spec.mark, window, S, match, x2, agree, not bad, bi, wit)


# ---------------------------------------------------------------------------
# quotient by gamma^2 = (1/x - 1)^2


@dataclass
class QuotientReport:
    algebra: str
    vertex: int
    window: Tuple[int, int]
    dimension: int
    expected_dimension: int
    representatives_independent: bool
    bracket_matches: bool
    witness: object = None

    @property
    def ok(self) -> bool:
        return (self.dimension == self.expected_dimension and self.representatives_independent
                and self.bracket_matches)

    def to_json_obj(self):
        return {"name": "gamma_quotient", "algebra": self.algebra, "vertex": self.vertex,
                "window": list(self.window), "status": "pass" if self.ok else "fail",
                "dimension": self.dimension, "expected_dimension": self.expected_dimension,
                "representatives_independent": self.representatives_independent,
                "bracket_matches": self.bracket_matches, "witness": self.witness}


def gamma_quotient_check(g: LieAlgebraData, vertex: int = 1,
                         window: Tuple[int, int] = (-8, 4)) -> QuotientReport:
    """(O cap g[x,1/x]) / x^-2 (1-x)^2 (O cap g[x,1/x]) against g[gamma], gamma^2 = 0.

    Inside the window, V is spanned by the order's monomials and U by
    (1/x - 1)^2 times those order monomials whose product stays in the
    window.  Representatives gamma^a x^-r(b) b (r = alpha_i-coefficient)
    are tested for independence modulo U, and brackets of representatives
    are compared with the g[gamma] bracket modulo U.
    """
    spec = OrderSpec.at_vertex(g, vertex)
    if spec.mark != 1:
        raise ValueError("the gamma quotient is described for vertices with mark 1")
    lo, hi = window
    cols = [(i, d) for d in range(lo, hi + 1) for i in range(g.dim)]
    pos = {c: n for n, c in enumerate(cols)}
    n = len(cols)
    gamma2 = LaurentPoly({-2: 1, -1: -2, 0: 1})
    gamma = LaurentPoly({-1: 1, 0: -1})

    def vec(loop: Mapping[int, LaurentPoly]):
        out = {}
        for i, p in loop.items():
            for d, c in p.terms.items():
                if not lo <= d <= hi:
                    raise WindowTooSmall(f"degree {d} leaves the window")
                out[pos[(i, d)]] = c
        return out

    V = [(i, d) for i, d in _monomials_in_order(spec, lo, hi)]
    U = [vec({i: gamma2.shift(d)}) for i, d in V if d - 2 >= lo]
    rank_V = len(V)
    rank_U = la.rank(U, n)
    dim = rank_V - rank_U

    def rep(i, a):
        r = 0 if i in g.cartan_indices else spec.coefficient(i)
        base = LaurentPoly({-r: 1})
        return base * gamma if a else base

    reps = [(i, a) for a in (0, 1) for i in range(g.dim)]
    rep_vecs = [vec({i: rep(i, a)}) for i, a in reps]
    indep = la.rank(U + rep_vecs, n) == rank_U + len(reps)

    witness = None
    ok = True
    for (i, a), (j, b) in itertools.product(reps, reps):
        lhs: Dict[int, LaurentPoly] = {}
        for k, c in g.bracket(i, j).items():
            lhs[k] = (rep(i, a) * rep(j, b)).scale(c)
        rhs: Dict[int, LaurentPoly] = {}
        if a + b < 2:
            for k, c in g.bracket(i, j).items():
                rhs[k] = rep(k, a + b).scale(c)
        diff = vec(lhs)
        for c_, v in vec(rhs).items():
            diff[c_] = diff.get(c_, ZERO) - v
        diff = {c_: v for c_, v in diff.items() if v}
        if diff and la.in_span(U, n, diff) is None:
            ok = False
            witness = {"pair": [f"gamma^{a}*{g.labels[i]}", f"gamma^{b}*{g.labels[j]}"]}
            break
    return QuotientReport(g.type, vertex, window, dim, 2 * g.dim, indep, ok, witness)


# ---------------------------------------------------------------------------
# parabolic subalgebras and F-data


def parabolic(g: LieAlgebraData, vertex: int) -> List[int]:
    """Basis indices of p^-: negatives, Cartan, positives without alpha_vertex."""
    if not 0 <= vertex <= g.rank:
        raise ValueError(f"vertex must be in 0..{g.rank}")
    positive = set(g.positive_indices)

    def keep(i):
        # every positive root avoids alpha_0, so vertex 0 gives all of g
        return i not in positive or vertex == 0 or g.alpha_coefficient(i, vertex) == 0

    out = [i for i in range(g.dim) if keep(i)]
    span = set(out)
    for i in out:
        for j in out:
            if not set(g.bracket(i, j)) <= span:
                raise AssertionError(f"parabolic not closed at {g.labels[i]}, {g.labels[j]}")
    return out


@dataclass
class FData:
    basis: List[Dict[int, Fraction]]          # vectors of g spanning L
    form: List[List[Fraction]]                # B on that basis

    @classmethod
    def from_json(cls, text_or_obj, g: LieAlgebraData) -> "FData":
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        basis = []
        for row in obj["basis"]:
            if isinstance(row, dict):
                basis.append({g.index(k): parse_frac(v) for k, v in row.items() if parse_frac(v)})
            else:
                basis.append({i: parse_frac(v) for i, v in enumerate(row) if parse_frac(v)})
        form = [[parse_frac(v) for v in row] for row in obj["form"]]
        return cls(basis, form)

    def to_json_obj(self, g: LieAlgebraData):
        return {"basis": [{g.labels[i]: frac_str(c) for i, c in sorted(v.items())} for v in self.basis],
                "form": [[frac_str(c) for c in row] for row in self.form]}


@dataclass
class FDataReport:
    vertex: int
    checked: bool
    subalgebra: bool
    spans_with_parabolic: bool
    skew: bool
    cocycle: bool
    nondegenerate: bool
    witnesses: Dict[str, object] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.checked and self.subalgebra and self.spans_with_parabolic and self.skew \
            and self.cocycle and self.nondegenerate

    def to_json_obj(self):
        return {"name": "f_data", "vertex": self.vertex, "status": "pass" if self.ok else "fail",
                "subalgebra": self.subalgebra, "spans_with_parabolic": self.spans_with_parabolic,
                "skew": self.skew, "cocycle": self.cocycle, "nondegenerate": self.nondegenerate,
                "witness": self.witnesses or None, "notes": self.notes}


def verify_f_data(d: FData, g: LieAlgebraData, vertex: int) -> FDataReport:
    k = g.roots.marks[vertex]
    if k != 1:
        return FDataReport(vertex, False, False, False, False, False, False, {},
                           [f"mark {k} > 1: no F-data exist at this vertex; nothing checked"])
    m = len(d.basis)
    if la.rank(d.basis, g.dim) != m:
        raise ValueError("basis vectors of L are dependent")
    if len(d.form) != m or any(len(r) != m for r in d.form):
        raise ValueError("form must be a square matrix on the basis of L")
    B = d.form
    wit: Dict[str, object] = {}

    def coords(v):
        return la.in_span(d.basis, g.dim, v)

    # subalgebra and structure constants in L coordinates
    struct = {}
    sub = True
    for a in range(m):
        for b in range(a + 1, m):
            c = coords(g.bracket_vec(d.basis[a], d.basis[b]))
            if c is None:
                sub = False
                wit.setdefault("subalgebra", {"pair": [a, b]})
                break
            struct[(a, b)] = c
            struct[(b, a)] = [-x for x in c]
        if not sub:
            break
    p = parabolic(g, vertex)
    spans = la.rank(d.basis + [{i: ONE} for i in p], g.dim) == g.dim
    skew = all(B[a][b] == -B[b][a] for a in range(m) for b in range(m))
    if not skew:
        wit["skew"] = next([a, b] for a in range(m) for b in range(m) if B[a][b] != -B[b][a])

    def bform(vec_coords, c):
        return sum((x * B[i][c] for i, x in enumerate(vec_coords)), ZERO)

    cocycle = sub
    if sub:
        zero = [ZERO] * m
        for a, b, c in itertools.combinations(range(m), 3):
            total = (bform(struct.get((a, b), zero), c) + bform(struct.get((b, c), zero), a)
                     + bform(struct.get((c, a), zero), b))
            if total:
                cocycle = False
                wit["cocycle"] = [a, b, c]
                break
    # L cap p^-: combinations of L's basis lying in the coordinate span of p^-
    inter = la.intersect_coordinate(d.basis, g.dim, set(p))
    inter_c = [coords(v) for v in inter]
    if not inter_c:
        nondeg = True
    else:
        M = [[sum((u[i] * B[i][j] * w[j] for i in range(m) for j in range(m)), ZERO) for w in inter_c]
             for u in inter_c]
        nondeg = la.det(M, len(M)) != 0
        if not nondeg:
            wit["nondegenerate"] = {"dim_intersection": len(M)}
    return FDataReport(vertex, True, sub, spans, skew, cocycle, nondeg, wit)


# ---------------------------------------------------------------------------
# Belavin-Drinfeld triples


@dataclass(frozen=True)
class BDTriple:
    gamma1: Tuple[int, ...]
    gamma2: Tuple[int, ...]
    tau: Tuple[Tuple[int, int], ...]
    v_dim: int
    s_dim: int

    def sort_key(self):
        return (self.gamma1, self.gamma2, self.tau)

    def to_json_obj(self):
        return {"gamma1": list(self.gamma1), "gamma2": list(self.gamma2),
                "tau": {str(a): b for a, b in self.tau}, "v_dim": self.v_dim, "s_dim": self.s_dim}


def _tau_admissible(g: LieAlgebraData, tau: Mapping[int, int]) -> bool:
    inner = g.roots.inner
    for a, b in itertools.product(tau, tau):
        if inner[tau[a]][tau[b]] != inner[a][b]:
            return False
    for a in tau:
        seen, cur = set(), a
        while cur in tau:
            if cur in seen:
                return False
            seen.add(cur)
            cur = tau[cur]
    return True


def _v_dim(g: LieAlgebraData, tau: Mapping[int, int]) -> int:
    R = g.roots
    rows = []
    for a, b in tau.items():
        va, vb = R.vertex_vector(a), R.vertex_vector(b)
        rows.append([Fraction(x - y) for x, y in zip(va, vb)])
    return g.rank - la.rank(rows, g.rank)


def enum_bd(g: LieAlgebraData, vertex: int) -> List[BDTriple]:
    if g.rank > 2:
        raise RankTooLarge(f"brute-force enumeration is limited to rank <= 2 (got {g.rank})")
    if not 1 <= vertex <= g.rank:
        raise ValueError(f"vertex must be in 1..{g.rank}")
    verts = list(range(g.rank + 1))
    src = [v for v in verts if v != vertex]
    dst = [v for v in verts if v != 0]
    pairs = []
    for size in range(len(src) + 1):
        for g1 in itertools.combinations(src, size):
            for g2 in itertools.combinations(dst, size):
                pairs.append((g1, g2))

    def work(pair):
        g1, g2 = pair
        out = []
        for perm in itertools.permutations(g2):
            tau = dict(zip(g1, perm))
            if _tau_admissible(g, tau):
                v = _v_dim(g, tau)
                out.append(BDTriple(g1, g2, tuple(sorted(tau.items())), v, v * (v - 1) // 2))
        return out

    triples = [t for part in pmap(work, pairs) for t in part]
    return sorted(triples, key=BDTriple.sort_key)


def verify_bd(t: BDTriple, g: LieAlgebraData, vertex: int) -> bool:
    """Re-check a triple's invariants along a separate path (inner products via Gram of vertex vectors)."""
    if vertex in t.gamma1 or 0 in t.gamma2:
        return False
    tau = dict(t.tau)
    if sorted(tau) != sorted(t.gamma1) or sorted(tau.values()) != sorted(t.gamma2):
        return False
    if len(set(tau.values())) != len(tau):
        return False
    R = g.roots
    cart = R.cartan_matrix
    # symmetrized form from the Cartan matrix: <a_p, a_q> proportional to d_p * A_pq
    lengths = [R.inner[p][p] for p in range(1, g.rank + 1)]

    def ip(u, w):
        return sum((u[p] * w[q] * lengths[p] * cart[p][q] / 2
                    for p in range(g.rank) for q in range(g.rank)), ZERO)

    vec = {p: R.vertex_vector(p) for p in range(g.rank + 1)}
    for a in tau:
        for b in tau:
            if ip(vec[tau[a]], vec[tau[b]]) != ip(vec[a], vec[b]):
                return False
    for a in tau:
        cur, steps = a, 0
        while cur in tau:
            cur = tau[cur]
            steps += 1
            if steps > len(tau):
                return False
    v = _v_dim(g, tau)
    return t.v_dim == v and t.s_dim == v * (v - 1) // 2
