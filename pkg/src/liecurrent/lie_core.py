"""
Split simple Lie algebras of rank <= 2 with a root-graded basis, their
invariant forms, the Casimir tensor, the Drinfeld-Jimbo tensor, the Cartan
involution, and polynomial-valued tensors in two or three legs.

Algebras are realized as matrix algebras with a diagonal Cartan subalgebra:

    A1  sl(2)                    2x2
    A2  sl(3)                    3x3
    B2  sp(4) (= so(5))          4x4, X^T J + J X = 0
    G2  derivations of the split 3-form on a 7-dim space

From the matrices a Chevalley basis (E_b, H_i, F_b) with integral structure
constants is built, then rescaled diagonally so that K(e_a, e_-a) = 1 for
every root a, with h_i = [e_ai, e_-ai].
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Sequence, Tuple

from . import _linalg as la
from .errors import BadLeg, ExtensionFailure, UnsupportedType
from .exact_arith import ONE, ZERO, MultiPoly, Q, frac_str, parse_frac

SUPPORTED = ("A1", "A2", "B2", "G2")
ALIASES = {"sl2": "A1", "sl3": "A2", "sp4": "B2", "so5": "B2", "b2": "B2", "g2": "G2",
           "a1": "A1", "a2": "A2"}

Vec = Dict[int, Fraction]


def normalize_type(name: str) -> str:
    key = name.strip()
    if key in SUPPORTED:
        return key
    if key.lower() in ALIASES:
        return ALIASES[key.lower()]
    raise UnsupportedType(f"unsupported algebra {name!r}; choose from {', '.join(SUPPORTED)}")


# ---------------------------------------------------------------------------
# small dense matrices over Q


def _mzero(n):
    return [[ZERO] * n for _ in range(n)]


def _mmul(a, b):
    n = len(a)
    out = _mzero(n)
    for i in range(n):
        ai = a[i]
        for k in range(n):
            if ai[k]:
                bk = b[k]
                aik = ai[k]
                row = out[i]
                for j in range(n):
                    if bk[j]:
                        row[j] += aik * bk[j]
    return out


def _mcomm(a, b):
    ab, ba = _mmul(a, b), _mmul(b, a)
    return [[ab[i][j] - ba[i][j] for j in range(len(a))] for i in range(len(a))]


def _mscale(a, c):
    return [[v * c for v in row] for row in a]


def _madd(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def _unit(n, i, j):
    m = _mzero(n)
    m[i][j] = ONE
    return m


def _flat(m):
    return [v for row in m for v in row]


# ---------------------------------------------------------------------------
# matrix realizations


def _realization(kind: str):
    """Return (n, weights of the standard basis vectors, constraint).

    ``constraint(X)`` returns a list of linear forms that must vanish for X
    to lie in the algebra.
    """
    if kind == "A1":
        return 2, [(1,), (-1,)], lambda X: [X[0][0] + X[1][1]]
    if kind == "A2":
        return 3, [(1, 0), (0, 1), (-1, -1)], lambda X: [X[0][0] + X[1][1] + X[2][2]]
    if kind == "B2":
        n = 4
        J = [[ZERO] * 4 for _ in range(4)]
        J[0][2] = J[1][3] = ONE
        J[2][0] = J[3][1] = -ONE

        def sp(X):
            Xt = [[X[j][i] for j in range(n)] for i in range(n)]
            return _flat(_madd(_mmul(Xt, J), _mmul(J, X)))

        return n, [(1, 0), (0, 1), (-1, 0), (0, -1)], sp
    if kind == "G2":
        # basis p1 p2 p3 m1 m2 m3 z ; weights e1, e2, e3=-e1-e2, negatives, 0
        w = [(1, 0), (0, 1), (-1, -1), (-1, 0), (0, -1), (1, 1), (0, 0)]
        phi = {}

        def put(a, b, c, v):
            for perm, sgn in _perms3():
                key = tuple((a, b, c)[p] for p in perm)
                phi[key] = phi.get(key, ZERO) + sgn * v

        put(0, 1, 2, ONE)
        put(3, 4, 5, ONE)
        for i in range(3):
            put(i, 3 + i, 6, ONE)

        def deriv(X):
            out = []
            for a, b, c in itertools.combinations(range(7), 3):
                s = ZERO
                for d in range(7):
                    if X[d][a]:
                        s += X[d][a] * phi.get((d, b, c), ZERO)
                    if X[d][b]:
                        s += X[d][b] * phi.get((a, d, c), ZERO)
                    if X[d][c]:
                        s += X[d][c] * phi.get((a, b, d), ZERO)
                out.append(s)
            return out

        return 7, w, deriv
    raise UnsupportedType(kind)


def _perms3():
    return [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
            ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]


_EXPECTED_DIM = {"A1": 3, "A2": 8, "B2": 10, "G2": 14}
_EXPECTED_CARTAN = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "B2": ((2, -1), (-2, 2)),   # alpha1 long, alpha2 short
    "G2": ((2, -3), (-1, 2)),   # alpha1 short, alpha2 long
}


def _root_spaces(kind):
    """Weight decomposition of the matrix algebra: ({weight: matrix}, cartan mats, n)."""
    n, w, constraint = _realization(kind)
    rank = len(w[0])
    groups: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for a in range(n):
        for b in range(n):
            lam = tuple(w[a][k] - w[b][k] for k in range(rank))
            groups.setdefault(lam, []).append((a, b))
    spaces = {}
    for lam, units in sorted(groups.items()):
        if all(v == 0 for v in lam):
            continue
        cols = [constraint(_unit(n, a, b)) for a, b in units]
        m = len(cols[0])
        rows = [[cols[k][r] for k in range(len(units))] for r in range(m)]
        ker = la.nullspace(rows, len(units))
        if not ker:
            continue
        if len(ker) != 1:
            raise ExtensionFailure(f"weight {lam} has multiplicity {len(ker)}")
        X = _mzero(n)
        for k, c in ker[0].items():
            a, b = units[k]
            X[a][b] = c
        spaces[lam] = X
    cartan = []
    for k in range(rank):
        H = _mzero(n)
        for a in range(n):
            H[a][a] = Fraction(w[a][k])
        if any(constraint(H)):
            raise ExtensionFailure("diagonal torus does not lie in the algebra")
        cartan.append(H)
    if len(spaces) + rank != _EXPECTED_DIM[kind]:
        raise ExtensionFailure(f"{kind}: got dimension {len(spaces) + rank}")
    return spaces, cartan, n


def _order_simple(kind, simple, length):
    """Order simple roots to match the Bourbaki Cartan matrix of ``kind``."""
    if kind in ("B2",):
        return sorted(simple, key=lambda r: -length[r])   # long first
    if kind in ("G2",):
        return sorted(simple, key=lambda r: length[r])    # short first
    if kind == "A2":
        return sorted(simple, reverse=True)
    return list(simple)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class RootSystemData:
    type: str
    rank: int
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    positive_roots: Tuple[Tuple[int, ...], ...]
    highest_root: Tuple[int, ...]
    marks: Tuple[int, ...]                      # k_0 .. k_rank
    inner: Tuple[Tuple[Fraction, ...], ...]     # <a_p, a_q> for p, q in 0..rank (a_0 = -highest)

    def vertex_vector(self, p: int) -> Tuple[int, ...]:
        """Simple-root coordinates of extended-diagram vertex p."""
        if p == 0:
            return tuple(-c for c in self.highest_root)
        return tuple(1 if j == p - 1 else 0 for j in range(self.rank))

    @property
    def extended_diagram(self):
        """Edges (p, q, <a_p, a_q>) with nonzero inner product, p < q."""
        out = []
        for p in range(self.rank + 1):
            for q in range(p + 1, self.rank + 1):
                if self.inner[p][q]:
                    out.append((p, q, self.inner[p][q]))
        return out


class LieAlgebraData:
    """Basis, structure constants and invariant forms of a simple Lie algebra.

    Basis order: positive root vectors (by height), Cartan h_1..h_rank,
    negative root vectors (same order as the positive ones).
    """

    def __init__(self, type_, labels, grades, struct, killing, normalized_form, roots,
                 rank, chevalley_scale=None):
        self.type = type_
        self.labels = tuple(labels)
        self.grades = tuple(tuple(g) for g in grades)
        self.dim = len(labels)
        self.rank = rank
        # struct[(i, j)] = {k: c}  meaning [b_i, b_j] = sum_k c b_k, stored for all i != j
        self.struct: Dict[Tuple[int, int], Dict[int, Fraction]] = struct
        self.killing = tuple(tuple(r) for r in killing)
        self.normalized_form = tuple(tuple(r) for r in normalized_form)
        self.roots = roots
        self.chevalley_scale = chevalley_scale
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._root_index = {g: i for i, g in enumerate(self.grades) if any(g)}

    # -- lookup
    def index(self, label: str) -> int:
        aliases = {}
        if self.type == "A1":
            aliases = {"e": "e[1]", "f": "e[-1]", "h": "h1"}
        return self._index[aliases.get(label, label)]

    def e(self, root) -> int:
        """Index of the root vector for ``root`` (simple-root coordinates)."""
        if isinstance(root, int):
            root = (root,)
        return self._root_index[tuple(root)]

    def h(self, i: int) -> int:
        """Index of h_{alpha_i}, i = 1..rank."""
        return self.cartan_indices[i - 1]

    @cached_property
    def cartan_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.grades) if not any(g))

    @cached_property
    def positive_indices(self) -> Tuple[int, ...]:
        return tuple(self._root_index[r] for r in self.roots.positive_roots)

    @cached_property
    def negative_indices(self) -> Tuple[int, ...]:
        return tuple(self._root_index[tuple(-c for c in r)] for r in self.roots.positive_roots)

    def opposite(self, i: int) -> int:
        return self._root_index[tuple(-c for c in self.grades[i])]

    def alpha_coefficient(self, i: int, vertex: int) -> int:
        """Coefficient of alpha_vertex in the grade of basis element i."""
        return self.grades[i][vertex - 1]

    # -- bracket
    def bracket(self, i: int, j: int) -> Dict[int, Fraction]:
        return self.struct.get((i, j), {})

    def bracket_vec(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            if not a:
                continue
            for j, b in v.items():
                if not b:
                    continue
                for k, c in self.struct.get((i, j), {}).items():
                    s = out.get(k, ZERO) + a * b * c
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
        return out

    def form(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction], which="normalized") -> Fraction:
        G = self.normalized_form if which == "normalized" else self.killing
        s = ZERO
        for i, a in u.items():
            for j, b in v.items():
                if G[i][j]:
                    s += a * b * G[i][j]
        return s

    @cached_property
    def form_inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        inv = la.inverse([list(r) for r in self.normalized_form], self.dim)
        return tuple(tuple(r) for r in inv)

    def dual_vector(self, i: int) -> Vec:
        """b^i with <b_j, b^i> = delta_ij under the normalized form."""
        return {j: c for j, c in enumerate(self.form_inverse[i]) if c}

    def ad_matrix(self, i: int) -> List[List[Fraction]]:
        m = [[ZERO] * self.dim for _ in range(self.dim)]
        for j in range(self.dim):
            for k, c in self.struct.get((i, j), {}).items():
                m[k][j] = c
        return m

    def root_value(self, root: Sequence[int], cartan_pos: int) -> Fraction:
        """root(h_{cartan_pos}) computed from the simple-root values."""
        i = self.h(cartan_pos)
        total = ZERO
        for p, c in enumerate(root):
            if c:
                ep = self.e(tuple(1 if q == p else 0 for q in range(self.rank)))
                total += c * self.struct.get((i, ep), {}).get(ep, ZERO)
        return total

    def __repr__(self):
        return f"LieAlgebraData({self.type}, dim={self.dim})"

    # -- serialization
    def to_json_obj(self):
        consts = []
        for (i, j), row in sorted(self.struct.items()):
            if i < j:
                for k, c in sorted(row.items()):
                    consts.append([i, j, k, frac_str(c)])
        return {
            "type": self.type,
            "basis": list(self.labels),
            "grades": [list(g) for g in self.grades],
            "structure_constants": consts,
            "killing": [[frac_str(c) for c in r] for r in self.killing],
            "normalized_form": [[frac_str(c) for c in r] for r in self.normalized_form],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"


def algebra_from_json(text_or_obj) -> LieAlgebraData:
    """Rebuild an algebra from its exported JSON (roots recomputed from the type)."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    ref = build_algebra(obj["type"])
    struct: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for i, j, k, c in obj["structure_constants"]:
        c = parse_frac(c)
        struct.setdefault((i, j), {})[k] = c
        struct.setdefault((j, i), {})[k] = -c
    g = LieAlgebraData(
        obj["type"], obj["basis"], obj["grades"], struct,
        [[parse_frac(c) for c in r] for r in obj["killing"]],
        [[parse_frac(c) for c in r] for r in obj["normalized_form"]],
        ref.roots, ref.rank,
    )
    return g


# ---------------------------------------------------------------------------
# construction


_CACHE: Dict[str, LieAlgebraData] = {}


def build_algebra(type_: str) -> LieAlgebraData:
    kind = normalize_type(type_)
    if kind not in _CACHE:
        _CACHE[kind] = _build(kind)
    return _CACHE[kind]


def _solve_int_coords(vec, simple):
    rows = [[Fraction(s[k]) for s in simple] for k in range(len(vec))]
    sol = la.solve(rows, len(simple), [Fraction(v) for v in vec])
    if sol is None or any(c.denominator != 1 for c in sol):
        raise ExtensionFailure(f"{vec} is not an integral combination of simple roots")
    return tuple(int(c) for c in sol)


def _build(kind: str) -> LieAlgebraData:
    spaces, cartan_mats, n = _root_spaces(kind)
    rank = len(cartan_mats)
    weights = list(spaces)

    # Killing form on the torus: K(H_a, H_b) = sum over roots lam_a lam_b
    KH = [[sum((Fraction(l[a] * l[b]) for l in weights), ZERO) for b in range(rank)] for a in range(rank)]
    KH_inv = la.inverse(KH, rank)

    def ip(l1, l2):
        return sum((l1[a] * KH_inv[a][b] * l2[b] for a in range(rank) for b in range(rank)), ZERO)

    func = [100 ** (rank - 1 - k) for k in range(rank)]
    pos = [l for l in weights if sum(f * c for f, c in zip(func, l)) > 0]
    pos_set = set(pos)
    simple = [l for l in pos if not any(tuple(a - b for a, b in zip(l, m)) in pos_set for m in pos)]
    length = {s: ip(s, s) for s in simple}
    simple = _order_simple(kind, simple, length)
    if len(simple) != rank:
        raise ExtensionFailure("simple root count mismatch")

    coords = {l: _solve_int_coords(l, simple) for l in weights}
    pos_coords = sorted((coords[l] for l in pos), key=lambda c: (sum(c), tuple(-x for x in c)))
    by_coord = {coords[l]: l for l in weights}

    # Cartan matrix a_ij = 2 <a_i, a_j> / <a_i, a_i>   (Bourbaki: row i, column j)
    cm = tuple(tuple(int(2 * ip(simple[i], simple[j]) / ip(simple[i], simple[i])) for j in range(rank))
               for i in range(rank))
    if cm != _EXPECTED_CARTAN[kind]:
        raise ExtensionFailure(f"{kind}: Cartan matrix {cm} differs from the expected one")

    # Chevalley generators
    def unit_coord(i):
        return tuple(1 if j == i else 0 for j in range(rank))

    E: Dict[Tuple[int, ...], list] = {}
    F: Dict[Tuple[int, ...], list] = {}
    Hc: List[list] = []
    for i in range(rank):
        lam = simple[i]
        Ei = spaces[lam]
        Fi = spaces[tuple(-c for c in lam)]
        Hi = _mcomm(Ei, Fi)
        # coroot normalization: alpha_i(H_i) = 2  where [H, E_i] = alpha_i(H) E_i
        comm = _mcomm(Hi, Ei)
        ratio = _ratio(comm, Ei)
        Fi = _mscale(Fi, Fraction(2) / ratio)
        Hi = _mcomm(Ei, Fi)
        E[unit_coord(i)], F[unit_coord(i)] = Ei, Fi
        Hc.append(Hi)

    def root_set():
        return set(coords.values())

    roots_all = root_set()
    for beta in pos_coords:
        if beta in E:
            continue
        for i in range(rank):
            gamma = tuple(b - (1 if j == i else 0) for j, b in enumerate(beta))
            if gamma in E:
                p = 0
                while tuple(g - (p + 1 if j == i else 0) for j, g in enumerate(gamma)) in roots_all:
                    p += 1
                E[beta] = _mscale(_mcomm(E[unit_coord(i)], E[gamma]), Fraction(1, p + 1))
                F[beta] = _mscale(_mcomm(F[unit_coord(i)], F[gamma]), Fraction(-1, p + 1))
                break
        else:
            raise ExtensionFailure(f"cannot reach root {beta}")

    # basis: positives, cartan, negatives
    basis_mats = [E[b] for b in pos_coords] + Hc + [F[b] for b in pos_coords]
    grades = list(pos_coords) + [(0,) * rank] * rank + [tuple(-c for c in b) for b in pos_coords]
    dim = len(basis_mats)
    labels = ([f"e[{','.join(map(str, b))}]" for b in pos_coords]
              + [f"h{i + 1}" for i in range(rank)]
              + [f"e[{','.join(str(-c) for c in b)}]" for b in pos_coords])
    grade_index: Dict[Tuple[int, ...], int] = {g: k for k, g in enumerate(grades) if any(g)}
    cartan_idx = list(range(len(pos_coords), len(pos_coords) + rank))

    # structure constants of the Chevalley basis
    diag_rows = [[H[a][a] for H in Hc] for a in range(n)]

    def decompose(M, grade):
        if any(grade):
            if grade not in grade_index:
                if any(v for row in M for v in row):
                    raise ExtensionFailure("bracket leaves the algebra")
                return {}
            k = grade_index[grade]
            r = _ratio(M, basis_mats[k], allow_zero=True)
            return {k: r} if r else {}
        sol = la.solve(diag_rows, rank, [M[a][a] for a in range(n)])
        if sol is None:
            raise ExtensionFailure("diagonal bracket outside the torus")
        return {cartan_idx[q]: c for q, c in enumerate(sol) if c}

    struct_ch: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            gr = tuple(a + b for a, b in zip(grades[i], grades[j]))
            row = decompose(_mcomm(basis_mats[i], basis_mats[j]), gr)
            if row:
                struct_ch[(i, j)] = row
                struct_ch[(j, i)] = {k: -c for k, c in row.items()}
    for row in struct_ch.values():
        for c in row.values():
            if c.denominator != 1:
                raise ExtensionFailure("Chevalley structure constants are not integral")

    killing_ch = _killing(struct_ch, dim)

    # diagonal rescaling: e_a = E_a, e_-a = F_a / K(E_a, F_a), h_i = H_i / K(E_i, F_i)
    npos = len(pos_coords)
    scale = [ONE] * dim
    for k in range(npos):
        kf = killing_ch[k][npos + rank + k]
        scale[npos + rank + k] = 1 / kf
    for q in range(rank):
        ei = grade_index[unit_coord(q)]
        fi = grade_index[tuple(-c for c in unit_coord(q))]
        scale[cartan_idx[q]] = 1 / killing_ch[ei][fi]
    struct: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for (i, j), row in struct_ch.items():
        new = {k: scale[i] * scale[j] * c / scale[k] for k, c in row.items()}
        struct[(i, j)] = new
    killing = [[killing_ch[i][j] * scale[i] * scale[j] for j in range(dim)] for i in range(dim)]
    # invariant form with <e_a, e_-a> = 1; fixed up to scalar, so compute the scalar
    s = killing[0][npos + rank]
    normalized = [[c / s for c in r] for r in killing]

    # marks and extended diagram
    highest = pos_coords[-1]
    marks = (1,) + tuple(highest)
    simple_ip = [[ip(simple[i], simple[j]) for j in range(rank)] for i in range(rank)]
    # <a, b> is the Killing pairing on the dual of the torus (= K(h_a, h_b) after rescaling)
    verts = [tuple(-c for c in highest)] + [unit_coord(i) for i in range(rank)]

    def ipc(c1, c2):
        return sum((c1[i] * simple_ip[i][j] * c2[j] for i in range(rank) for j in range(rank)), ZERO)

    inner = tuple(tuple(ipc(a, b) for b in verts) for a in verts)
    roots = RootSystemData(kind, rank, cm, tuple(pos_coords), tuple(highest), marks, inner)

    g = LieAlgebraData(kind, labels, grades, struct, killing, normalized, roots, rank,
                       chevalley_scale=tuple(scale))
    g.chevalley_struct = struct_ch
    return g


def _ratio(M, B, allow_zero=False):
    """The scalar c with M = c*B (B nonzero)."""
    n = len(B)
    c = None
    for a in range(n):
        for b in range(n):
            if B[a][b]:
                c = M[a][b] / B[a][b]
                break
        if c is not None:
            break
    for a in range(n):
        for b in range(n):
            if M[a][b] != c * B[a][b]:
                raise ExtensionFailure("matrix is not proportional to the basis element")
    if not c and not allow_zero:
        raise ExtensionFailure("unexpected zero bracket")
    return c


def _killing(struct, dim):
    ad = []
    for i in range(dim):
        m = [[ZERO] * dim for _ in range(dim)]
        for j in range(dim):
            for k, c in struct.get((i, j), {}).items():
                m[k][j] = c
        ad.append(m)
    K = [[ZERO] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            A, B = ad[i], ad[j]
            t = ZERO
            for a in range(dim):
                Aa = A[a]
                for b in range(dim):
                    if Aa[b] and B[b][a]:
                        t += Aa[b] * B[b][a]
            K[i][j] = K[j][i] = t
    return K


# ---------------------------------------------------------------------------
# tensors


def _poly_vars(legs):
    return ("x", "y") if legs == 2 else ("x", "y", "z")


class TensorElem:
    """Sum of basis tensors b_i (x) b_j [(x) b_k] with polynomial coefficients."""

    __slots__ = ("legs", "variables", "terms")

    def __init__(self, legs: int, terms: Mapping | None = None, variables=None):
        if legs not in (2, 3):
            raise BadLeg(f"tensors have 2 or 3 legs, got {legs}")
        self.legs = legs
        self.variables = tuple(variables) if variables else _poly_vars(legs)
        out: Dict[Tuple[int, ...], MultiPoly] = {}
        if terms:
            for key, p in terms.items():
                key = tuple(key)
                if len(key) != legs:
                    raise BadLeg(f"index {key} does not have {legs} legs")
                if not isinstance(p, MultiPoly):
                    p = MultiPoly.const(p, self.variables)
                else:
                    p = p.align(self.variables)
                if key in out:
                    p = out[key] + p
                if p.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = p
        self.terms = out

    @classmethod
    def _raw(cls, legs, variables, terms):
        t = cls.__new__(cls)
        t.legs, t.variables, t.terms = legs, variables, terms
        return t

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def __add__(self, other: "TensorElem"):
        if other.legs != self.legs:
            raise BadLeg("leg count mismatch")
        out = dict(self.terms)
        for k, p in other.terms.items():
            p = p.align(self.variables)
            if k in out:
                s = out[k] + p
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = p
        return TensorElem._raw(self.legs, self.variables, out)

    def __neg__(self):
        return TensorElem._raw(self.legs, self.variables, {k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TensorElem":
        """Multiply by a scalar or a polynomial."""
        if isinstance(c, MultiPoly):
            c = c.align(self.variables)
            out = {}
            for k, p in self.terms.items():
                q = p * c
                if not q.is_zero():
                    out[k] = q
            return TensorElem._raw(self.legs, self.variables, out)
        c = Q(c)
        if not c:
            return TensorElem._raw(self.legs, self.variables, {})
        return TensorElem._raw(self.legs, self.variables, {k: p.scale(c) for k, p in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TensorElem):
            return NotImplemented
        return self.legs == other.legs and (self - other).is_zero()

    def __hash__(self):
        return hash((self.legs, tuple(sorted(self.terms))))

    def swap(self) -> "TensorElem":
        """Exchange the two legs (coefficients untouched)."""
        if self.legs != 2:
            raise BadLeg("swap needs a 2-leg tensor")
        return TensorElem(2, {(j, i): p for (i, j), p in self.terms.items()}, self.variables)

    def rename(self, mapping, variables=None) -> "TensorElem":
        variables = tuple(variables) if variables else self.variables
        out = {k: p.rename(mapping, variables) for k, p in self.terms.items()}
        return TensorElem(self.legs, out, variables)

    def max_degree(self) -> int:
        return max((p.total_degree() for p in self.terms.values()), default=-1)

    def min_degree(self):
        vals = [p.min_total_degree() for p in self.terms.values()]
        return min(vals) if vals else None

    def first_term(self):
        if not self.terms:
            return None
        k = min(self.terms)
        return k, self.terms[k]

    def render(self, g: LieAlgebraData | None = None, limit: int | None = None):
        """Deterministic list of [labels, poly] rows for reports."""
        rows = []
        for k, p in self.items():
            labs = [g.labels[i] for i in k] if g is not None else list(k)
            rows.append([labs, str(p)])
            if limit is not None and len(rows) >= limit:
                break
        return rows

    def __repr__(self):
        return f"TensorElem(legs={self.legs}, terms={len(self.terms)})"


def casimir_omega(g: LieAlgebraData, form: str = "killing_normalized") -> TensorElem:
    """Omega = sum_i b_i (x) b^i over dual bases of the normalized form."""
    if form not in ("killing_normalized", "normalized", "killing"):
        raise ValueError(form)
    inv = g.form_inverse if form != "killing" else la.inverse([list(r) for r in g.killing], g.dim)
    terms = {}
    for i in range(g.dim):
        for j in range(g.dim):
            if inv[i][j]:
                terms[(i, j)] = inv[i][j]
    return TensorElem(2, terms)


def cartan_dual(g: LieAlgebraData) -> List[Vec]:
    """h'_i: the Cartan basis dual to (h_1..h_rank) under the normalized form."""
    idx = g.cartan_indices
    G = [[g.normalized_form[a][b] for b in idx] for a in idx]
    inv = la.inverse(G, len(idx))
    return [{idx[b]: inv[a][b] for b in range(len(idx)) if inv[a][b]} for a in range(len(idx))]


def cartan_omega(g: LieAlgebraData) -> TensorElem:
    """Cartan part sum_i h_i (x) h'_i of the Casimir tensor."""
    terms = {}
    for q, hd in enumerate(cartan_dual(g)):
        for j, c in hd.items():
            key = (g.cartan_indices[q], j)
            terms[key] = terms.get(key, ZERO) + c
    return TensorElem(2, terms)


def drinfeld_jimbo_r(g: LieAlgebraData) -> TensorElem:
    terms = {}
    for a, b in zip(g.positive_indices, g.negative_indices):
        terms[(a, b)] = ONE
    return TensorElem(2, terms) + cartan_omega(g).scale(Fraction(1, 2))


def bracket_leg(t: TensorElem, leg: int, a, g: LieAlgebraData, side: str = "left") -> TensorElem:
    """Replace the basis element b on ``leg`` (1-based) by [a, b] (or [b, a] for side='right').

    ``a`` is a basis index or a sparse vector {index: coeff}.
    """
    if not 1 <= leg <= t.legs:
        raise BadLeg(f"leg {leg} out of range 1..{t.legs}")
    if side not in ("left", "right"):
        raise ValueError(side)
    avec = {a: ONE} if isinstance(a, int) else dict(a)
    sgn = ONE if side == "left" else -ONE
    pos = leg - 1
    out: Dict[Tuple[int, ...], MultiPoly] = {}
    for key, p in t.terms.items():
        b = key[pos]
        for ai, ac in avec.items():
            for k, c in g.struct.get((ai, b), {}).items():
                nk = key[:pos] + (k,) + key[pos + 1:]
                q = p.scale(sgn * ac * c)
                if nk in out:
                    q = out[nk] + q
                    if q.is_zero():
                        del out[nk]
                        continue
                out[nk] = q
    return TensorElem._raw(t.legs, t.variables, out)


# ---------------------------------------------------------------------------
# Cartan involution


@dataclass(frozen=True)
class BasisAutomorphism:
    """Linear map on g given by images of basis vectors."""

    images: Tuple[Tuple[Tuple[int, Fraction], ...], ...]

    def image(self, i: int) -> Vec:
        return dict(self.images[i])

    def apply(self, v: Mapping[int, Fraction]) -> Vec:
        out: Vec = {}
        for i, c in v.items():
            for k, d in self.images[i]:
                s = out.get(k, ZERO) + c * d
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return out

    def compose(self, other: "BasisAutomorphism") -> "BasisAutomorphism":
        return BasisAutomorphism(tuple(tuple(sorted(self.apply(dict(other.images[i])).items()))
                                       for i in range(len(self.images))))


def cartan_involution(g: LieAlgebraData) -> BasisAutomorphism:
    """sigma with sigma(e_ai) = e_-ai, sigma(e_-ai) = e_ai, sigma(h) = -h."""
    img: Dict[int, Vec] = {}
    for q in range(g.rank):
        unit = tuple(1 if j == q else 0 for j in range(g.rank))
        neg = tuple(-c for c in unit)
        img[g.e(unit)] = {g.e(neg): ONE}
        img[g.e(neg)] = {g.e(unit): ONE}
        img[g.h(q + 1)] = {g.h(q + 1): -ONE}
    for beta in g.roots.positive_roots:
        if g.e(beta) in img:
            continue
        for sgn in (1, -1):
            target = tuple(sgn * c for c in beta)
            done = False
            for q in range(g.rank):
                simple = tuple(sgn if j == q else 0 for j in range(g.rank))
                gamma = tuple(t - s for t, s in zip(target, simple))
                if gamma not in g._root_index or g.e(gamma) not in img:
                    continue
                br = g.bracket(g.e(simple), g.e(gamma))
                c = br.get(g.e(target))
                if not c:
                    continue
                val = g.bracket_vec(img[g.e(simple)], img[g.e(gamma)])
                img[g.e(target)] = {k: v / c for k, v in val.items()}
                done = True
                break
            if not done:
                raise ExtensionFailure(f"no bracket chain reaches {target}")
    sigma = BasisAutomorphism(tuple(tuple(sorted(img[i].items())) for i in range(g.dim)))
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            lhs = sigma.apply(g.bracket(i, j))
            rhs = g.bracket_vec(sigma.image(i), sigma.image(j))
            if lhs != rhs:
                raise ExtensionFailure(
                    f"sigma fails to respect [{g.labels[i]}, {g.labels[j]}]", witness=(i, j))
    return sigma


# ---------------------------------------------------------------------------
# checks used by tests and reports


def jacobi_violations(g: LieAlgebraData, limit=None):
    bad = []
    for a, b, c in itertools.combinations(range(g.dim), 3):
        t1 = g.bracket_vec(g.bracket(a, b), {c: ONE})
        t2 = g.bracket_vec(g.bracket(b, c), {a: ONE})
        t3 = g.bracket_vec(g.bracket(c, a), {b: ONE})
        tot: Vec = {}
        for t in (t1, t2, t3):
            for k, v in t.items():
                tot[k] = tot.get(k, ZERO) + v
        if any(tot.values()):
            bad.append((a, b, c))
            if limit and len(bad) >= limit:
                break
    return bad


def invariance_violations(g: LieAlgebraData, which="normalized"):
    bad = []
    for a in range(g.dim):
        for b in range(g.dim):
            ab = g.bracket(a, b)
            for c in range(g.dim):
                lhs = g.form(ab, {c: ONE}, which)
                rhs = g.form({a: ONE}, g.bracket(b, c), which)
                if lhs != rhs:
                    bad.append((a, b, c))
    return bad
