"""Thin exact linear algebra layer over sympy's sparse DomainMatrix (QQ).

Vectors are either dense lists of Fractions or sparse dicts {col: Fraction}.
Everything returned is converted back to ``fractions.Fraction``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Vec = Dict[int, Fraction]


def _to_qq(c):
    return QQ(c.numerator, c.denominator) if isinstance(c, Fraction) else QQ(c)


def _to_frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _sparse_row(row) -> Dict[int, object]:
    if isinstance(row, dict):
        return {j: _to_qq(v) for j, v in row.items() if v}
    return {j: _to_qq(v) for j, v in enumerate(row) if v}


def matrix(rows: Sequence, ncols: int) -> DomainMatrix:
    data = {}
    for i, row in enumerate(rows):
        r = _sparse_row(row)
        if r:
            data[i] = r
    return DomainMatrix(data, (len(rows), ncols), QQ)


def _rows_out(dm: DomainMatrix) -> List[Vec]:
    out = []
    n = dm.shape[0]
    d = dm.to_sparse().rep.to_dod() if hasattr(dm.to_sparse().rep, "to_dod") else dict(dm.to_sparse().rep)
    for i in range(n):
        out.append({j: _to_frac(v) for j, v in d.get(i, {}).items() if v})
    return out


def rank(rows: Sequence, ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    return matrix(rows, ncols).rank()


def rref(rows: Sequence, ncols: int):
    """Reduced row echelon form: (nonzero rows as sparse dicts, pivot columns)."""
    if not rows:
        return [], ()
    R, pivots = matrix(rows, ncols).rref()
    out = _rows_out(R)[: len(pivots)]
    return out, tuple(pivots)


def nullspace(rows: Sequence, ncols: int) -> List[Vec]:
    """Basis of {v : row . v = 0 for every row}."""
    if ncols == 0:
        return []
    if not rows:
        return [{j: Fraction(1)} for j in range(ncols)]
    return _rows_out(matrix(rows, ncols).nullspace())


def left_nullspace(rows: Sequence, ncols: int) -> List[Vec]:
    """Basis of coefficient vectors c with sum_i c_i row_i = 0."""
    if not rows:
        return []
    return _rows_out(matrix(rows, ncols).transpose().nullspace())


def solve(rows: Sequence, ncols: int, rhs: Sequence) -> List[Fraction] | None:
    """One solution x of A x = rhs, or None when inconsistent."""
    m = len(rows)
    aug = []
    for i, row in enumerate(rows):
        r = dict(_sparse_row(row))
        if rhs[i]:
            r[ncols] = _to_qq(rhs[i])
        aug.append(r)
    if m == 0:
        return [Fraction(0)] * ncols
    R, pivots = DomainMatrix({i: r for i, r in enumerate(aug) if r}, (m, ncols + 1), QQ).rref()
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    rr = _rows_out(R)
    for k, p in enumerate(pivots):
        x[p] = rr[k].get(ncols, Fraction(0))
    return x


def in_span(basis: Sequence, ncols: int, v) -> List[Fraction] | None:
    """Coefficients c with sum c_i basis_i = v, or None."""
    if not basis:
        vv = v if isinstance(v, dict) else dict(enumerate(v))
        return [] if not any(vv.values()) else None
    # transpose: columns are basis vectors
    cols: Dict[int, Dict[int, Fraction]] = {}
    for i, b in enumerate(basis):
        items = b.items() if isinstance(b, dict) else enumerate(b)
        for j, c in items:
            if c:
                cols.setdefault(j, {})[i] = c
    vv = v if isinstance(v, dict) else dict(enumerate(v))
    rows = [cols.get(j, {}) for j in range(ncols)]
    rhs = [vv.get(j, Fraction(0)) for j in range(ncols)]
    return solve(rows, len(basis), rhs)


def inverse(rows: Sequence, n: int) -> List[List[Fraction]]:
    """Inverse of a square matrix; raises ZeroDivisionError when singular."""
    M = matrix(rows, n)
    if M.rank() < n:
        raise ZeroDivisionError("singular matrix")
    inv = M.to_dense().inv()
    return [[_to_frac(c) for c in r] for r in inv.to_list()]


def det(rows: Sequence, n: int) -> Fraction:
    if n == 0:
        return Fraction(1)
    return _to_frac(matrix(rows, n).to_dense().det())


def span_basis(vectors: Sequence, ncols: int) -> List[Vec]:
    """Canonical (reduced echelon) basis of the span."""
    return rref(list(vectors), ncols)[0]


def same_span(a: Sequence, b: Sequence, ncols: int) -> bool:
    return span_basis(a, ncols) == span_basis(b, ncols)


def intersect_coordinate(basis: Sequence, ncols: int, keep) -> List[Vec]:
    """Basis of span(basis) intersected with the coordinate subspace on ``keep``."""
    keep = set(keep)
    if not basis:
        return []
    # find combinations sum c_i b_i vanishing outside keep
    outside = {}
    for i, b in enumerate(basis):
        items = b.items() if isinstance(b, dict) else enumerate(b)
        for j, c in items:
            if c and j not in keep:
                outside.setdefault(j, {})[i] = c
    rows = list(outside.values())
    combos = nullspace(rows, len(basis)) if rows else [{i: Fraction(1)} for i in range(len(basis))]
    out = []
    for c in combos:
        v: Vec = {}
        for i, ci in c.items():
            b = basis[i]
            items = b.items() if isinstance(b, dict) else enumerate(b)
            for j, bj in items:
                if bj:
                    s = v.get(j, Fraction(0)) + ci * bj
                    if s:
                        v[j] = s
                    else:
                        v.pop(j, None)
        out.append(v)
    return span_basis(out, ncols)
