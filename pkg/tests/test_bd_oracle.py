"""Brute-force Belavin-Drinfeld oracle built from hard-coded extended diagrams.

Nothing here reads the library's root data: the extended Cartan matrices,
squared lengths and highest-root coefficients are typed in by hand, and the
rank computation uses its own fraction elimination.
"""

import itertools
from fractions import Fraction

import pytest

from liecurrent.lie_core import build_algebra
from liecurrent.orders_bd import enum_bd, verify_bd

# vertex 0 is the affine node; simple roots follow the library's ordering
# (sp4: a1 long, a2 short; g2: a1 short, a2 long)
DIAGRAMS = {
    "sl2": {"cartan": [[2, -2], [-2, 2]], "length": [2, 2], "theta": [1]},
    "sl3": {"cartan": [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], "length": [2, 2, 2], "theta": [1, 1]},
    "sp4": {"cartan": [[2, 0, -1], [0, 2, -1], [-2, -2, 2]], "length": [4, 4, 2], "theta": [1, 2]},
    "g2": {"cartan": [[2, 0, -1], [0, 2, -3], [-1, -1, 2]], "length": [6, 2, 6], "theta": [3, 2]},
}


def _rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def _vector(d, p):
    r = len(d["theta"])
    if p == 0:
        return [-c for c in d["theta"]]
    return [1 if j == p - 1 else 0 for j in range(r)]


def oracle(name, vertex):
    d = DIAGRAMS[name]
    A, L = d["cartan"], d["length"]
    r = len(d["theta"])
    nodes = range(r + 1)
    found = {}
    for n1 in range(r + 1):
        for g1 in itertools.combinations([p for p in nodes if p != vertex], n1):
            for g2 in itertools.permutations([p for p in nodes if p != 0], n1):
                tau = dict(zip(g1, g2))
                if any(L[a] != L[tau[a]] for a in g1):
                    continue
                if any(A[a][b] != A[tau[a]][tau[b]] for a in g1 for b in g1):
                    continue
                # nilpotent: every orbit leaves gamma1 within |gamma1| steps
                ok = True
                for a in g1:
                    cur = a
                    for _ in range(len(g1) + 1):
                        if cur not in tau:
                            break
                        cur = tau[cur]
                    else:
                        ok = False
                    if cur in tau:
                        ok = False
                if not ok:
                    continue
                rows = [[x - y for x, y in zip(_vector(d, a), _vector(d, tau[a]))] for a in g1]
                v = r - (_rank(rows) if rows else 0)
                found[tuple(sorted(tau.items()))] = (v, v * (v - 1) // 2)
    return found


def test_oracle_sl2_by_hand():
    assert oracle("sl2", 1) == {(): (1, 0), ((0, 1),): (0, 0)}


@pytest.mark.parametrize("name,vertex", [("sl2", 1), ("sl3", 1), ("sl3", 2), ("sp4", 1), ("sp4", 2),
                                         ("g2", 1), ("g2", 2)])
def test_enumerator_matches_oracle(name, vertex):
    g = build_algebra(name)
    expected = oracle(name, vertex)
    triples = enum_bd(g, vertex)
    got = {t.tau: (t.v_dim, t.s_dim) for t in triples}
    assert len(triples) == len(expected)
    assert got == expected
    assert all(verify_bd(t, g, vertex) for t in triples)
