import random
from fractions import Fraction

import pytest

from liecurrent.errors import NotPolynomial
from liecurrent.lie_core import TensorElem, build_algebra, casimir_omega
from liecurrent.loop_double import CaseTag
from liecurrent.rmatrix import (XY, DrinfeldJimbo, FourTypes, RationalR, Rm, build_r, catalog_sources, cobracket,
                                cocycle_check, cybe_check, degree_bound_check, dual_basis_verify,
                                manin_cobracket_check, polynomiality_check, r_from_json, skew_check)


def evaluate(r: RationalR, x, y):
    """r at a rational point, as {(i, j): value}."""
    out = {}
    for key, p in r.numerator.items():
        v = p.evaluate({"x": x, "y": y}) / (y - x) ** r.denom_power
        out[key] = out.get(key, 0) + v
    if r.twist is not None:
        for key, p in r.twist.items():
            out[key] = out.get(key, 0) + p.evaluate({"x": x, "y": y})
    return {k: v for k, v in out.items() if v}


def pointwise_cybe(r, g, x, y, z):
    r12, r13, r23 = evaluate(r, x, y), evaluate(r, x, z), evaluate(r, y, z)
    total = {}

    def add(key, c):
        total[key] = total.get(key, 0) + c
    for (a, b), u in r12.items():
        for (c, d), v in r13.items():
            for k, s in g.bracket(a, c).items():
                add((k, b, d), u * v * s)
        for (c, d), v in r23.items():
            for k, s in g.bracket(b, c).items():
                add((a, k, d), u * v * s)
    for (a, b), u in r13.items():
        for (c, d), v in r23.items():
            for k, s in g.bracket(b, d).items():
                add((a, c, k), u * v * s)
    return {k: v for k, v in total.items() if v}


def rand_points(seed, n=3):
    rng = random.Random(seed)
    pts = []
    while len(pts) < n:
        p = tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 7)) for _ in range(3))
        if len(set(p)) == 3:
            pts.append(p)
    return pts


@pytest.mark.parametrize("source", catalog_sources(), ids=str)
def test_cybe_sl2_symbolic_and_pointwise(source):
    g = build_algebra("sl2")
    r = build_r(source, g)
    assert cybe_check(r, g).is_zero
    for pt in rand_points(1):
        assert pointwise_cybe(r, g, *pt) == {}


def test_cybe_sl3_pointwise_spot_check():
    g = build_algebra("sl3")
    for source in (CaseTag("A2"), CaseTag("B2")):
        r = build_r(source, g)
        assert pointwise_cybe(r, g, *rand_points(2, 1)[0]) == {}


@pytest.mark.parametrize("source", [Rm(Fraction(-1), Fraction(1)), FourTypes(3)], ids=str)
def test_cybe_negative_controls(source):
    g = build_algebra("sl2")
    r = build_r(source, g)
    rep = cybe_check(r, g)
    assert not rep.is_zero and rep.witness is not None
    assert any(pointwise_cybe(r, g, *pt) for pt in rand_points(3))


@pytest.mark.parametrize("source", [s for s in catalog_sources() if not isinstance(s, DrinfeldJimbo)], ids=str)
def test_skew_matches_pointwise(source):
    g = build_algebra("sl2")
    r = build_r(source, g)
    assert skew_check(r, g).ok
    x, y, _ = rand_points(4, 1)[0]
    a, b = evaluate(r, x, y), evaluate(r, y, x)
    total = dict(a)
    for (i, j), v in b.items():
        total[(j, i)] = total.get((j, i), 0) + v
    assert not any(total.values())


def test_constant_dj_is_not_skew():
    g = build_algebra("sl2")
    rep = skew_check(build_r(DrinfeldJimbo(), g), g)
    assert not rep.ok
    assert rep.witness == {"slot": ["e[1]", "e[-1]"], "coefficient": "1"}
    # r + r21 is the Casimir tensor
    r = build_r(DrinfeldJimbo(), g).numerator
    assert (r + r.swap() - casimir_omega(g)).is_zero()


def test_non_skew_twist_rejected():
    g = build_algebra("sl2")
    r = build_r(CaseTag("A1"), g)
    with pytest.raises(ValueError):
        r.with_twist(casimir_omega(g))
    assert not skew_check(r.with_twist(casimir_omega(g), check=False), g).ok


@pytest.mark.parametrize("source", catalog_sources(), ids=str)
def test_cobracket_suite_sl2(source):
    g = build_algebra("sl2")
    r = build_r(source, g)
    assert polynomiality_check(r, g, 4).ok
    assert degree_bound_check(r, g, 4).ok
    assert cocycle_check(r, g, 3).ok


def test_cobracket_hand_value():
    # r = Omega/(y - x):  delta(h) = [h (x) 1 + 1 (x) h, Omega]/(y - x) = 0
    g = build_algebra("sl2")
    r = build_r(CaseTag("A1"), g)
    assert cobracket(r, g.index("h"), 0, g).is_zero()
    d = cobracket(r, g.index("e"), 1, g)
    assert not d.is_zero() and d.max_degree() == 0


def test_polynomiality_detects_missing_factor():
    g = build_algebra("sl2")
    bad = RationalR(TensorElem(2, {(0, 2): 1}, XY), 1, label="e(x)f/(y-x)")
    with pytest.raises(NotPolynomial):
        cobracket(bad, g.index("e"), 1, g)
    assert not polynomiality_check(bad, g, 2).ok


def test_cocycle_and_degree_controls_with_perturbed_cobracket():
    g = build_algebra("sl2")
    r = build_r(CaseTag("A2"), g)
    e = g.index("e")
    extra = TensorElem(2, {(e, e): 1}, XY)

    def perturbed(i, n):
        d = cobracket(r, i, n, g)
        return d + extra if (i, n) == (e, 2) else d
    assert not cocycle_check(r, g, 2, cobracket_fn=perturbed).ok
    assert not degree_bound_check(r, g, 3, cobracket_fn=perturbed).ok


@pytest.mark.parametrize("case", [CaseTag("A1"), CaseTag("A2"), CaseTag("A3"), CaseTag("A4", 1, 2)], ids=str)
def test_dual_bases(case):
    g = build_algebra("sl2")
    rep = dual_basis_verify(case, g, 4)
    assert rep.biorthonormal and rep.expansion_match and rep.root_entries_match
    assert rep.cartan_summary == "scaled by 1/4"


@pytest.mark.parametrize("case", [CaseTag("A1"), CaseTag("A3"), CaseTag("C")], ids=str)
def test_manin_cobracket_agrees(case):
    g = build_algebra("sl2")
    assert manin_cobracket_check(case, g, 2).ok


def test_json_round_trip():
    g = build_algebra("sl3")
    r = build_r(CaseTag("B2"), g)
    back = r_from_json(r.to_json(g), g)
    assert (back.full_numerator() - r.full_numerator()).is_zero() and back.denom_power == r.denom_power


def test_manin_cobracket_b_cases_disagree_on_cartan_slot():
    # the listed B-family r induces the cobracket of sigma(W), not of W itself
    g = build_algebra("sl2")
    rep = manin_cobracket_check(CaseTag("B1"), g, 1)
    assert not rep.ok
    assert rep.failures[0]["slot"] == ["e[1]*x^0", "h1*y^0"]
