from fractions import Fraction

import pytest

from liecurrent.errors import RankTooLarge, WindowTooSmall
from liecurrent.exact_arith import LaurentPoly
from liecurrent.lie_core import build_algebra
from liecurrent.orders_bd import (INF, BDTriple, FData, OrderSpec, enum_bd, gamma_quotient_check,
                                  order_membership, order_perp_check, parabolic, valuation, verify_bd,
                                  verify_f_data)


def mono(g, label, d):
    return {g.index(label): LaurentPoly({d: 1})}


def test_valuation():
    assert valuation(LaurentPoly({-3: 1, 2: 5})) == -2
    assert valuation(LaurentPoly({-3: 1})) == 3
    assert valuation(LaurentPoly({})) == INF


def test_sl2_membership_by_hand():
    g = build_algebra("sl2")
    spec = OrderSpec.at_vertex(g, 1)
    cases = {("e", -1): True, ("e", 0): False, ("f", 1): True, ("f", 2): False, ("h", 1): False, ("h", 0): True,
             ("h", -5): True}
    for (lab, d), want in cases.items():
        m = order_membership(mono(g, lab, d), spec)
        assert m.member is want and m.agree, (lab, d)


def test_membership_reports_witness():
    g = build_algebra("sl2")
    m = order_membership(mono(g, "h", 1), OrderSpec.at_vertex(g, 1))
    assert m.witness["component"] == "h1" and m.witness["required"] == 0


@pytest.mark.parametrize("name,vertex,mark", [("sl2", 1, 1), ("sl3", 1, 1), ("sl3", 2, 1), ("sp4", 1, 1),
                                              ("sp4", 2, 2), ("g2", 1, 3), ("g2", 2, 2)])
def test_order_perp(name, vertex, mark):
    g = build_algebra(name)
    rep = order_perp_check(OrderSpec.at_vertex(g, vertex))
    assert rep.mark == mark
    assert rep.ok, rep.to_json_obj()
    assert rep.x2_identity is (mark == 1)


def test_order_perp_window_guard():
    g = build_algebra("sl2")
    with pytest.raises(WindowTooSmall):
        order_perp_check(OrderSpec.at_vertex(g, 1), (-3, 1))


def test_criteria_agree_for_a_generic_point():
    g = build_algebra("sl3")
    spec = OrderSpec.from_h(g, [Fraction(1, 3), Fraction(1, 5)])
    for i in range(g.dim):
        for d in range(-3, 4):
            m = order_membership({i: LaurentPoly({d: 1})}, spec)
            assert m.display is None and m.member == (m.valuation is True)


def test_gamma_quotient_sl2():
    g = build_algebra("sl2")
    rep = gamma_quotient_check(g, 1)
    assert rep.dimension == 2 * g.dim
    assert rep.ok, rep.to_json_obj()


def test_parabolic_subalgebras():
    g = build_algebra("sl2")
    assert [g.labels[i] for i in parabolic(g, 1)] == ["h1", "e[-1]"]
    assert len(parabolic(g, 0)) == g.dim
    assert len(parabolic(build_algebra("sl3"), 1)) == 6


def test_f_data_round_trip_and_check():
    g = build_algebra("sl2")
    good = FData([{g.index("e"): Fraction(1)}], [[Fraction(0)]])
    assert FData.from_json(good.to_json_obj(g), g).to_json_obj(g) == good.to_json_obj(g)
    assert verify_f_data(good, g, 1).ok
    bad = verify_f_data(FData([{g.index("h"): Fraction(1)}], [[Fraction(1)]]), g, 1)
    assert not bad.skew and not bad.spans_with_parabolic and not bad.ok
    skipped = verify_f_data(good, build_algebra("sp4"), 2)
    assert not skipped.checked and skipped.notes


def test_bd_sl2_exact():
    g = build_algebra("sl2")
    triples = enum_bd(g, 1)
    assert [(t.v_dim, t.s_dim) for t in triples] == [(1, 0), (0, 0)]


def test_bd_rejects_bad_input():
    g = build_algebra("sl3")
    with pytest.raises(ValueError):
        enum_bd(g, 0)
    bogus = BDTriple((1,), (1,), ((1, 1),), 0, 0)
    assert not verify_bd(bogus, g, 1)


def test_bd_rank_guard():
    class RankThree:
        rank = 3
    with pytest.raises(RankTooLarge):
        enum_bd(RankThree(), 1)
