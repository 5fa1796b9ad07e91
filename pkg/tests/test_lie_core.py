from fractions import Fraction

import pytest

from liecurrent.errors import BadLeg, UnsupportedType
from liecurrent.lie_core import (TensorElem, algebra_from_json, bracket_leg, build_algebra, casimir_omega,
                                 cartan_involution, drinfeld_jimbo_r, invariance_violations, jacobi_violations)

ALGEBRAS = {"sl2": 3, "sl3": 8, "sp4": 10, "g2": 14}


@pytest.mark.parametrize("name,dim", ALGEBRAS.items())
def test_dimension_and_jacobi(name, dim):
    g = build_algebra(name)
    assert g.dim == dim
    assert jacobi_violations(g, limit=1) == []


@pytest.mark.parametrize("name", ALGEBRAS)
def test_forms_invariant_and_normalized(name):
    g = build_algebra(name)
    assert invariance_violations(g, "normalized") == []
    for a, b in zip(g.positive_indices, g.negative_indices):
        assert g.form({a: 1}, {b: 1}) == 1


@pytest.mark.parametrize("name", ALGEBRAS)
def test_killing_is_trace_of_ad_products(name):
    g = build_algebra(name)
    ads = [g.ad_matrix(i) for i in range(g.dim)]
    for i in (0, g.cartan_indices[0], g.dim - 1):
        for j in range(g.dim):
            tr = sum(ads[i][r][c] * ads[j][c][r] for r in range(g.dim) for c in range(g.dim))
            assert tr == g.killing[i][j]


def test_sl2_conventions():
    g = build_algebra("sl2")
    e, h, f = g.index("e"), g.index("h"), g.index("f")
    assert g.bracket(h, e) == {e: Fraction(1, 2)}
    assert g.form({h: 1}, {h: 1}) == Fraction(1, 2)
    assert g.dual_vector(h) == {h: 2}


@pytest.mark.parametrize("name", ["sl2", "sl3", "g2"])
def test_casimir_commutes_with_diagonal_action(name):
    g = build_algebra(name)
    om = casimir_omega(g)
    for a in range(g.dim):
        total = bracket_leg(om, 1, a, g) + bracket_leg(om, 2, a, g)
        assert total.is_zero()


def test_dj_r_plus_flip_is_casimir():
    g = build_algebra("sl3")
    r = drinfeld_jimbo_r(g)
    assert (r + r.swap() - casimir_omega(g)).is_zero()


def test_cartan_involution_preserves_brackets():
    g = build_algebra("sp4")
    sigma = cartan_involution(g)
    for i in range(g.dim):
        for j in range(g.dim):
            assert sigma.apply(g.bracket(i, j)) == g.bracket_vec(sigma.image(i), sigma.image(j))


def test_json_round_trip():
    g = build_algebra("g2")
    h = algebra_from_json(g.to_json())
    assert h.labels == g.labels and h.struct == g.struct and h.killing == g.killing


def test_errors():
    with pytest.raises(UnsupportedType):
        build_algebra("e8")
    with pytest.raises(BadLeg):
        TensorElem(4)
    g = build_algebra("sl2")
    with pytest.raises(BadLeg):
        bracket_leg(casimir_omega(g), 3, 0, g)
