import random
from fractions import Fraction

import pytest

from liecurrent.errors import BadConstantTerm, BadDegree, DegenerateParameters, MismatchWitness
from liecurrent.exact_arith import LaurentPoly
from liecurrent.lie_core import build_algebra, cartan_involution
from liecurrent.loop_double import (CaseTag, DoubleElem, FormSpec, biduality_check, build_W, canonical_pair,
                                    classify_a_poly, double_bracket, involution_on_W, manin_verify,
                                    perp_window, polynomial_pattern)

CASE_TAGS = [CaseTag("A1"), CaseTag("A2"), CaseTag("A3"), CaseTag("A4", 1, 2), CaseTag("B1"), CaseTag("B2"),
             CaseTag("C")]


def test_a4_parameter_guards():
    for m1, m2 in ((1, 1), (0, 2), (3, 0)):
        with pytest.raises(DegenerateParameters):
            CaseTag("A4", m1, m2)
    with pytest.raises(ValueError):
        CaseTag("B1", 1, 2)


def test_form_weights():
    # A2 weights the residue by 1/(1-x), so x^-2 and 1 now pair to 1
    form = FormSpec.for_case(CaseTag("A2"))
    assert form.loop_pair(LaurentPoly.monomial(-2), LaurentPoly.const(1)) == 1
    plain = FormSpec.for_case(CaseTag("A1"))
    assert plain.loop_pair(LaurentPoly.monomial(-2), LaurentPoly.const(1)) == 0


def test_pairing_is_invariant_on_random_elements():
    g = build_algebra("sl2")
    rng = random.Random(3)
    for case in (CaseTag("A3"), CaseTag("B2"), CaseTag("C")):
        form = FormSpec.for_case(case)

        def rand_elem():
            u = DoubleElem(case.family, {})
            for _ in range(3):
                u = u + DoubleElem.mono(case.family, rng.randrange(g.dim), rng.randint(-3, 2), rng.randint(-3, 3))
            return u
        for _ in range(5):
            a, b, c = rand_elem(), rand_elem(), rand_elem()
            lhs = canonical_pair(double_bracket(a, b, g), c, form, g)
            rhs = canonical_pair(a, double_bracket(b, c, g), form, g)
            assert lhs == rhs


@pytest.mark.parametrize("case", CASE_TAGS, ids=str)
@pytest.mark.parametrize("algebra", ["sl2", "sl3"])
def test_manin_triples(case, algebra):
    g = build_algebra(algebra)
    rep = manin_verify(build_W(case, g), case, g, (-10, 6))
    assert rep.passed, rep.to_json_obj()


def test_manin_on_rank_two_nonsimply_laced():
    for name in ("sp4", "g2"):
        g = build_algebra(name)
        case = CaseTag("A2")
        assert manin_verify(build_W(case, g), case, g, (-6, 4)).passed


def test_polynomial_control_fails_transversality():
    g = build_algebra("sl2")
    case = CaseTag("A1")
    rep = manin_verify(polynomial_pattern(case, g), case, g, (-10, 6))
    assert rep.check("transversality").status == "fail"
    assert rep.check("transversality").witness is not None


def test_wrong_form_breaks_isotropy():
    g = build_algebra("sl2")
    rep = manin_verify(build_W(CaseTag("A2"), g), CaseTag("A1"), g, (-10, 6))
    assert rep.check("isotropy").status == "fail"


def test_involution_swaps_parameters():
    g = build_algebra("sl3")
    sigma = cartan_involution(g)
    W = build_W(CaseTag("A4", 1, 2), g)
    assert involution_on_W(W, sigma, g).case == CaseTag("A4", 2, 1)
    with pytest.raises(MismatchWitness) as info:
        involution_on_W(W, sigma, g, target=(1, 2))
    assert info.value.witness["generator"].startswith("sigma(")


@pytest.mark.parametrize("case", CASE_TAGS[:4], ids=str)
def test_perp_of_minus_part_and_biduality(case):
    g = build_algebra("sl2")
    form = FormSpec.for_case(case)
    V = [DoubleElem.mono("A", i, d) for d in range(-6, 0) for i in range(g.dim)]
    res = perp_window(V, form, g, (-6, 5))
    assert res.multiplier_identity
    assert biduality_check(V, form, g, (-6, 5))


def test_perp_of_x2_polynomials():
    g = build_algebra("sl2")
    form = FormSpec.for_case(CaseTag("A1"))
    V = [DoubleElem.mono("A", i, d) for d in range(2, 8) for i in range(g.dim)]
    res = perp_window(V, form, g, (-8, 7))
    # x^d pairs with x^e only when d + e = -1, so the perp is x^-2 g[x] inside the safe window
    degrees = {d for b in res.basis for f in b.loop.values() for d in f.terms}
    assert res.safe_window == (-8, 7)
    assert min(degrees) == -2 and len(res.basis) == g.dim * 10


REPRESENTATIVES = {"A1": [1], "A2": [1, -1], "A3": [1, -2, 1], "A4": [1, -3, 2]}


@pytest.mark.parametrize("name,coeffs", REPRESENTATIVES.items())
def test_classifier_representatives_and_scaling(name, coeffs):
    rng = random.Random(name)
    base = classify_a_poly(coeffs)
    assert base.case == name
    for _ in range(20):
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        scaled = [a * c ** k for k, a in enumerate(coeffs)]
        got = classify_a_poly(scaled)
        assert got.case == name and got.j == base.j


def test_a4_invariant():
    assert str(classify_a_poly([1, -3, 2])) == "A4, j=9/2"
    for m1, m2 in ((1, 2), (2, 5), (Fraction(1, 3), -4)):
        j12 = classify_a_poly([1, -(m1 + m2), m1 * m2]).j
        j21 = classify_a_poly([1, -(m2 + m1), m2 * m1]).j
        assert j12 == j21 == Fraction((m1 + m2) ** 2) / (m1 * m2)


def test_classifier_guards():
    with pytest.raises(BadConstantTerm):
        classify_a_poly([2, 1])
    with pytest.raises(BadDegree):
        classify_a_poly([1, 0, 0, 1])
