import random
from fractions import Fraction

import pytest
import sympy

from liecurrent.errors import InsufficientOrder, NonUnitConstantTerm, NotDivisible
from liecurrent.exact_arith import (LaurentPoly, MultiPoly, TruncSeries, divide_exact, frac_str, parse_frac,
                                    residue_pair, series_inverse)

X, Y, Z = sympy.symbols("x y z")
VARS = ("x", "y", "z")


def rand_poly(rng, nterms=5, deg=3):
    terms = {}
    for _ in range(nterms):
        e = tuple(rng.randint(0, deg) for _ in VARS)
        terms[e] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return MultiPoly(VARS, terms)


def to_sympy(p: MultiPoly):
    syms = [sympy.Symbol(v) for v in p.variables]
    return sympy.expand(sum((sympy.Rational(c.numerator, c.denominator) *
                             sympy.prod([s ** e for s, e in zip(syms, exp)])
                             for exp, c in p.terms.items()), sympy.Integer(0)))


def test_frac_round_trip():
    for s in ("3/4", "-2/1", "0/1"):
        assert frac_str(parse_frac(s)) == s
    assert parse_frac("-6/8") == Fraction(-3, 4)


@pytest.mark.parametrize("seed", range(6))
def test_ring_operations_against_sympy(seed):
    rng = random.Random(seed)
    p, q = rand_poly(rng), rand_poly(rng)
    assert sympy.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0
    assert sympy.expand(to_sympy(p + q) - to_sympy(p) - to_sympy(q)) == 0
    assert sympy.expand(to_sympy(p - q) - to_sympy(p) + to_sympy(q)) == 0


@pytest.mark.parametrize("seed", range(6))
def test_divide_exact_recovers_factor(seed):
    rng = random.Random(100 + seed)
    p = rand_poly(rng)
    d = MultiPoly(VARS, {(0, 1, 0): 1, (1, 0, 0): -1})  # y - x
    q = divide_exact(p * d, d)
    assert sympy.expand(to_sympy(q) - to_sympy(p)) == 0


def test_divide_exact_rejects_remainder():
    d = MultiPoly(VARS, {(0, 1, 0): 1, (1, 0, 0): -1})
    with pytest.raises(NotDivisible):
        divide_exact(MultiPoly(VARS, {(1, 0, 0): 1}), d)


def test_series_inverse_against_sympy():
    p = MultiPoly.from_coeffs([1, -3, 2])
    inv = series_inverse(p, 8)
    ref = sympy.series(1 / (1 - 3 * X + 2 * X ** 2), X, 0, 9).removeO()
    for k in range(9):
        assert inv[k] == Fraction(str(ref.coeff(X, k)))


def test_series_inverse_guards():
    with pytest.raises(NonUnitConstantTerm):
        series_inverse(MultiPoly.from_coeffs([2, 1]), 3)
    with pytest.raises(InsufficientOrder):
        TruncSeries([1, 1], 1)[3]


def test_residue_pair_hand_values():
    w = TruncSeries([1], 4)
    assert residue_pair(LaurentPoly.monomial(-3), LaurentPoly.monomial(2), w) == 1
    assert residue_pair(LaurentPoly.monomial(-2), LaurentPoly.monomial(2), w) == 0
    # weight 1/(1-x): Res x^-3 * (1 + x + x^2 + ...) = 1
    w2 = series_inverse(MultiPoly.from_coeffs([1, -1]), 4)
    assert residue_pair(LaurentPoly.monomial(-3), LaurentPoly.const(1), w2) == 1


def test_laurent_shift_and_product():
    p = LaurentPoly({-1: 2, 3: Fraction(1, 2)})
    assert (p * LaurentPoly.monomial(1)).terms == p.shift(1).terms
    assert (p - p).is_zero()
