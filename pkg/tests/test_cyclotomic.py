from fractions import Fraction

import mpmath
import pytest

from backend.modforms.cyclotomic import (
    CyclotomicElement,
    canonical_order,
    cyclotomic_modulus,
    format_poly,
    sqrt_integer,
    subcyclotomic_trace,
)

z4 = CyclotomicElement.zeta(4)
z8 = CyclotomicElement.zeta(8)


def test_orders_two_mod_four_fold_down():
    assert canonical_order(6) == 3
    assert canonical_order(2) == 1
    z6 = CyclotomicElement.zeta(6)
    assert z6.order == 3
    assert z6 ** 3 == -1
    with pytest.raises(ValueError):
        CyclotomicElement(6, [1, 0])


def test_field_arithmetic():
    assert z8 ** 4 == -1
    assert z4 * z4 == -1
    x = 1 + z4
    assert x * x.inverse() == 1
    assert (x / x) == 1
    assert x.norm() == 2
    assert z4.conjugate() == -z4


def test_rational_comparisons():
    half = CyclotomicElement.rational(Fraction(1, 2))
    assert half == Fraction(1, 2)
    assert half.is_rational()
    assert half.to_fraction() == Fraction(1, 2)
    with pytest.raises(ValueError):
        z4.to_fraction()


def test_minimal_field():
    assert (z8 ** 2).minimal().order == 4
    assert (z8 + z8 ** 7).minimal().order == 8
    assert (z8 ** 4).minimal().order == 1


def test_descend_rejects_elements_outside_subfield():
    assert (z8 ** 2).descend(4) == z4
    with pytest.raises(ValueError):
        z8.descend(4)


def test_subcyclotomic_traces():
    assert subcyclotomic_trace(z8, 4) == 0
    assert subcyclotomic_trace(z8 ** 2, 4, ambient=8) == 2 * z4
    assert subcyclotomic_trace(z4, 1) == 0
    assert subcyclotomic_trace(CyclotomicElement.zeta(3), 1) == -1


@pytest.mark.parametrize("m", [-3, -1, 2, 5, 8, -7])
def test_sqrt_integer(m):
    r = sqrt_integer(m)
    assert r * r == m


def test_embedding_matches_complex_exponential():
    value = (z8 + z8 ** 7).embed()
    assert abs(value - mpmath.sqrt(2)) < mpmath.mpf(10) ** -12


def test_display():
    assert cyclotomic_modulus(8) == "t^4 + 1"
    assert cyclotomic_modulus(3) == "t^2 + t + 1"
    assert format_poly([Fraction(0), Fraction(0), Fraction(-1, 3), Fraction(0), Fraction(0), Fraction(-1, 3)], "t") == "-1/3*t^5 - 1/3*t^2"
    assert str(z4) == "t"
