from fractions import Fraction

import mpmath

from backend.modforms.cyclotomic import CyclotomicElement
from backend.modforms.relfield import RelativeField

F = Fraction


def golden():
    return RelativeField(1, [F(-1), F(1), F(1)])


def test_arithmetic_modulo_defining_polynomial():
    K = golden()
    y = K.gen()
    assert y * y == 1 - y
    assert y.inverse() == y + 1
    assert (y * y + y) == 1
    assert str(y) == "y"
    assert K.degree == 2


def test_rational_base_field():
    K = golden()
    assert K.text() == "y^2 + y - 1"
    assert K.absolute_model() == ([-1, 1, 1], 0)
    assert K.to_json()["base"] == "Q"
    roots = K.roots()
    assert abs(roots[0] + (1 + mpmath.sqrt(5)) / 2) < 1e-12
    assert abs(roots[1] - (mpmath.sqrt(5) - 1) / 2) < 1e-12


def test_field_over_gaussian_rationals():
    t = CyclotomicElement.zeta(4)
    K = RelativeField(4, [-3 * t, F(0), F(1)])
    assert K.absolute_model() == ([9, 0, 0, 0, 1], 0)
    assert K.absolute_degree == 4
    assert K.text().endswith(" over t^2 + 1")
    y = K.gen()
    assert y * y == 3 * t
    for r in K.roots():
        assert abs(r * r - 3j) < 1e-12


def test_linear_fields_collapse_to_the_base():
    K = RelativeField(1, [F(-2), F(1)])
    assert K.degree == 1
    assert K.gen() == 2
