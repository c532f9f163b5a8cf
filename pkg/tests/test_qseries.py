from fractions import Fraction

import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.errors import ValuationError
from backend.modforms.qseries import (
    HeckeImage,
    delta,
    derivative,
    eisenstein_level_one,
    eta_quotient,
    format_qexp,
    mfbd,
    mfdiv,
    mflinear,
    mfmul,
    mfpow,
    parse_prefix,
    rankin_cohen,
    serre_derivative,
    theta_char,
    theta_qf,
    twist,
)

DELTA_COEFFS = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480]


def test_delta_coefficients(delta):
    assert delta.coefs(8) == DELTA_COEFFS
    assert delta.coefs(3, 2) == [0, -24, -1472, -6048]
    assert delta.params() == {"level": 1, "weight": "12", "character": "Mod(1, 1)", "field": "Q", "modular": True}


def test_level_one_eisenstein():
    assert eisenstein_level_one(4).coefs(3) == [1, 240, 2160, 6720]
    assert eisenstein_level_one(6).coefs(2) == [1, -504, -16632]
    assert eisenstein_level_one(2).quasi
    with pytest.raises(ValueError):
        eisenstein_level_one(3)


def test_delta_from_eisenstein_series(delta):
    E4, E6 = eisenstein_level_one(4), eisenstein_level_one(6)
    f = mflinear([mfpow(E4, 3), mfpow(E6, 2)], [Fraction(1, 1728), Fraction(-1, 1728)])
    assert f.coefs(8) == delta.coefs(8)
    assert f.weight == 12


def test_quotients(delta):
    E4, E6 = eisenstein_level_one(4), eisenstein_level_one(6)
    j_den = mflinear([mfpow(E4, 3), mfpow(E6, 2)], [1, -1])
    assert mfdiv(j_den, delta).coefs(3) == [1728, 0, 0, 0]
    with pytest.raises(ValuationError):
        mfdiv(E4, delta).coefs(3)


def test_theta_series():
    theta = theta_char()
    assert theta.level == 4
    assert theta.weight == Fraction(1, 2)
    assert theta.coefs(4) == [1, 2, 0, 0, 2]
    four = mfpow(theta, 4)
    assert four.weight == 2
    assert four.char.is_trivial()
    assert four.coefs(5) == [1, 8, 24, 32, 24, 48]
    assert mfpow(theta, 10).char == DirichletCharacter.kronecker(-4)


def test_odd_theta_series(chi_minus4):
    theta = theta_char(chi_minus4)
    assert theta.level == 64
    assert theta.weight == Fraction(3, 2)
    assert theta.coefs(9) == [0, 2, 0, 0, 0, 0, 0, 0, 0, -6]


def test_eta_quotients():
    f = eta_quotient([(1, 2), (11, 2)])
    assert f.level == 11
    assert f.weight == 2
    assert f.char.is_trivial()
    assert f.coefs(5) == [0, 1, -2, -1, 2, 1]
    assert [f.order_at_cusp(c) for c in (1, 11)] == [1, 1]
    with pytest.raises(ValuationError):
        eta_quotient([(1, 1)])


def test_lattice_theta_series():
    hexagonal = theta_qf([[2, 1], [1, 2]])
    assert hexagonal.level == 3
    assert hexagonal.weight == 1
    assert hexagonal.coefs(4) == [1, 6, 0, 6, 6]
    square = theta_qf([[1, 0], [0, 1]])
    assert square.level == 4
    assert square.coefs(4) == [1, 4, 4, 0, 4]
    with pytest.raises(ValueError):
        theta_qf([[1, 2], [3, 1]])


def test_derivatives():
    E4 = eisenstein_level_one(4)
    assert serre_derivative(E4).coefs(2) == [Fraction(-1, 3), 168, 5544]
    assert derivative(E4).quasi
    assert derivative(E4).coefs(2) == [0, 240, 4320]


def test_rankin_cohen_bracket(delta):
    E4, E6 = eisenstein_level_one(4), eisenstein_level_one(6)
    bracket = rankin_cohen(E4, E6, 1)
    assert bracket.weight == 12
    assert bracket.coefs(5) == [-3456 * c for c in delta.coefs(5)]


def test_twist_and_expand(delta, chi_minus4):
    t = twist(delta, chi_minus4)
    assert t.level == 16
    assert t.coefs(3) == [0, 1, 0, -252]
    assert mfbd(delta, 2).coefs(4) == [0, 0, 1, 0, -24]
    assert mfbd(delta, 2).level == 2


def test_hecke_image(delta):
    assert HeckeImage(delta, 2).coefs(4) == [-24 * c for c in delta.coefs(4)]


def test_product_levels_and_weights(delta):
    f = mfmul(eta_quotient([(1, 2), (11, 2)]), delta)
    assert f.level == 11
    assert f.weight == 14
    assert f.coefs(2) == [0, 0, 1]


def test_prefix_round_trip(delta):
    text = "(mul (E 4) (lin 2 (pow (delta) 2) (E 24) 1 1))"
    f = parse_prefix(text)
    assert f.prefix() == text
    assert f.weight == 28
    assert parse_prefix(delta.prefix()).coefs(8) == DELTA_COEFFS
    for bad in ("", "(delta", "(nosuchtag 1)", "(delta) (delta)"):
        with pytest.raises(ValueError):
            parse_prefix(bad)


def test_format_qexp():
    assert format_qexp([0, 1, -24]) == "q - 24*q^2 + O(q^3)"
    assert format_qexp([1, 240], var="x") == "1 + 240*x + O(x^2)"
    assert format_qexp([0, 1], step=2) == "q^2 + O(q^4)"


def test_lattice_theta_rejects_indefinite_forms_with_positive_determinant():
    block = [[2, 3], [3, 2]]
    gram = [block[0] + [0, 0], block[1] + [0, 0], [0, 0] + block[0], [0, 0] + block[1]]
    with pytest.raises(ValueError, match="positive definite"):
        theta_qf(gram)
    with pytest.raises(ValueError, match="positive definite"):
        theta_qf([[2, 0], [0, -2]])
