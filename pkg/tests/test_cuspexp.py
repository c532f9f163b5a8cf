from fractions import Fraction

import mpmath
import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.cyclotomic import CyclotomicElement
from backend.modforms.errors import ComputationError
from backend.modforms.cuspexp import (
    CosetEisenstein,
    _decompose,
    _multipliers,
    coset_table,
    cusps,
    decomposition_slash,
    mfslashexpansion,
    mul2,
    rational_reduction,
    recognize,
    slash_params,
)
from backend.modforms.qseries import Delta, eta_quotient
from backend.modforms.spaces import mfinit

S = (0, -1, 1, 0)


def test_slash_parameters(chi_minus4):
    assert slash_params(32, 4, DirichletCharacter.trivial(32), (1, 0, 2, 1)) == (0, 8)
    assert slash_params(36, 3, chi_minus4.induce(36), (1, 0, 2, 1)) == (Fraction(1, 18), 9)
    assert slash_params(11, 2, DirichletCharacter.trivial(11), (1, 0, 11, 1)) == (0, 1)


def test_rational_reduction():
    assert rational_reduction((1, 1, 0, 1)) == ((1, 1, 0, 1), None)
    gp, affine = rational_reduction((2, 0, 0, 1))
    assert gp == (1, 0, 0, 1)
    assert affine == (2, 0)
    with pytest.raises(ValueError):
        rational_reduction((0, 1, 1, 0))


@pytest.mark.parametrize("N,count", [(1, 1), (4, 3), (8, 4), (12, 6), (25, 6)])
def test_cusps(N, count):
    assert len(cusps(N)) == count


@pytest.mark.parametrize("N,index", [(1, 1), (11, 12), (12, 24), (32, 48)])
def test_coset_tables_cover_the_index(N, index):
    assert len(coset_table(N)) == index


def test_recognize(dps30):
    root2 = recognize(mpmath.sqrt(2), 8)
    assert root2 == CyclotomicElement.zeta(8) + CyclotomicElement.zeta(8, 7)
    assert recognize(mpmath.mpf(1) / 3, 1) == Fraction(1, 3)
    assert recognize(mpmath.mpf(0), 4) == 0


def test_delta_is_invariant_under_s(delta):
    space = mfinit(1, 12, None, 1)
    exp = mfslashexpansion(space, delta, S, 3, algebraic=True)
    assert exp.exact
    assert exp.params() == (0, 1)
    assert exp.coeffs == [0, 1, -24, 252]
    assert exp.to_json()["coefficients"] == ["0", "1", "-24", "252"]


def test_numerical_expansion_evaluates(delta):
    space = mfinit(1, 12, None, 1)
    exp = mfslashexpansion(space, delta, S, 12)
    assert not exp.exact
    assert abs(exp.float_coeffs()[2] + 24) < 1e-20
    expected = mpmath.gamma(mpmath.mpf(1) / 4) ** 24 / (2 ** 24 * mpmath.pi ** 18)
    assert abs(exp.evaluate(mpmath.mpc(0, 1)) - expected) < 1e-15


def test_zero_dimensional_space(delta):
    with pytest.raises(ComputationError):
        mfslashexpansion(mfinit(1, 2, None, 1), delta, S, 3)


@pytest.mark.slow
def test_expansion_at_cusp_one_half_level_32():
    space = mfinit(32, 4, None, 0)
    exp = mfslashexpansion(space, space.basis[0], (1, 0, 2, 1), 5, algebraic=True)
    assert exp.exact
    assert exp.params() == (0, 8)
    assert str(exp.coeffs[3]) == "-1/4*t^3"
    assert str(exp.coeffs[5]) == "-11/32*t^5"


@pytest.mark.slow
def test_expansion_with_character_level_36(chi_minus4):
    space = mfinit(36, 3, chi_minus4, 0)
    exp = mfslashexpansion(space, space.basis[0], (1, 0, 2, 1), 2, algebraic=True)
    assert exp.exact
    assert exp.params() == (Fraction(1, 18), 9)
    assert str(exp.coeffs[2]) == "-1/3*t^5 - 1/3*t^2"
    value = exp.float_coeffs()[2]
    assert abs(value - mpmath.mpc("0.25534814770", "-0.21426253656")) < 1e-10


def test_delta_is_the_last_resort_multiplier():
    weight, multiplier = list(_multipliers(2, allow_none=False))[-1]
    assert weight == 12
    assert isinstance(multiplier, Delta)


@pytest.mark.slow
def test_division_by_delta_recovers_the_form(dps30):
    f = eta_quotient([(1, 2), (11, 2)])
    dec = _decompose(11, 14, DirichletCharacter.trivial(11), [f], Delta())[0]
    assert dec.verify()
    series = decomposition_slash(dec, (1, 0, 0, 1), Fraction(4))
    for n, c in enumerate(f.coefs(4)):
        assert abs(series.coefficient(n) - c) < 1e-15


def test_coset_eisenstein_matches_the_lattice_sum():
    G = CosetEisenstein(6, 3, (1, 2))
    tau = mpmath.mpc(0.1, 0.9)
    z = complex(tau)
    direct = sum((c * z + d) ** -6 for c in range(-119, 121, 3) for d in range(-118, 121, 3))
    value = G.evaluate(tau)
    assert abs(value - direct) < 1e-7 * (1 + abs(direct))


def test_coset_eisenstein_slash_is_a_right_action(dps30):
    G = CosetEisenstein(4, 5, (2, 3))
    g1, g2 = (1, 1, 0, 1), (2, 1, 1, 1)
    assert G.slash(g1).slash(g2) == G.slash(mul2(g1, g2))
    tau = mpmath.mpc(0.1, 0.9)
    a, b, c, d = g2
    lhs = (c * tau + d) ** -4 * G.evaluate((a * tau + b) / (c * tau + d))
    assert abs(lhs - G.slash(g2).evaluate(tau)) < 1e-20


@pytest.mark.slow
def test_gamma0_elements_act_through_the_character(chi_minus4):
    f = eta_quotient([(1, 2), (11, 2)])
    exp = mfslashexpansion(mfinit(11, 2, None, 1), f, (1, 0, 11, 1), 5, algebraic=True)
    assert exp.coeffs == f.coefs(5)
    space = mfinit(12, 3, chi_minus4)
    g = space.basis[0]
    exp = mfslashexpansion(space, g, (7, 4, 12, 7), 4, algebraic=True)
    assert exp.coeffs == [-c for c in g.coefs(4)]
