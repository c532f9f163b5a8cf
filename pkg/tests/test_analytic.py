from fractions import Fraction

import mpmath
import pytest

from backend.modforms.analytic import (
    INFINITY,
    atkin_matrix,
    gram_matrix,
    mfatkin,
    mfatkininit,
    mfeval,
    mfpetersson,
    mfsymbol,
    mfsymboleval,
    parse_point,
    period_integral,
    period_polynomial,
    reduce_point,
    split_character,
)
from backend.modforms.characters import DirichletCharacter
from backend.modforms.cuspexp import mul2
from backend.modforms.errors import NotInSpaceError
from backend.modforms.lfunctions import lfunmf
from backend.modforms.linalg import matmul
from backend.modforms.qseries import eisenstein_level_one, eta_quotient
from backend.modforms.spaces import mfinit

I = mpmath.mpc(0, 1)
GAMMA_QUARTER = mpmath.gamma(mpmath.mpf(1) / 4)


def moebius(g, tau):
    a, b, c, d = g
    return (a * tau + b) / (c * tau + d)


def test_parse_point():
    assert parse_point("oo") == (INFINITY, None)
    assert parse_point("1/3") == ("cusp", Fraction(1, 3))
    assert parse_point(2) == ("cusp", Fraction(2))
    kind, z = parse_point("0.5,1")
    assert kind == "point" and z == mpmath.mpc(0.5, 1)
    with pytest.raises(ValueError):
        parse_point(mpmath.mpc(0, -1))


def test_reduce_point():
    tau = mpmath.mpc(0.3, 0.1)
    reduced, g = reduce_point(tau)
    assert abs(reduced) >= 1 - 1e-12
    assert abs(reduced.real) <= 0.5 + 1e-12
    assert abs(moebius(g, tau) - reduced) < 1e-12


def test_values_at_i(dps30):
    E4 = eisenstein_level_one(4)
    value = mfeval(mfinit(1, 4), E4, I)
    assert abs(value - 3 * GAMMA_QUARTER ** 8 / (2 * mpmath.pi) ** 6) < 1e-25
    delta_value = mfeval(mfinit(1, 12, None, 1), eta_quotient([(1, 24)]), I)
    assert abs(delta_value - GAMMA_QUARTER ** 24 / (2 ** 24 * mpmath.pi ** 18)) < 1e-30


def test_value_at_infinity_is_the_constant_term():
    assert mfeval(mfinit(1, 4), eisenstein_level_one(4), "oo") == 1


def test_modularity_on_gamma0_11(dps30):
    space = mfinit(11, 2, None, 1)
    f = eta_quotient([(1, 2), (11, 2)])
    tau = mpmath.mpc(0.05, 0.3)
    g = (1, 0, 11, 1)
    lhs = mfeval(space, f, moebius(g, tau))
    rhs = (11 * tau + 1) ** 2 * mfeval(space, f, tau)
    assert abs(lhs - rhs) < 1e-20 * (1 + abs(rhs))


def test_symbols_give_completed_l_values(delta, dps30):
    space = mfinit(1, 12, None, 1)
    handle = mfsymbol(space, delta)
    L = lfunmf(space, delta)
    periods = handle.symbol(Fraction(0), INFINITY)
    assert len(periods) == 11
    for n in (0, 5, 10):
        assert abs(periods[n] - I ** (n + 1) * L.completed(n + 1)) < 1e-20
    poly = period_polynomial(handle)
    assert len(poly) == 11
    assert abs(poly[10] - periods[0]) < 1e-20
    assert abs(poly[9] + 10 * periods[1]) < 1e-20


def test_symbol_evaluation_gives_the_polynomial_or_its_value(delta, dps30):
    handle = mfsymbol(mfinit(1, 12, None, 1), delta)
    poly = mfsymboleval(handle, Fraction(0), INFINITY)
    assert poly == period_polynomial(handle)
    X = mpmath.mpf(3) / 7
    expected = sum(c * X ** j for j, c in enumerate(poly))
    assert abs(mfsymboleval(handle, Fraction(0), INFINITY, X) - expected) < 1e-20 * (1 + abs(expected))
    # value at X = 0 is the constant term
    assert abs(mfsymboleval(handle, Fraction(0), INFINITY, 0) - poly[0]) < 1e-25


def test_period_integrals_reverse_and_add(delta, dps30):
    handle = mfsymbol(mfinit(1, 12, None, 1), delta)
    L = lfunmf(mfinit(1, 12, None, 1), delta)
    assert abs(period_integral(handle, 0, Fraction(0), INFINITY) - I * L.completed(1)) < 1e-25
    mid = mpmath.mpc(0.2, 0.7)
    for n in (0, 3, 10):
        whole = period_integral(handle, n, Fraction(0), INFINITY)
        assert abs(period_integral(handle, n, INFINITY, Fraction(0)) + whole) < 1e-25
        parts = period_integral(handle, n, Fraction(0), mid) + period_integral(handle, n, mid, INFINITY)
        assert abs(parts - whole) < 1e-25
    with pytest.raises(ValueError):
        period_integral(handle, 11, Fraction(0), INFINITY)


def test_symbols_need_cusp_forms():
    with pytest.raises(NotInSpaceError):
        mfsymbol(mfinit(1, 4), eisenstein_level_one(4))


def test_petersson_norm_of_delta(delta):
    handle = mfsymbol(mfinit(1, 12, None, 1), delta)
    value = mfpetersson(handle)
    assert abs(value - mpmath.mpf("1.0353620568043209e-6")) < 1e-20


@pytest.mark.slow
def test_gram_matrix_of_level_23(dps30):
    G = gram_matrix(mfinit(23, 2, None, 1))
    assert len(G) == 2
    assert abs(G[0][1] - mpmath.conj(G[1][0])) < 1e-20
    assert abs(G[0][1] - mpmath.mpf("-0.006692042995757562")) < 1e-12
    assert abs(G[1][0] - mpmath.mpf("-0.006692042995757562")) < 1e-12
    assert abs(G[1][1] - mpmath.mpf("0.016285193868524849")) < 1e-12
    # leading minors of a Gram matrix are positive
    assert abs(G[0][0].imag) < 1e-20 and G[0][0].real > 0
    assert (G[0][0] * G[1][1] - G[0][1] * G[1][0]).real > 0


def _delta_float(tau, coeffs):
    q = mpmath.expjpi(2 * tau)
    return mpmath.polyval(coeffs[::-1], q)


@pytest.mark.slow
def test_petersson_norm_of_delta_by_quadrature(delta):
    coeffs = [mpmath.mpf(int(c)) for c in delta.coefs(30)]
    with mpmath.workdps(15):
        def inner(x):
            return mpmath.quad(lambda y: abs(_delta_float(mpmath.mpc(x, y), coeffs)) ** 2 * y ** 10,
                               [mpmath.sqrt(1 - x * x), 2, 8])

        value = 2 * mpmath.quad(inner, [0, 0.5])
    assert abs(value - mfpetersson(mfsymbol(mfinit(1, 12, None, 1), delta))) < 1e-12


def test_atkin_lehner_matrices():
    g = atkin_matrix(96, 3)
    assert g == (3, 1, 96, 33)
    assert g[0] * g[3] - g[1] * g[2] == 3
    W = atkin_matrix(11, 11)
    assert W[0] * W[3] - W[1] * W[2] == 11
    assert mul2(W, W)[2] % 11 == 0


def test_split_character(chi_minus4):
    chi = chi_minus4.induce(12)
    chi3, chi4 = split_character(chi, 3)
    assert chi3.modulus == 3 and chi3.is_trivial()
    assert chi4 == chi_minus4
    assert chi3.induce(12) * chi4.induce(12) == chi


def test_fricke_involution_on_level_11():
    space = mfinit(11, 2, None, 1)
    init = mfatkininit(space, 11)
    assert init.exact
    assert init.C_text == "1"
    assert len(init.matrix) == 1 and abs(init.matrix[0][0]) == 1
    f = eta_quotient([(1, 2), (11, 2)])
    image = mfatkin(init, f)
    assert image.coefs(3) == [init.matrix[0][0] * c for c in f.coefs(3)]


def test_atkin_lehner_rejects_inexact_divisors():
    with pytest.raises(ValueError):
        mfatkininit(mfinit(12, 2, None, 1), 2)


@pytest.mark.slow
def test_atkin_lehner_squares():
    init = mfatkininit(mfinit(96, 4, None, 0), 3)
    assert init.exact
    M = init.matrix
    n = len(M)
    assert matmul(M, M) == [[int(i == j) for j in range(n)] for i in range(n)]


@pytest.mark.slow
def test_fricke_with_character_level_32():
    chi8 = DirichletCharacter.kronecker(8)
    init = mfatkininit(mfinit(32, 4, chi8, 0), 32)
    assert init.exact
    assert init.C_text == "8^(-1/2)"
    M = init.matrix
    n = len(M)
    assert matmul(M, M) == [[Fraction(int(i == j), 8) for j in range(n)] for i in range(n)]
    assert sum(M[i][i] for i in range(n)) == 0
