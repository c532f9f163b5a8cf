from fractions import Fraction

import mpmath
import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.eisenstein import EisKey
from backend.modforms.errors import PrecisionError
from backend.modforms.lfunctions import (
    eisenstein_lvalue,
    functional_equation_residual,
    hardy_table,
    lfun_eval,
    lfun_special,
    lfun_zeros,
    lfunmf,
)
from backend.modforms.qseries import eisenstein_level_one, eta_quotient, mfpow, theta_char
from backend.modforms.spaces import mfinit

ONE = DirichletCharacter.trivial(1)


@pytest.fixture(scope="module")
def delta_handle():
    from backend.modforms.qseries import delta

    return lfunmf(mfinit(1, 12, None, 1), delta(), tmax=21)


@pytest.fixture(scope="module")
def level11_handle():
    return lfunmf(mfinit(11, 2, None, 1), eta_quotient([(1, 2), (11, 2)]))


def test_root_numbers(delta_handle, level11_handle):
    assert abs(delta_handle.root_number - 1) < 1e-20
    assert abs(level11_handle.root_number - 1) < 1e-20
    assert delta_handle.self_dual


def test_central_value_of_level_11(level11_handle, dps30):
    assert abs(lfun_eval(level11_handle, 1) - mpmath.mpf("0.2538418608559106843")) < 1e-18


def test_functional_equation(level11_handle, dps30):
    assert functional_equation_residual(level11_handle, mpmath.mpc(0.7, 2)) < 1e-25


def test_eisenstein_l_values(dps30):
    handle = lfunmf(mfinit(1, 4), eisenstein_level_one(4), tmax=5)
    assert abs(handle.value(5) - 240 * mpmath.zeta(5) * mpmath.zeta(2)) < 1e-20
    assert abs(eisenstein_lvalue(EisKey(4, ONE, ONE, 1), 5) - mpmath.zeta(5) * mpmath.zeta(2)) < 1e-25
    shifted = eisenstein_lvalue(EisKey(2, ONE, ONE, 2), 3)
    assert abs(shifted - mpmath.zeta(3) * mpmath.zeta(2) * (mpmath.mpf(1) / 8 - mpmath.mpf(1) / 2)) < 1e-25


def test_zeros_of_delta(delta_handle, dps30):
    zeros = lfun_zeros(delta_handle, 20)
    expected = ["13.907549861392134", "17.442776978234473", "19.656513141954961"]
    assert len(zeros) == 3
    for z, e in zip(zeros, expected):
        assert abs(z - mpmath.mpf(e)) < 1e-14


def test_hardy_table(delta_handle):
    table = hardy_table(delta_handle, 0, 1, 0.5)
    assert [float(t) for t, _ in table] == [0.0, 0.5, 1.0]
    assert all(mpmath.im(z) == 0 for _, z in table)


def test_height_limits(delta_handle):
    with pytest.raises(PrecisionError):
        delta_handle.value(mpmath.mpc(6, 40))
    with pytest.raises(PrecisionError):
        lfun_zeros(delta_handle, 25)
    with pytest.raises(ValueError):
        hardy_table(delta_handle, 0, 1, 0)


def test_special_values_of_delta(delta_handle, dps30):
    special = lfun_special(delta_handle)
    assert special.exact
    assert special.odd == [Fraction(1620, 691), 1, Fraction(9, 14), Fraction(9, 14), 1, Fraction(1620, 691)]
    assert special.even[0] == special.even[-1] == 1
    assert special.even[1] == special.even[3]
    assert abs(special.omega_plus - mpmath.mpf("0.0074154209298961305890")) < 1e-18
    assert abs(special.omega_minus - mpmath.mpf("0.0050835121083932868604")) < 1e-18


def test_half_integral_weight_is_rejected():
    with pytest.raises(ValueError):
        lfunmf(mfinit(4, Fraction(3, 2)), mfpow(theta_char(), 3))
