from fractions import Fraction

import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.errors import ComputationError, ParityError
from backend.modforms.hecke import mfeigenbasis
from backend.modforms.qseries import eta_quotient, mfpow, theta_char
from backend.modforms.spaces import mfdim, mfinit, sturm_bound
from backend.modforms.special_weights import (
    StabilityProblem,
    certification_bound,
    coprimality_witness,
    holomorphy_certificate,
    stability_certificate,
)

THREE_HALVES = Fraction(3, 2)


def test_theta_and_its_dilate_have_no_common_zero():
    table = coprimality_witness(8)
    assert len(table) == 4
    assert all(a == 0 or b == 0 for _, a, b in table)
    assert any(a > 0 for _, a, _ in table)


def test_half_integral_weight_requirements():
    with pytest.raises(ValueError):
        mfinit(5, THREE_HALVES)
    with pytest.raises(ValueError):
        mfinit(4, THREE_HALVES, None, "new")
    with pytest.raises(ParityError):
        mfinit(4, THREE_HALVES, DirichletCharacter.kronecker(-4))
    with pytest.raises(ComputationError):
        mfinit(4, Fraction(1, 2))
    assert mfinit(4, Fraction(1, 2), None, "cusp").dim == 0
    assert mfdim(5, THREE_HALVES) == 0


def test_theta_cube_spans_weight_three_halves():
    space = mfinit(4, THREE_HALVES)
    assert space.to_basis(mfpow(theta_char(), 3)) == [1]
    assert space.basis[0].coefs(4) == [1, 6, 12, 8, 6]


def test_weight_one_needs_an_odd_character():
    with pytest.raises(ParityError):
        mfinit(23, 1)
    assert mfdim(23, 1) == 0


@pytest.mark.slow
@pytest.mark.parametrize("N", [3, 4, 7, 11, 15, 20, 22])
def test_no_weight_one_cusp_forms_below_23(N):
    assert mfdim(N, 1, "joker", 1) == []


@pytest.mark.slow
def test_weight_one_dihedral_form_of_level_23():
    chi = DirichletCharacter.kronecker(-23)
    space = mfinit(23, 1, chi, 1)
    assert space.dim == 1
    assert space.contains(eta_quotient([(1, 1), (23, 1)]))
    assert holomorphy_certificate(space)
    assert stability_certificate(space) == [2, 3, 5]


@pytest.mark.slow
def test_weight_one_level_148():
    table = mfdim(148, 1, "joker", 0)
    assert [(order, d) for order, _, d in table] == [(4, 1), (6, 1), (18, 1)]
    forms = mfeigenbasis(mfinit(148, 1, DirichletCharacter(148, 105), 0))
    assert len(forms) == 1
    a7, a11 = forms[0].values([7, 11])
    assert a7 == -1
    assert a11 * a11 == -1


@pytest.mark.slow
def test_weight_one_level_633():
    assert mfdim(633, 1, DirichletCharacter(633, 107), 1) == 2


def test_weight_one_cut_compares_past_the_eisenstein_valuation():
    chi = DirichletCharacter(20, 19)
    assert chi.parity == -1
    bound = certification_bound(20, chi)
    assert bound == sturm_bound(20, 2) + 1
    problem = StabilityProblem(20, chi)
    assert problem.bound == bound
    assert problem.valuations[-1] == 1
    assert mfinit(20, 1, chi, 1).dim == 0
