from fractions import Fraction

import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.eisenstein import (
    EisensteinSeries,
    EisKey,
    eisenstein_dim,
    generalized_bernoulli,
    weisinger_basis,
    weisinger_basis_rational,
)
from backend.modforms.errors import ParityError

ONE = DirichletCharacter.trivial(1)


def test_level_one_series():
    g = EisensteinSeries(4, ONE, ONE)
    assert g.coefs(3) == [Fraction(1, 240), 1, 9, 28]
    assert g.hecke_eigenvalue(2) == 9
    assert not g.quasi
    assert EisensteinSeries(2, ONE, ONE).quasi


def test_series_with_odd_character(chi_minus4):
    g = EisensteinSeries(3, ONE, chi_minus4)
    assert g.level == 4
    assert g.coefs(5) == [Fraction(-1, 4), 1, 1, -8, 1, 26]
    h = EisensteinSeries(3, chi_minus4, ONE)
    assert h.coefs(3) == [0, 1, 4, 8]


def test_parity_is_checked():
    with pytest.raises(ParityError):
        EisensteinSeries(3, ONE, ONE)
    with pytest.raises(ParityError):
        weisinger_basis(4, 2, DirichletCharacter.kronecker(-4))


def test_generalized_bernoulli(chi_minus4):
    assert generalized_bernoulli(1, chi_minus4) == Fraction(-1, 2)
    assert generalized_bernoulli(3, chi_minus4) == Fraction(3, 2)
    assert generalized_bernoulli(2, ONE) == Fraction(1, 6)


def test_weight_two_combination_is_modular():
    f = EisKey(2, ONE, ONE, 2).form()
    assert not f.quasi
    assert f.level == 2
    assert f.coefs(3) == [Fraction(-1, 48), Fraction(-1, 2), Fraction(-1, 2), -2]


def test_basis_keys(chi_minus4):
    keys = weisinger_basis(4, 2, DirichletCharacter.trivial(4))
    assert sorted(key.m for key in keys) == [2, 4]
    assert eisenstein_dim(4, 3, chi_minus4) == 2
    assert eisenstein_dim(4, 2, chi_minus4) == 0
    assert eisenstein_dim(1, 12, ONE) == 1


def test_rational_basis_spans_conjugates():
    chi = DirichletCharacter(5, 2)
    keys = weisinger_basis(5, 3, chi)
    forms = weisinger_basis_rational(5, 3, chi)
    assert len(forms) == len(keys)
    assert all(f.weight == 3 for f in forms)
