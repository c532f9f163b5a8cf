import pytest

from backend.modforms.characters import (
    DirichletCharacter,
    characters_mod,
    equivalent_class_reps,
    primitive_characters,
    quadratic_character_mod,
)


def test_characters_are_cached():
    assert DirichletCharacter(5, 2) is DirichletCharacter(5, 2)
    assert repr(DirichletCharacter(5, 2)) == "Mod(2, 5)"


def test_kronecker_characters(chi_minus4):
    assert chi_minus4.modulus == 4
    assert chi_minus4.parity == -1
    assert chi_minus4.order == 2
    assert chi_minus4.conductor == 4
    assert DirichletCharacter.kronecker(5).value(2) == -1
    assert DirichletCharacter.kronecker(8).modulus == 8
    assert DirichletCharacter.kronecker(-3).modulus == 3
    assert DirichletCharacter.kronecker(1).is_trivial()


def test_conrey_character_mod_five():
    chi = DirichletCharacter(5, 2)
    assert chi.order == 4
    assert not chi.is_even()
    assert chi.is_primitive()
    assert chi * chi == DirichletCharacter(5, 4)
    assert chi.conj() == DirichletCharacter(5, 3)
    assert chi.power(4).is_trivial()


def test_induction_keeps_the_primitive_part():
    chi = DirichletCharacter(5, 2)
    big = chi.induce(15)
    assert big.modulus == 15
    assert big.conductor == 5
    assert big.primitive() == chi
    assert big(3) == 0
    assert big(7) == chi(7)
    with pytest.raises(ValueError):
        chi.induce(12)


def test_orbit_representatives():
    assert [c.label for c in equivalent_class_reps(5)] == [1, 4, 2]
    assert [c.label for c in equivalent_class_reps(5, parity=-1)] == [2]
    assert DirichletCharacter(5, 3).orbit_representative() == DirichletCharacter(5, 2)


def test_character_groups():
    assert len(characters_mod(12)) == 4
    assert len(primitive_characters(4)) == 1
    assert len(primitive_characters(12)) == 1


def test_quadratic_character_mod():
    chi = quadratic_character_mod(12, -4)
    assert chi.modulus == 12
    assert chi.conductor == 4
    with pytest.raises(ValueError):
        quadratic_character_mod(5, -4)


def test_invalid_labels():
    with pytest.raises(ValueError):
        DirichletCharacter(10, 5)
    with pytest.raises(ValueError):
        DirichletCharacter(0, 1)
