from fractions import Fraction

import pytest

from backend.modforms.arith import euler_phi
from backend.modforms.characters import DirichletCharacter
from backend.modforms.errors import NotInSpaceError, ParityError
from backend.modforms.linalg import echelon
from backend.modforms.qseries import delta, eisenstein_level_one, eta_quotient, mfbd, mfmul, mfpow, theta_char
from backend.modforms.spaces import cusp_dim_from_new, mfdim, mfinit, mftobasis, space_code, sturm_bound

HALF = Fraction(1, 2)


def test_space_codes():
    assert space_code(None) == 4
    assert space_code("cusp") == 1
    assert space_code("3") == 3
    assert space_code(0) == 0
    with pytest.raises(ValueError):
        space_code("bogus")
    with pytest.raises(ValueError):
        space_code(7)


def test_sturm_bound():
    assert sturm_bound(1, 12) == 2
    assert sturm_bound(23, 2) == 5
    assert sturm_bound(12, Fraction(5, 2)) == 6


@pytest.mark.parametrize("N,k,code,dim", [
    (1, 12, 4, 2),
    (1, 12, 1, 1),
    (1, 0, 4, 1),
    (1, -2, 4, 0),
    (4, 3, 4, 0),
    (11, 2, 1, 1),
    (22, 2, 2, 2),
    (23, 2, 0, 2),
    (96, 4, 0, 6),
])
def test_dimensions(N, k, code, dim):
    assert mfdim(N, k, None, code) == dim


def test_cusp_dimension_from_new_dimensions():
    trivial = DirichletCharacter.trivial(22)
    assert cusp_dim_from_new(22, 2, trivial) == mfdim(22, 2, None, 1)
    assert cusp_dim_from_new(96, 4, None) == mfdim(96, 4, None, 1)


def test_joker_dimensions_cover_gamma1():
    table = mfdim(13, 2, "joker", 1)
    assert sum(d * euler_phi(order) for order, _, d in table) == 2
    assert all(chi.is_even() for _, chi, _ in table)


def test_level_one_full_space(delta):
    space = mfinit(1, 12)
    assert space.dim == 2
    assert space.contains(mfpow(eisenstein_level_one(4), 3))
    assert not space.contains(mfmul(eisenstein_level_one(4), eisenstein_level_one(6)))
    cusp = mfinit(1, 12, None, "cusp")
    assert mftobasis(cusp, delta) == [1]
    with pytest.raises(NotInSpaceError):
        cusp.to_basis(eisenstein_level_one(12))


def test_spaces_are_cached():
    assert mfinit(11, 2, None, 1) is mfinit(11, 2, None, "cusp")


def test_cusp_space_of_level_eleven():
    space = mfinit(11, 2, None, 1)
    f = eta_quotient([(1, 2), (11, 2)])
    assert space.contains(f)
    assert space.to_basis(f) == [1]
    assert not space.contains(mfbd(f, 2))
    assert space.params()["dim"] == 1


def test_old_space_comes_from_lower_levels():
    old = mfinit(22, 2, None, "old")
    assert old.dim == 2
    assert sorted(d for _, _, d in old.provenance) == [1, 2]
    f = eta_quotient([(1, 2), (11, 2)])
    assert old.contains(f)
    assert old.contains(mfbd(f, 2))


def test_new_space_basis_starts_with_trace_form():
    space = mfinit(23, 2, None, 0)
    assert space.dim == 2
    assert space.basis[0].coefs(4) == [0, 2, -1, 0, -1]


def test_parity_mismatch():
    with pytest.raises(ParityError):
        mfinit(4, 3)


def test_theta_powers_live_in_their_spaces(chi_minus4):
    theta = theta_char()
    assert mfinit(4, 2).contains(mfpow(theta, 4))
    assert mfinit(4, 5, chi_minus4).contains(mfpow(theta, 10))


def test_weight_three_halves_level_four():
    assert mfdim(4, Fraction(3, 2), None, 1) == 0
    space = mfinit(4, Fraction(3, 2))
    assert space.dim == 1
    assert space.contains(mfpow(theta_char(), 3))


@pytest.mark.slow
def test_weight_five_halves_level_twelve():
    space = mfinit(12, Fraction(5, 2))
    assert space.dim == 5
    rows, pivots = echelon([f.coefs(8) for f in space.basis])
    assert pivots == [0, 1, 2, 3, 4]
    assert rows == [
        [1, 0, 0, 0, 0, 12, 0, 0, 30],
        [0, 1, 0, 0, 0, -8, 14, 28, -20],
        [0, 0, 1, 0, 0, 8, -1, -10, 18],
        [0, 0, 0, 1, 0, -4, 4, 10, -10],
        [0, 0, 0, 0, 1, 2, -2, -4, 5],
    ]


def test_space_output():
    space = mfinit(1, 12, None, 1)
    data = space.to_json(3)
    assert data["basis"] == [["0", "1", "-24", "252"]]
    assert data["space"] == "cusp"
    assert space.text(3).splitlines()[1] == "  q - 24*q^2 + 252*q^3 + O(q^4)"
