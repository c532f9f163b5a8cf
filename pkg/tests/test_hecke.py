from fractions import Fraction

import mpmath
import pytest

from backend.modforms.characters import DirichletCharacter
from backend.modforms.hecke import (
    Eigenform,
    hecke_apply,
    mfeigenbasis,
    mfeigensearch,
    mfembed,
    mffields,
    mfheckemat,
    mfsearch,
    split_space,
)
from backend.modforms.linalg import charpoly, matmul, trace
from backend.modforms.qseries import parse_prefix, theta_char
from backend.modforms.spaces import mfinit
from backend.modforms.trace import TraceContext, trace_full


def test_hecke_matrices_on_rational_spaces(delta):
    assert mfheckemat(mfinit(1, 12, None, 1), 2) == [[-24]]
    assert mfheckemat(mfinit(11, 2, None, 1), 2) == [[-2]]
    assert mfheckemat(mfinit(11, 2, None, 1), 1) == [[1]]
    image = hecke_apply(mfinit(1, 12, None, 1), delta, 2)
    assert image.coefs(3) == [0, -24, 576, -6048]


@pytest.mark.parametrize("n", [2, 3, 5])
def test_hecke_traces_match_trace_formula(n):
    space = mfinit(22, 2, None, 1)
    assert trace(mfheckemat(space, n)) == trace_full(TraceContext.make(22, 2), n)


@pytest.mark.parametrize("N,k,char", [(35, 2, None), (1, 24, None), (15, 3, DirichletCharacter(5, 2))])
def test_hecke_operators_commute(N, k, char):
    space = mfinit(N, k, char, 1)
    T2, T3, T5 = (mfheckemat(space, n) for n in (2, 3, 5))
    assert matmul(T2, T3) == matmul(T3, T2)
    assert matmul(T2, T5) == matmul(T5, T2)


@pytest.mark.slow
def test_traces_agree_with_hecke_matrices_up_to_level_60():
    for N in range(1, 61):
        for k in (2, 4, 6):
            space = mfinit(N, k, None, 1)
            ctx = TraceContext.make(N, k)
            assert space.dim == trace_full(ctx, 1)
            for n in (2, 3, 5):
                assert trace(mfheckemat(space, n)) == trace_full(ctx, n), (N, k, n)


def test_hecke_matrix_needs_integral_weight():
    with pytest.raises(ValueError):
        mfheckemat(mfinit(4, Fraction(3, 2)), 2)


def test_level_23_eigenform():
    space = mfinit(23, 2, None, 0)
    assert charpoly(mfheckemat(space, 2)) == [-1, 1, 1]
    forms = mfeigenbasis(space)
    assert len(forms) == 1
    f = forms[0]
    assert f.degree == 2
    assert not f.is_rational()
    assert f.field.text() == "y^2 + y - 1"
    assert [K.text() for K in mffields(space)] == ["y^2 + y - 1"]
    rows = mfembed(f, 3)
    assert len(rows) == 2
    expected = [0, 1, -1.618033988749895, 2.23606797749979]
    assert all(abs(a - b) < 1e-9 for a, b in zip(rows[0], expected))


def test_level_26_splits_into_rational_forms():
    forms = mfeigenbasis(mfinit(26, 2, None, 0))
    assert len(forms) == 2
    assert all(f.is_rational() for f in forms)
    expansions = sorted(f.coefs(5) for f in forms)
    assert expansions == [[0, 1, -1, 1, 1, -3], [0, 1, 1, -3, 1, -1]]
    assert len(split_space(mfinit(26, 2, None, 0))) == 2


def test_eigenform_with_character():
    chi = DirichletCharacter(5, 2)
    forms = mfeigenbasis(mfinit(15, 3, chi, 0))
    fields = [f.field for f in forms]
    assert all(K.base_order == 4 for K in fields)
    assert [9, 0, 0, 0, 1] in [K.absolute_model()[0] for K in fields if K.degree == 2]


def test_eigenform_prefix_and_json():
    f = mfeigenbasis(mfinit(11, 2, None, 0))[0]
    assert isinstance(f, Eigenform)
    assert f.prefix() == "(eigen 11 2 chi:11:1 0 0)"
    assert parse_prefix(f.prefix()).coefs(5) == [0, 1, -2, -1, 2, 1]
    data = f.to_json(3)
    assert data["coefficients"] == ["0", "1", "-2", "-1"]
    assert data["field"]["relative"] == "y"
    rows = mfembed(f, 3)
    assert len(rows) == 1
    assert abs(rows[0][2] + 2) < 1e-12


def test_empty_space_has_no_eigenforms():
    assert mfeigenbasis(mfinit(22, 2, None, 0)) == []
    assert mfheckemat(mfinit(4, 2), 3) == [[4, 0], [0, 4]]


@pytest.mark.slow
def test_eigensearch_by_eigenvalues():
    found = mfeigensearch(range(1, 60), 2, [(2, -1), (3, -3)])
    assert [f.level for f in found] == [53, 58]


@pytest.mark.slow
def test_search_by_expansion_prefix():
    found = mfsearch(range(1, 31), 3, [0, 1, 2, 3, 4, 5, 6, 7, 8])
    assert len(found) == 2
    assert {f.coefs(9)[9] for f in found} == {-14, -21}
