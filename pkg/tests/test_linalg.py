from fractions import Fraction

import pytest

from backend.modforms import linalg
from backend.modforms.cyclotomic import CyclotomicElement

F = Fraction


def test_echelon_and_rank():
    R, pivots = linalg.echelon([[2, 4, 6], [1, 2, 4], [3, 6, 10]])
    assert pivots == [0, 2]
    assert R == [[1, 2, 0], [0, 0, 1]]
    assert linalg.rank([[1, 2], [2, 4]]) == 1


def test_incremental_echelon_reports_rank_growth():
    ech = linalg.IncrementalEchelon()
    assert ech.add([F(1), F(1), F(0)])
    assert ech.add([F(0), F(1), F(1)])
    assert not ech.add([F(1), F(2), F(1)])
    assert len(ech) == 2


def test_solvers():
    assert linalg.solve_left([[1, 0], [1, 1]], [3, 5]) == [-2, 5]
    assert linalg.solve([[1, 1], [1, 1]], [1, 2]) is None
    assert linalg.kernel([[1, 1]]) == [[-1, 1]]
    assert linalg.left_kernel([[1, 2], [2, 4]]) == [[-2, 1]]
    assert linalg.inverse([[2, 1], [1, 1]]) == [[1, -1], [-1, 2]]
    with pytest.raises(ZeroDivisionError):
        linalg.inverse([[1, 2], [2, 4]])


def test_charpoly_is_monic_low_degree_first():
    assert linalg.charpoly([[0, 1], [1, 1]]) == [-1, -1, 1]
    A = [[F(2), F(1), F(0)], [F(0), F(2), F(0)], [F(0), F(0), F(3)]]
    assert linalg.charpoly(A) == [-12, 16, -7, 1]
    assert linalg.trace(A) == 7


def test_polynomial_helpers():
    p = [F(-1), F(0), F(1)]
    q, r = linalg.poly_divmod(p, [F(-1), F(1)])
    assert q == [1, 1] and linalg.poly_trim(r) == []
    assert linalg.poly_gcd(p, [F(1), F(1)]) == [1, 1]
    assert linalg.poly_eval(p, 3) == 8
    assert linalg.poly_deriv(p) == [0, 2]
    assert linalg.poly_is_squarefree(p)
    assert not linalg.poly_is_squarefree([F(1), F(2), F(1)])


def test_factor_rational():
    factors = linalg.factor_rational([F(-1), F(0), F(1)])
    assert factors == [([-1, 1], 1), ([1, 1], 1)]
    assert linalg.factor_rational([F(-1), F(1), F(1)]) == [([-1, 1, 1], 1)]


def test_factor_over_cyclotomic_splits_x2_plus_1():
    factors = linalg.factor_over_cyclotomic([F(1), F(0), F(1)], 4)
    assert len(factors) == 2
    i = CyclotomicElement.zeta(4)
    roots = sorted(str(-f[0]) for f in factors)
    assert all(len(f) == 2 for f in factors)
    assert roots == sorted([str(i), str(-i)])
