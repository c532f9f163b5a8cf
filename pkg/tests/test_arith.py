from fractions import Fraction

import pytest

from backend.modforms import arith
from backend.modforms.arith import ArithCache


@pytest.mark.parametrize("d,expected", [(-3, (1, 6)), (-4, (1, 4)), (-7, (1, 2)), (-20, (2, 2)), (-23, (3, 2))])
def test_class_numbers(d, expected):
    assert arith.class_number(d) == expected


@pytest.mark.parametrize("d", [-5, 4, 0])
def test_class_number_rejects_non_discriminants(d):
    with pytest.raises(ValueError):
        arith.class_number(d)


def test_cache_grows_on_demand():
    cache = ArithCache(16)
    assert cache.class_number(-23) == (3, 2)
    assert cache.classno_bound >= 23
    assert cache.class_number(-71) == (7, 2)
    assert cache.classno_bound >= 71


def test_cache_save_and_load(tmp_path):
    cache = ArithCache(200)
    cache.class_number(-199)
    path = cache.save(tmp_path)
    assert path.read_text().startswith("# classno v1")

    fresh = ArithCache(16)
    assert fresh.load(tmp_path)
    assert fresh.classno_bound == cache.classno_bound
    assert fresh.class_number(-163) == (1, 2)


def test_cache_load_ignores_unknown_files(tmp_path):
    cache = ArithCache(16)
    assert not cache.load(tmp_path)
    (tmp_path / arith.CLASSNO_FILE).write_text("garbage\n1 2 3\n")
    assert not cache.load(tmp_path)


@pytest.mark.parametrize("N,index", [(1, 1), (4, 6), (12, 24), (23, 24), (96, 192)])
def test_gamma0_index(N, index):
    assert arith.gamma0_index(N) == index


def test_crt_pair():
    assert arith.crt_pair(2, 3, 3, 5) == (8, 15)
    assert arith.crt_pair(1, 2, 0, 4) is None


@pytest.mark.parametrize("D,n,value", [(-4, 3, -1), (5, 2, -1), (-3, 2, -1), (8, 3, -1), (-4, 5, 1), (12, 6, 0)])
def test_kronecker(D, n, value):
    assert arith.kronecker(D, n) == value


def test_fundamental_discriminants():
    assert all(arith.is_fundamental(D) for D in (-4, -3, -8, 5, 8, 12))
    assert not any(arith.is_fundamental(D) for D in (-12, 9, 2))


def test_small_helpers():
    assert arith.euler_phi(12) == 4
    assert arith.moebius(30) == -1
    assert arith.moebius(12) == 0
    assert arith.sigma(6, 1) == 12
    assert arith.sigma(2, 3) == 9
    assert arith.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert arith.prime_divisors(60) == [2, 3, 5]
    assert arith.lcm(4, 6, 10) == 60
    assert arith.ceil_fraction(Fraction(7, 2)) == 4
    assert arith.ceil_fraction(Fraction(-7, 2)) == -3
