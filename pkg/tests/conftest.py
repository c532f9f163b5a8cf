from fractions import Fraction

import mpmath
import pytest

from backend import config
from backend.modforms.characters import DirichletCharacter
from backend.modforms.qseries import delta as _delta


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "CACHE_DIR", tmp_path)
    return tmp_path


@pytest.fixture
def delta():
    return _delta()


@pytest.fixture
def chi_minus4():
    return DirichletCharacter.kronecker(-4)


@pytest.fixture
def dps30():
    with mpmath.workdps(30):
        yield


def close(x, y, tol=1e-20):
    return abs(mpmath.mpmathify(x) - mpmath.mpmathify(y)) < tol


def fractions(values):
    return [Fraction(v) for v in values]
