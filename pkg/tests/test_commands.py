from fractions import Fraction

import mpmath
import pytest

from backend.commands import (
    COMMANDS,
    UsageError,
    dispatch,
    list_commands,
    parse_character,
    parse_complex,
    parse_levels,
    parse_matrix,
    parse_pairs,
    parse_point,
    parse_weight,
)
from backend.modforms import analytic
from backend.modforms.arith import CLASSNO_FILE, ArithCache, euler_phi
from backend.modforms.characters import DirichletCharacter
from backend.modforms.errors import ParityError

PREFIX = "(mul (E 4) (lin 2 (pow (delta) 2) (E 24) 1 1))"


def test_parse_weight():
    assert parse_weight("12") == 12
    assert parse_weight("5/2") == Fraction(5, 2)
    with pytest.raises(UsageError):
        parse_weight("five")


def test_parse_character():
    assert parse_character(None) is None
    assert parse_character("1") is None
    assert parse_character("-4") == DirichletCharacter.kronecker(-4)
    assert parse_character("2 mod 5") == DirichletCharacter(5, 2)
    assert parse_character("Mod(2,5)") == DirichletCharacter(5, 2)
    with pytest.raises(UsageError):
        parse_character("chi")
    with pytest.raises(UsageError):
        parse_character("2 mod 4")


def test_parse_levels():
    assert parse_levels("1..5") == [1, 2, 3, 4, 5]
    assert parse_levels("11,23") == [11, 23]
    assert parse_levels([7, 8]) == [7, 8]
    with pytest.raises(UsageError):
        parse_levels("5..1")


def test_parse_matrix():
    assert parse_matrix("[1,0;2,1]") == (1, 0, 2, 1)
    assert parse_matrix("0,-1,1,0") == (0, -1, 1, 0)
    assert parse_matrix("1/2,0,0,2")[0] == Fraction(1, 2)
    with pytest.raises(UsageError):
        parse_matrix("1,2,3")


def test_parse_complex_and_points():
    assert parse_complex("6+13j") == mpmath.mpc(6, 13)
    assert parse_complex("0,1") == mpmath.mpc(0, 1)
    assert parse_complex("I") == mpmath.mpc(0, 1)
    assert parse_complex("2") == 2
    assert parse_point("oo") == analytic.INFINITY
    assert parse_point("1/2") == Fraction(1, 2)
    assert parse_point(0) == Fraction(0)
    with pytest.raises(UsageError):
        parse_complex("abc")


def test_parse_pairs():
    assert parse_pairs(["2=-1", "3=-3"]) == [(2, -1), (3, -3)]
    assert parse_pairs({"2": -2}) == [(2, -2)]
    with pytest.raises(UsageError):
        parse_pairs(["2:-1"])


def test_registry_lists_every_command():
    names = [c["name"] for c in list_commands()]
    assert names == list(COMMANDS)
    assert {"mfcoefs", "mfdim", "mfeigenbasis", "lfunmf", "mfslashexpansion", "mfatkininit"} <= set(names)


def test_mfcoefs_of_delta():
    result = dispatch("mfcoefs", {"form": "delta", "n": 8})
    assert result.text == "0,1,-24,252,-1472,4830,-6048,-16744,84480"
    assert result.data["coefficients"][:3] == ["0", "1", "-24"]
    assert result.data["form"] == "(delta)"


def test_mfdim():
    assert dispatch("mfdim", {"level": 1, "weight": 12, "space": "cusp"}).data == {"dim": 1}
    assert dispatch("mfdim", {"level": 23, "weight": "2", "space": "new"}).text == "2"


def test_mfdim_joker_scans_characters():
    rows = dispatch("mfdim", {"level": 13, "weight": 2, "char": "0", "space": "cusp"}).data["dims"]
    assert sum(r["dim"] * euler_phi(r["order"]) for r in rows) == 2


def test_usage_errors():
    with pytest.raises(UsageError):
        dispatch("mfnothing", {})
    with pytest.raises(UsageError):
        dispatch("mfcoefs", {"form": "delta", "colour": "red"})
    with pytest.raises(UsageError):
        dispatch("mfcoefs", {"form": "delta", "prec": 3})
    with pytest.raises(UsageError):
        dispatch("mfcoefs", {"n": 4})
    with pytest.raises(UsageError):
        dispatch("mfcoefs", {"form": "delta", "n": "many"})
    with pytest.raises(UsageError):
        dispatch("mfeigensearch", {"weight": 2})


def test_parity_error_reaches_the_caller():
    with pytest.raises(ParityError):
        dispatch("mfinit", {"level": 4, "weight": 3})


def test_mfparams_and_mfdescribe():
    assert dispatch("mfparams", {"form": PREFIX}).text == "[1, 28, Mod(1, 1), Q]"
    assert dispatch("mfdescribe", {"form": PREFIX}).text == PREFIX


def test_mftobasis_theta_power():
    result = dispatch("mftobasis", {"form": "(pow (theta) 4)", "level": 4, "weight": 2})
    assert len(result.data["coordinates"]) == 2
    assert result.data["space"]["level"] == 4


def test_mfheckemat():
    result = dispatch("mfheckemat", {"level": 1, "weight": 12, "n": 2, "space": "cusp"})
    assert result.text == "[-24]"
    assert result.data == {"matrix": [["-24"]]}


def test_mfeigenbasis_text():
    result = dispatch("mfeigenbasis", {"level": 23, "weight": 2, "n": 4})
    assert result.text.startswith("[y^2 + y - 1] ")
    assert len(result.data["eigenforms"]) == 1
    assert result.data["eigenforms"][0]["prefix"].startswith("(eigen 23 2")


def test_eigen_index_out_of_range():
    with pytest.raises(UsageError):
        dispatch("mfcoefs", {"form": "eigen:3", "level": 11, "weight": 2})


def test_mfeigensearch_small_range():
    result = dispatch("mfeigensearch", {"levels": "11..14", "weight": 2, "a": ["2=-2"]})
    assert result.data["levels"] == [11]


def test_dispatch_persists_the_class_number_table(tmp_path):
    target = tmp_path / "table"
    dispatch("mfdim", {"level": 23, "weight": 2, "space": "cusp"}, cache_dir=target)
    assert (target / CLASSNO_FILE).exists()
    fresh = ArithCache(16)
    assert fresh.load(target)
    assert fresh.class_number(-23) == (3, 2)


def test_cache_dir_is_not_a_request_argument(tmp_path):
    with pytest.raises(UsageError):
        dispatch("mfdim", {"level": 11, "weight": 2, "cache_dir": str(tmp_path)})


def test_mfsymboleval_polynomial_and_value():
    result = dispatch("mfsymboleval", {"form": "delta", "prec": 20})
    assert len(result.data["polynomial"]) == 11
    assert result.text.count("X") == 10
    assert "*X^10" in result.text.split(" + ")[0]
    value = dispatch("mfsymboleval", {"form": "delta", "a": "0", "b": "oo", "X": "0", "prec": 20})
    assert set(value.data) == {"value"}
