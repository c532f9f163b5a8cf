import json

from backend import config
from backend.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, main
from backend.modforms.arith import CLASSNO_FILE


def test_mfcoefs_prints_coefficients(capsys):
    assert main(["mfcoefs", "delta", "8"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0,1,-24,252,-1472,4830,-6048,-16744,84480"


def test_mfdim_with_space_option(capsys):
    assert main(["mfdim", "1", "12", "--space", "cusp"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "1"


def test_json_output(capsys):
    assert main(["mfdim", "23", "2", "--format", "json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["command"] == "mfdim"
    assert record["result"]["dim"] > 0


def test_usage_errors_exit_one(capsys):
    assert main(["mfnothing"]) == EXIT_USAGE
    assert main(["mfcoefs"]) == EXIT_USAGE
    assert main(["mfcoefs", "delta", "--prec", "2"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err


def test_computation_errors_exit_two(capsys):
    assert main(["mfinit", "4", "3"]) == EXIT_COMPUTATION
    assert "ParityError" in capsys.readouterr().err


def test_cache_dir_option_stores_class_numbers(tmp_path, capsys):
    target = tmp_path / "classes"
    assert main(["mfdim", "11", "2", "--space", "cusp", "--cache-dir", str(target)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "1"
    assert (target / CLASSNO_FILE).exists()
    assert config.CACHE_DIR != target
