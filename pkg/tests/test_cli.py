"""
Tests for the toral-recurrence command-line front end
"""
import json
import os

import pytest

from toral.cli import EXIT_CENSORED, EXIT_ERROR, EXIT_OK, main
from toral.reporting import read_csv, read_metadata
from toral.verification import AcceptanceSuite


def _run(tmp_path, *argv) -> int:
    return main(list(argv) + ["--out", str(tmp_path)])


@pytest.mark.smoke
def test_periodic_counts(tmp_path):
    assert _run(tmp_path, "periodic", "--map", "catmap", "--pmax", "4") == EXIT_OK
    path = tmp_path / "periodic.csv"
    assert [row["count"] for row in read_csv(str(path))] == ["1", "5", "16", "45"]
    config = json.loads(read_metadata(str(path))["config"])
    assert config["map"] == {"kind": "toral_auto_2d", "matrix": [[2, 1], [1, 1]], "factors": None}
    assert config["p_max"] == 4


def test_map_file_name_resolves_to_builtin(tmp_path):
    assert _run(tmp_path, "periodic", "--map", "catmap.json", "--pmax", "2") == EXIT_OK


def test_map_file_is_loaded(tmp_path, map_json):
    assert _run(tmp_path, "periodic", "--map", map_json, "--pmax", "3", "--plot") == EXIT_OK
    assert os.path.exists(tmp_path / "periodic.svg")


@pytest.mark.parametrize("argv", [
    ["periodic", "--map", "missing-map.json"],
    ["slope", "--rmin", "0.1", "--rmax", "0.01"],
    ["periodic", "--map", "doubling"],
    ["return-time", "--x", "0.1,0.2,0.3"],
])
def test_invalid_runs_exit_with_error(tmp_path, argv):
    assert _run(tmp_path, *argv) == EXIT_ERROR


def test_word_return_of_given_word(tmp_path):
    assert _run(tmp_path, "word-return", "--word", "0101") == EXIT_OK
    rows = read_csv(str(tmp_path / "word-return.csv"))
    assert rows == [{"index": "0", "length": "4", "tau": "2", "ratio": "0.5"}]


def test_return_time_at_fixed_point(tmp_path):
    assert _run(tmp_path, "return-time", "--x", "0,0", "--r", "0.01") == EXIT_OK
    row = read_csv(str(tmp_path / "return-time.csv"))[0]
    assert row["tau"] == "1"
    assert row["method"] == "exact_lattice"


def test_sampled_return_time(tmp_path):
    assert _run(tmp_path, "return-time", "--map", "doubling", "--x", "0.325", "--r", "0.025",
                "--method", "sample", "--samples", "500") == EXIT_OK
    assert read_csv(str(tmp_path / "return-time.csv"))[0]["tau"] == "2"


def test_slope_series_with_plot(tmp_path):
    assert _run(tmp_path, "slope", "--rmin", "1e-3", "--rmax", "1e-2", "--grid", "6", "--plot") == EXIT_OK
    assert len(read_csv(str(tmp_path / "slope.csv"))) == 6
    metadata = json.loads(read_metadata(str(tmp_path / "slope.csv"))["metadata"])
    assert metadata["censored"] is False
    assert os.path.exists(tmp_path / "slope.svg")


def test_exponents(tmp_path):
    assert _run(tmp_path, "exponents", "--iters", "2000") == EXIT_OK
    rows = read_csv(str(tmp_path / "exponents.csv"))
    assert [row["map_id"] for row in rows] == ["catmap", "catmap:estimated"]
    assert float(rows[0]["lower_bound"]) == pytest.approx(2.078087, rel=1e-5)


def test_covering(tmp_path):
    assert _run(tmp_path, "covering", "--radii", "0.01") == EXIT_OK
    row = read_csv(str(tmp_path / "covering.csv"))[0]
    assert row["n_formula"] == "5"


def test_trivial_bowen_ball(tmp_path):
    assert _run(tmp_path, "bowen", "--m", "0", "--n", "0", "--eps", "0.05", "--samples", "1000") == EXIT_OK


@pytest.mark.critical
def test_results_do_not_depend_on_thread_count(tmp_path):
    """
    Test identical seeds give byte-identical result files at 1 and 8 threads.

    Args:
        tmp_path: pytest temporary directory.
    """
    outputs = []
    for threads in ("1", "8"):
        out = tmp_path / threads
        argv = ["slope", "--method", "sample", "--samples", "1000", "--rmin", "0.02", "--rmax", "0.1",
                "--grid", "5", "--seed", "9", "--threads", threads, "--out", str(out)]
        assert main(argv) in (EXIT_OK, EXIT_CENSORED)
        outputs.append((out / "slope.csv").read_bytes())
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_quick_verification_suite(tmp_path):
    status = _run(tmp_path, "verify", "--quick")
    rows = read_csv(str(tmp_path / "verify.csv"))
    assert [row["check"] for row in rows] == [
        "exponents", "catmap_slope", "expanding_slope", "doubling_slope", "product_inequality",
        "dirac_product", "word_returns", "periodic_points", "covering", "spectrum", "oracles"]
    failed = {row["check"]: row["detail"] for row in rows if row["passed"] != "true"}
    assert failed == {}
    assert status == EXIT_OK


@pytest.mark.statistical
@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 2, 3, 5])
def test_quick_spectrum_check_holds_across_seeds(seed):
    result = AcceptanceSuite("quick", seed).check_spectrum()
    assert result.passed, result.detail
