"""
CSV ingestion, simulation and exports
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from orthant_mc.core.design import build_signed_design
from orthant_mc.core.propriety import check_propriety
from orthant_mc.data.data_loader import load_csv, load_q_file, simulate, write_draws_csv
from orthant_mc.utils.exceptions import DataValidationError, SingularDesignError
from tests.conftest import Z_TOL


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_intercept_prepended(tmp_path):
    d = load_csv(_write(tmp_path, "1,0.5\n0,-0.3\n"), intercept=True)
    assert (d.n, d.p) == (2, 2)
    assert_allclose(d.X, [[1.0, 0.5], [1.0, -0.3]])
    assert_array_equal(d.y, [1, 0])


def test_non_binary_response_names_row(tmp_path):
    path = _write(tmp_path, "1,0.1\n0,0.2\n2,0.3\n1,0.4\n")
    with pytest.raises(DataValidationError, match="row 3"):
        load_csv(path)


def test_header_skipped(tmp_path):
    d = load_csv(_write(tmp_path, "y,x1\n1,0.5\n0,-0.3\n1,2.0\n"))
    assert (d.n, d.p) == (3, 1)
    assert_allclose(d.X[:, 0], [0.5, -0.3, 2.0])


def test_errors_name_file_line_past_header_and_blanks(tmp_path):
    path = _write(tmp_path, "y,x1\n\n1,0.5\n\n0,0.2\n3,0.1\n")
    with pytest.raises(DataValidationError, match="row 6 has y = 3"):
        load_csv(path)


def test_blank_lines_are_skipped(tmp_path):
    d = load_csv(_write(tmp_path, "y,x1\n\n1,0.5\n\n0,0.2\n"))
    assert_array_equal(d.y, [1, 0])
    assert_allclose(d.X[:, 0], [0.5, 0.2])


def test_ragged_row(tmp_path):
    with pytest.raises(DataValidationError, match="row 2"):
        load_csv(_write(tmp_path, "1,0.5,1.0\n0,0.2\n"))


def test_missing_file(tmp_path):
    with pytest.raises(DataValidationError):
        load_csv(tmp_path / "absent.csv")


def test_empty_file(tmp_path):
    with pytest.raises(DataValidationError):
        load_csv(_write(tmp_path, "y,x1\n"))


def test_rank_deficient_design(tmp_path):
    with pytest.raises(SingularDesignError):
        load_csv(_write(tmp_path, "1,1,2\n0,2,4\n1,3,6\n"))


def test_simulate_round_trip(tmp_path):
    out = tmp_path / "sim.csv"
    d = simulate(25, 3, [0.2, -0.4, 0.7], seed=5, out=out)
    loaded = load_csv(out)
    assert (loaded.n, loaded.p) == (25, 3)
    assert_array_equal(loaded.X, d.X)
    assert_array_equal(loaded.y, d.y)
    assert out.read_text().splitlines()[0] == "y,const,x1,x2"


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    simulate(50, 2, [0.1, 0.9], seed=17, out=a)
    simulate(50, 2, [0.1, 0.9], seed=17, out=b)
    assert a.read_bytes() == b.read_bytes()


def test_simulate_zero_beta_balanced():
    d = simulate(10_000, 2, [0.0, 0.0], seed=3)
    se = 0.5 / np.sqrt(d.n)
    assert abs(d.y.mean() - 0.5) <= Z_TOL * se


def test_simulate_saturated_is_improper():
    d = simulate(30, 2, [50.0, 0.0], seed=4)
    assert d.y.min() == 1
    assert not check_propriety(build_signed_design(d)).is_proper


def test_simulate_rejects_bad_beta():
    with pytest.raises(DataValidationError):
        simulate(10, 2, [0.1], seed=0)


def test_write_draws(tmp_path):
    B = np.arange(6.0).reshape(3, 2) / 7
    path = write_draws_csv(B, tmp_path / "draws.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "beta_1,beta_2"
    assert len(lines) == 4
    assert float(lines[2].split(",")[1]) == B[1, 1]


def test_load_q_file(tmp_path):
    Q = load_q_file(_write(tmp_path, "2.0,0.5\n0.5,1.0\n", "q.csv"))
    assert_allclose(Q, [[2.0, 0.5], [0.5, 1.0]])
    with pytest.raises(DataValidationError):
        load_q_file(_write(tmp_path, "1.0,0.0\n", "bad.csv"))
