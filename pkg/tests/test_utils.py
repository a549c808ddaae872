import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

import src.utils as utils
from src.errors import InputFileError


@pytest.mark.parametrize("delimiter", [",", "\t", ";"])
def test_detect_delimiter(tmp_path, delimiter):
    infile = tmp_path / "matrix.csv"
    infile.write_text(f"# comment line\n1{delimiter}2{delimiter}3\n4{delimiter}5{delimiter}6\n")

    assert utils.detect_delimiter(infile) == delimiter


def test_detect_delimiter_single_column(tmp_path):
    infile = tmp_path / "vector.csv"
    infile.write_text("1.5\n-2\n")

    assert utils.detect_delimiter(infile) == ","


def test_read_matrix(tmp_path):
    infile = tmp_path / "matrix.csv"
    infile.write_text("1, 2.5, -3\n4e-1, 5, 6\n")

    assert_array_equal(utils.read_matrix(infile), [[1.0, 2.5, -3.0], [0.4, 5.0, 6.0]])


def test_read_matrix_header(tmp_path):
    infile = tmp_path / "matrix.csv"
    infile.write_text("a\tb\n1\t2\n3\t4\n")

    assert_array_equal(utils.read_matrix(infile, header=True), [[1.0, 2.0], [3.0, 4.0]])


def test_read_matrix_non_numeric(tmp_path):
    infile = tmp_path / "matrix.csv"
    infile.write_text("1,2\n3,4\n5,x\n")

    with pytest.raises(InputFileError, match="non-numeric") as error:
        utils.read_matrix(infile)
    assert error.value.line == 3

    with pytest.raises(InputFileError, match="does not exist"):
        utils.read_matrix(tmp_path / "missing.csv")


def test_read_empty_matrix(tmp_path):
    infile = tmp_path / "empty.csv"
    infile.write_text("")

    assert utils.read_matrix(infile).size == 0


def test_read_vector(tmp_path):
    column = tmp_path / "column.csv"
    column.write_text("1\n-1\n1\n")
    row = tmp_path / "row.csv"
    row.write_text("1,-1,1\n")

    assert_array_equal(utils.read_vector(column), [1.0, -1.0, 1.0])
    assert_array_equal(utils.read_vector(row), [1.0, -1.0, 1.0])

    matrix = tmp_path / "matrix.csv"
    matrix.write_text("1,2\n3,4\n")
    with pytest.raises(InputFileError, match="2x2 matrix"):
        utils.read_vector(matrix)


def test_write_vector(tmp_path):
    values = np.array([0.1, -2.0, 1e-20])
    outfile = utils.write_vector(values, tmp_path / "nested" / "x.csv")

    assert outfile.read_text().splitlines() == ["0.1", "-2.0", "1e-20"]
    assert_array_equal(utils.read_vector(outfile), values)


def test_write_results(tmp_path):
    table = pd.DataFrame({"method": ["lasso", "soglasso"], "sq_error": [0.25, 1.0 / 3.0]})

    outfile = utils.write_results(table, tmp_path / "out" / "results.csv")
    lines = outfile.read_text().splitlines()
    assert lines[0] == "# schema=v1"
    assert lines[1].startswith("# generated=")
    assert lines[2] == "method,sq_error"
    assert lines[4] == "soglasso,0.3333333333"

    pd.testing.assert_frame_equal(utils.read_results(outfile), table, atol=1e-10)


def test_write_results_reproducible(tmp_path):
    table = pd.DataFrame({"n": [50, 100], "mean_sq_error": [0.5, 0.25]})

    first = utils.write_results(table, tmp_path / "first.csv", reproducible=True, comments=["seed=3"])
    second = utils.write_results(table, tmp_path / "second.csv", reproducible=True, comments=["seed=3"])

    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[:3] == ["# schema=v1", "# seed=3", "n,mean_sq_error"]


def test_make_dir(tmp_path):
    target = utils.make_dir(tmp_path, "a")
    assert target.is_dir()
    assert utils.make_dir(tmp_path, "a") == target


def test_format_results_matches_file(tmp_path):
    table = pd.DataFrame({"check": ["width"], "empirical": [2.0 / 3.0]})

    text = utils.format_results(table, reproducible=True)
    assert text.splitlines() == ["# schema=v1", "check,empirical", "width,0.6666666667"]
    assert utils.write_results(table, tmp_path / "t.csv", reproducible=True).read_text() == text
    assert utils.format_results(table).splitlines()[1].startswith("# generated=")
