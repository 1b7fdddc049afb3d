from fractions import Fraction

import numpy as np
import pytest

from maxproj.matrixio import MatrixParseError, format_matrix, parse_matrix, read_matrix


def test_parse_decimal_and_rational():
    rows = parse_matrix("# comment\n2 2\n1 -1/3\n0.25 2\n")
    assert rows == [[1, Fraction(-1, 3)], [Fraction(1, 4), 2]]


def test_bad_entry_reports_position():
    with pytest.raises(MatrixParseError) as err:
        parse_matrix("2 2\n1 2\n3 x\n")
    assert (err.value.line, err.value.col) == (3, 3)


@pytest.mark.parametrize("text", ["", "2\n1 2\n", "2 2\n1 2\n", "1 2\n1 2 3\n", "1 1\n1\n2\n", "2 2\n1 2\n3 1/0\n"])
def test_malformed(text):
    with pytest.raises(MatrixParseError):
        parse_matrix(text)


def test_roundtrip(tmp_path):
    a = [[Fraction(1, 3), Fraction(-2)], [Fraction(0), Fraction(5, 7)]]
    path = tmp_path / "m.txt"
    path.write_text(format_matrix(a))
    assert read_matrix(path, exact=True) == a
    np.testing.assert_allclose(read_matrix(path), [[1 / 3, -2], [0, 5 / 7]])
