import json

import numpy as np
import pytest

from ratelens.matrix_io import (
    MatrixFormatError,
    read_matrix_csv,
    sidecar_path,
    write_matrix_csv,
    write_sidecar,
)
from ratelens.probcore import Alphabet


def test_roundtrip(tmp_path):
    path = tmp_path / "m.csv"
    values = np.array([[0.0, 1.5, 1e-300], [2.0, 0.1, 3.0]])
    xa, ya = Alphabet((0, 600)), Alphabet((0.0, 1.570796, "z"))
    write_matrix_csv(path, values, xa, ya)
    back, bx, by = read_matrix_csv(path)
    assert np.array_equal(back, values)
    assert bx == xa and by == ya
    assert path.read_text().splitlines()[0] == "x\\y,0.0,1.570796,z"


def test_integer_values_written_plain(tmp_path):
    path = tmp_path / "c.csv"
    write_matrix_csv(path, np.array([[3, 0], [1, 12]]), Alphabet.range(2), Alphabet.range(2))
    assert path.read_text().splitlines()[1] == "0,3,0"


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("x\\y,0,1\n0,1\n", "row 2"),
        ("x\\y,0,1\n0,1,abc\n", "row 2, column 3"),
        ("x\\y,0,1\n0,1,nan\n", "non-finite"),
        ("x\\y,0,0\n0,1,2\n", "unique"),
    ],
)
def test_bad_files(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MatrixFormatError, match=match):
        read_matrix_csv(path)


def test_sidecar(tmp_path):
    out = write_sidecar(tmp_path / "r.csv", {"b": 1, "a": [1.5]})
    assert out == sidecar_path(tmp_path / "r.csv") == tmp_path / "r.json"
    assert json.loads(out.read_text()) == {"a": [1.5], "b": 1}
