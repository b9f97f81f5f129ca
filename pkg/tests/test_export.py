import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cuntzkit import cuntz as cz
from cuntzkit import discretize as dz
from cuntzkit import dynamics as dyn
from cuntzkit import export as ex

finite = st.floats(-1e6, 1e6, allow_nan=False)
matrices = hnp.arrays(complex, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6), elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False))


@given(matrices)
def test_binary_round_trip(X):
    data = ex.dumps_matrix(X)
    assert len(data) == 24 + 16 * X.size
    assert np.array_equal(ex.loads_matrix(data), X)


@given(matrices)
def test_csv_round_trip(X):
    assert np.array_equal(ex.matrix_from_csv(ex.matrix_to_csv(X)), X)


def test_header_layout():
    data = ex.dumps_matrix(np.eye(2, 3))
    assert data[:8] == b"CUNTZMAT"
    assert int.from_bytes(data[8:16], "little") == 2 and int.from_bytes(data[16:24], "little") == 3


def test_bad_inputs():
    data = bytearray(ex.dumps_matrix(np.eye(2)))
    with pytest.raises(ex.FormatError, match="magic"):
        ex.loads_matrix(b"NOTCUNTZ" + bytes(data[8:]))
    with pytest.raises(ex.FormatError):
        ex.loads_matrix(bytes(data[:-1]))
    with pytest.raises(ex.FormatError):
        ex.loads_matrix(b"short")
    with pytest.raises(ex.FormatError):
        ex.matrix_to_csv(np.zeros((300, 300)))
    with pytest.raises(ex.FormatError):
        ex.matrix_from_csv("1,2,3\n")


def test_write_family(tmp_path):
    sys = dyn.full_shift(2)
    F = cz.cuntz_from_sections(sys, dyn.decompose(sys), dz.CylinderBasis(2, 2), dz.CylinderBasis(2, 3))
    d = ex.write_family(tmp_path / "fam", F, seed=4)
    meta = json.loads((d / "family.json").read_text())
    assert meta["N"] == 2 and meta["exact"] and meta["seed"] == 4
    for i, name in enumerate(meta["isometries"]):
        M = ex.read_matrix(d / name)
        assert M.shape == (8, 4)
        assert np.allclose(M, F.isometries[i].entries.to_numpy())
