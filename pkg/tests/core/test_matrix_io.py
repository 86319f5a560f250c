import json

import numpy as np
import pytest

from istiefel.core.errors import NonFiniteError, NonInvolutoryError, ShapeError
from istiefel.core.matrix_io import (
    MatrixPayload,
    load_matrix,
    load_spec,
    save_matrix,
    save_spec,
)


def test_save_and_load_matrix(tmp_path, rng):
    M = rng.standard_normal((4, 3))
    path = save_matrix(M, tmp_path / 'nested' / 'M.json')
    assert path.exists()
    doc = json.loads(path.read_text())
    assert doc['shape'] == [4, 3]
    assert doc['data'][:3] == M[0].tolist()
    assert np.array_equal(load_matrix(path), M)


def test_load_matrix_with_inconsistent_shape(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'shape': [2, 2], 'data': [1.0, 2.0, 3.0]}))
    with pytest.raises(ShapeError):
        load_matrix(path)


def test_load_matrix_with_negative_dimension(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'shape': [-1, 0], 'data': []}))
    with pytest.raises(ShapeError):
        load_matrix(path)


def test_payload_refuses_non_finite():
    with pytest.raises(NonFiniteError):
        MatrixPayload.from_array(np.array([[np.inf]]))


def test_payload_refuses_vectors():
    with pytest.raises(ShapeError):
        MatrixPayload.from_array(np.ones(3))


def test_save_and_load_spec(tmp_path, instance):
    spec, _ = instance
    loaded = load_spec(save_spec(spec, tmp_path / 'spec.json'))
    assert np.array_equal(loaded.A, spec.A)
    assert np.array_equal(loaded.J, spec.J)
    assert loaded.inertia_a == spec.inertia_a


def test_load_spec_validates_structure(tmp_path):
    path = tmp_path / 'spec.json'
    path.write_text(
        json.dumps(
            {
                'A': {'shape': [2, 2], 'data': [1.0, 0.0, 0.0, -1.0]},
                'J': {'shape': [1, 1], 'data': [2.0]},
            }
        )
    )
    with pytest.raises(NonInvolutoryError):
        load_spec(path)
