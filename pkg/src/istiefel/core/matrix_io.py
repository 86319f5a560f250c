"""
JSON persistence for dense matrices and manifold specifications.

A matrix document is `{"shape": [rows, cols], "data": [...]}` with the
entries in row-major order. A spec document holds two such matrices under
the keys "A" and "J".

Dependencies:
- pydantic for document validation
"""

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from config.logging import setup_logging
from istiefel.core.errors import NonFiniteError, ShapeError
from istiefel.core.manifold import ManifoldSpec, make_spec

setup_logging()
logger = logging.getLogger(__name__)


class MatrixPayload(BaseModel):
    shape: tuple[int, int]
    data: list[float]

    @field_validator('shape')
    @classmethod
    def _non_negative(cls, shape):
        if min(shape) < 0:
            raise ValueError(f'negative dimension in shape {shape}')
        return shape

    @model_validator(mode='after')
    def _consistent(self):
        rows, cols = self.shape
        if len(self.data) != rows * cols:
            raise ValueError(f'shape {rows}×{cols} needs {rows * cols} entries, got {len(self.data)}')
        if not all(np.isfinite(self.data)):
            raise ValueError('matrix contains NaN or Inf entries')
        return self

    @classmethod
    def from_array(cls, M: np.ndarray) -> 'MatrixPayload':
        M = np.asarray(M, dtype=float)
        if M.ndim != 2:
            raise ShapeError(f'only 2-D matrices can be stored, got shape {M.shape}')
        if not np.all(np.isfinite(M)):
            raise NonFiniteError('refusing to store a matrix with NaN or Inf entries')
        return cls(shape=M.shape, data=M.ravel(order='C').tolist())

    def to_array(self) -> np.ndarray:
        return np.asarray(self.data, dtype=float).reshape(self.shape, order='C')


class SpecPayload(BaseModel):
    A: MatrixPayload
    J: MatrixPayload


def _parse(model: type[BaseModel], path: Path):
    try:
        return model.model_validate_json(Path(path).read_text())
    except ValidationError as e:
        raise ShapeError(f'{path}: invalid matrix document ({e.error_count()} errors)') from e


def save_matrix(M: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(MatrixPayload.from_array(M).model_dump_json())
    logger.debug(f'saved {np.shape(M)} matrix to {path}')
    return path


def load_matrix(path: str | Path) -> np.ndarray:
    return _parse(MatrixPayload, path).to_array()


def save_spec(spec: ManifoldSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = SpecPayload(A=MatrixPayload.from_array(spec.A), J=MatrixPayload.from_array(spec.J))
    path.write_text(json.dumps(payload.model_dump()))
    return path


def load_spec(path: str | Path) -> ManifoldSpec:
    """Read A and J and validate them through `make_spec`."""
    payload = _parse(SpecPayload, path)
    return make_spec(payload.A.to_array(), payload.J.to_array())
