"""Input validation helpers for vectors and bitstrings.

Vectors may be dense (anything ``np.asarray`` accepts as a 1-D float array)
or sparse (a 1 x n ``scipy.sparse`` row).  Bitstrings are 1-D uint8 arrays
with values in {0, 1}.  These helpers normalize inputs once at the API
boundary so the numeric code can assume clean shapes.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .exceptions import DimensionMismatchError, InvalidParamsError, ZeroVectorError


def is_sparse(x) -> bool:
    return sparse.issparse(x)


def as_vector(x, name: str = "x"):
    """Validate a single vector, returning it in canonical form.

    Dense inputs come back as 1-D float64 arrays; sparse inputs as CSR rows
    of shape (1, n).  Entries must be finite and the dimension >= 1.
    """
    if sparse.issparse(x):
        x = sparse.csr_matrix(x)
        if x.shape[0] != 1 or x.shape[1] < 1:
            raise InvalidParamsError(f"{name}: sparse vector must be a single row, got shape {x.shape}")
        if x.nnz and not np.all(np.isfinite(x.data)):
            raise InvalidParamsError(f"{name}: entries must be finite")
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidParamsError(f"{name}: expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParamsError(f"{name}: entries must be finite")
    return arr


def dimension_of(x) -> int:
    return x.shape[1] if sparse.issparse(x) else x.shape[0]


def check_same_dimension(x, y) -> None:
    nx, ny = dimension_of(x), dimension_of(y)
    if nx != ny:
        raise DimensionMismatchError(f"dimensions differ: {nx} vs {ny}")


def dot(x, y) -> float:
    """Inner product of two canonical vectors, sparse-aware."""
    if sparse.issparse(x) and sparse.issparse(y):
        return float((x @ y.T)[0, 0])
    if sparse.issparse(x):
        return float(np.asarray(x @ y).ravel()[0])
    if sparse.issparse(y):
        return float(np.asarray(y @ x).ravel()[0])
    return float(np.dot(x, y))


def norm(x) -> float:
    if sparse.issparse(x):
        return float(np.sqrt(x.multiply(x).sum()))
    return float(np.linalg.norm(x))


def check_nonzero(x, name: str = "x") -> None:
    if norm(x) == 0.0:
        raise ZeroVectorError(f"{name}: zero vector has no direction")


def to_dense(x) -> np.ndarray:
    """Explicit sparse -> dense conversion (1-D float64)."""
    if sparse.issparse(x):
        return np.asarray(x.todense(), dtype=float).ravel()
    return np.asarray(x, dtype=float)


def as_bits(v, name: str = "v") -> np.ndarray:
    """Validate a bitstring: 1-D, length >= 1, entries in {0, 1}."""
    arr = np.asarray(v)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidParamsError(f"{name}: expected a 1-D bitstring, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidParamsError(f"{name}: bits must be 0 or 1")
    return arr.astype(np.uint8)


def as_bit_matrix(V, name: str = "V") -> np.ndarray:
    """Validate a (n_rows, n_bits) matrix of bits."""
    arr = np.asarray(V)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise InvalidParamsError(f"{name}: expected a 2-D bit matrix, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidParamsError(f"{name}: bits must be 0 or 1")
    return arr.astype(np.uint8)


def check_finite_scalar(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise InvalidParamsError(f"{name} must be finite, got {value}")
    return value
