"""Random-projection hashing for the angular distance.

A hash family is a stack of hyperplane normals with i.i.d. standard-normal
entries.  One normal ``r`` defines a one-bit hash: 0 if ``r . x < 0``, 1
otherwise (ties at exactly 0 map to 1, so hashes are reproducible even for
inputs orthogonal to a normal).  Stacking ``n_bits`` independent normals
gives an ``n_bits``-bit hash whose per-bit mismatch probability, over the
draw of the family, equals the angular distance between the inputs.

Families are reproducible bit-for-bit from ``(seed, dim, n_bits)``: normals
are drawn by mapping the PCG64 integer stream through the inverse normal
CDF, so two parties sharing a seed agree on the family without ever
shipping the matrix.  The construction is recorded in ``version`` and
checked on deserialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from . import validation as _v
from .exceptions import DimensionMismatchError, InvalidParamsError

# Gaussian generation recipe baked into serialized families.  Bump if the
# draw procedure ever changes, so stale seeds fail loudly instead of
# silently hashing differently.
FAMILY_VERSION = "pcg64-ndtri-v1"

_U53 = 2.0 ** -53


def _standard_normals(seed: int, shape: tuple[int, ...]) -> np.ndarray:
    # Inverse-CDF transform of exact dyadic uniforms in (0, 1).  Every step
    # (PCG64 integer stream, scaling by 2^-53, ndtri) is deterministic
    # across platforms, unlike the ziggurat behind standard_normal.
    rng = np.random.Generator(np.random.PCG64(seed))
    k = rng.integers(1, 2 ** 53, size=shape, dtype=np.int64)
    return ndtri(k * _U53)


@dataclass(frozen=True)
class ProjectionFamily:
    """An instantiated hash family: ``n_bits`` hyperplane normals in R^dim.

    ``seed`` is kept when the family was derived from one (the normals are
    then redundant and re-derivable); families built from explicit normals
    carry ``seed=None`` and cannot be serialized.
    """

    dim: int
    n_bits: int
    normals: np.ndarray = field(repr=False)
    seed: int | None = None
    version: str = FAMILY_VERSION

    def __post_init__(self):
        normals = np.asarray(self.normals, dtype=float)
        if self.dim < 1 or self.n_bits < 1:
            raise InvalidParamsError(f"need dim >= 1 and n_bits >= 1, got ({self.dim}, {self.n_bits})")
        if normals.shape != (self.n_bits, self.dim):
            raise InvalidParamsError(
                f"normals shape {normals.shape} does not match (n_bits, dim) = ({self.n_bits}, {self.dim})"
            )
        if not np.all(np.isfinite(normals)):
            raise InvalidParamsError("normals must be finite")
        if not np.any(normals != 0.0, axis=1).all():
            raise InvalidParamsError("each normal must have at least one nonzero entry")
        normals.setflags(write=False)
        object.__setattr__(self, "normals", normals)

    def to_json(self) -> str:
        """Serialize as (version, seed, dim, n_bits); normals are re-derived."""
        if self.seed is None:
            raise InvalidParamsError("family with explicit normals has no seed to serialize")
        return json.dumps(
            {"version": self.version, "seed": self.seed, "dim": self.dim, "n_bits": self.n_bits},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "ProjectionFamily":
        doc = json.loads(text)
        if doc.get("version") != FAMILY_VERSION:
            raise InvalidParamsError(
                f"unsupported family version {doc.get('version')!r}; this build produces {FAMILY_VERSION!r}"
            )
        return sample_family(doc["dim"], doc["n_bits"], doc["seed"])


def sample_family(dim: int, n_bits: int, seed: int) -> ProjectionFamily:
    """Draw ``n_bits`` hyperplane normals with i.i.d. N(0, 1) entries.

    Deterministic given ``seed``; the same (seed, dim, n_bits) triple always
    reproduces the family exactly.
    """
    if int(dim) != dim or int(n_bits) != n_bits or dim < 1 or n_bits < 1:
        raise InvalidParamsError(f"need integer dim >= 1 and n_bits >= 1, got ({dim}, {n_bits})")
    seed = int(seed)
    if seed < 0:
        raise InvalidParamsError("seed must be a non-negative integer")
    normals = _standard_normals(seed, (int(n_bits), int(dim)))
    return ProjectionFamily(dim=int(dim), n_bits=int(n_bits), normals=normals, seed=seed)


def hash_vector(family: ProjectionFamily, x) -> np.ndarray:
    """Hash one nonzero vector to its ``n_bits``-bit string.

    Bit i is 1 iff ``normals[i] . x >= 0``.  Pure in (family, direction of
    x): positive rescaling of ``x`` cannot change any bit.
    """
    x = _v.as_vector(x)
    if _v.dimension_of(x) != family.dim:
        raise DimensionMismatchError(f"vector dimension {_v.dimension_of(x)} != family dim {family.dim}")
    _v.check_nonzero(x)
    if _v.is_sparse(x):
        # CSR x dense touches only the stored nonzeros: O(nnz * n_bits).
        proj = np.asarray(x @ family.normals.T).ravel()
    else:
        proj = family.normals @ x
    return (proj >= 0.0).astype(np.uint8)


def hash_dataset(family: ProjectionFamily, xs) -> np.ndarray:
    """Hash a collection of vectors; row i equals ``hash_vector(family, xs[i])``.

    Accepts a sequence of vectors or a (n_samples, dim) dense/sparse matrix;
    returns a (n_samples, n_bits) uint8 matrix in input order.
    """
    from .exceptions import ZeroVectorError

    if _v.is_sparse(xs):
        xs = xs.tocsr()
        if xs.shape[1] != family.dim:
            raise DimensionMismatchError(f"matrix dim {xs.shape[1]} != family dim {family.dim}")
        if np.any(np.asarray(abs(xs).sum(axis=1)).ravel() == 0.0):
            raise ZeroVectorError("dataset contains an all-zero row")
        proj = np.asarray(xs @ family.normals.T)
        return (proj >= 0.0).astype(np.uint8)
    if isinstance(xs, np.ndarray) and xs.ndim == 2:
        if xs.shape[1] != family.dim:
            raise DimensionMismatchError(f"matrix dim {xs.shape[1]} != family dim {family.dim}")
        if np.any(np.linalg.norm(xs, axis=1) == 0.0):
            raise ZeroVectorError("dataset contains an all-zero row")
        return (xs @ family.normals.T >= 0.0).astype(np.uint8)
    xs = list(xs)
    if not xs:
        return np.empty((0, family.n_bits), dtype=np.uint8)
    return np.stack([hash_vector(family, x) for x in xs])


class RandomProjectionHasher(BaseEstimator, TransformerMixin):
    """Transformer mapping vectors to random-projection hash bits.

    Parameters
    ----------
    n_bits : int
        Hash width.
    random_state : int or None
        Family seed.  None draws one from OS entropy; the drawn value is
        stored in ``family_.seed`` so the run stays reproducible after the
        fact.

    Attributes
    ----------
    family_ : ProjectionFamily
        Sampled at fit time from (random_state, n_features, n_bits).
    """

    def __init__(self, n_bits: int = 20, random_state: int | None = None):
        self.n_bits = n_bits
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, accept_sparse="csr")
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        self.family_ = sample_family(X.shape[1], self.n_bits, seed)
        return self

    def transform(self, X):
        if not hasattr(self, "family_"):
            raise NotFittedError("RandomProjectionHasher is not fitted yet; call fit first")
        X = check_array(X, accept_sparse="csr")
        return hash_dataset(self.family_, X)
