"""The randomizers: bitwise randomized response, hash-then-flip, noise-then-hash.

Three mechanisms publish an ``n_bits``-bit string in place of a user vector:

* ``lshrr`` hashes the vector with a shared projection family and then flips
  each hash bit independently, keeping a bit with probability
  ``e^eps / (e^eps + 1)``;
* ``laplsh`` first adds spherically-symmetric Laplace noise to the vector
  (density proportional to ``exp(-eps * ||y - x||)``) and hashes the noisy
  vector;
* ``uniform_bits`` is the zero-budget baseline: fair coin flips.

Two independent sources of randomness are involved and deliberately kept
apart: the projection family (shared across users, passed in explicitly)
and the per-call noise generator (caller-supplied ``rng``).  Mechanisms
never touch the family seed.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from . import validation as _v
from .exceptions import InvalidParamsError, ZeroVectorError
from .lsh import ProjectionFamily, hash_dataset, hash_vector, sample_family


def _check_epsilon(epsilon: float, *, positive: bool = False) -> float:
    epsilon = float(epsilon)
    if math.isnan(epsilon) or math.isinf(epsilon) or epsilon < 0.0:
        raise InvalidParamsError(f"epsilon must be finite and >= 0, got {epsilon}")
    if positive and epsilon == 0.0:
        raise InvalidParamsError("epsilon must be > 0 for the Laplace mechanism")
    return epsilon


def flip_probability(epsilon: float) -> float:
    """Per-bit flip probability ``1 / (e^eps + 1)`` of randomized response."""
    epsilon = _check_epsilon(epsilon)
    if epsilon > 700.0:  # exp would overflow; the flip mass is < 1e-304 anyway
        return 0.0
    return 1.0 / (1.0 + math.exp(epsilon))


def randomized_response_bit(epsilon: float, bit: int, rng: np.random.Generator) -> int:
    """Randomize one bit: keep with probability ``e^eps / (e^eps + 1)``.

    ``epsilon = 0`` is allowed and yields a uniform output bit.
    """
    if bit not in (0, 1):
        raise InvalidParamsError(f"bit must be 0 or 1, got {bit!r}")
    flipped = rng.random() < flip_probability(epsilon)
    return int(bit) ^ int(flipped)


def randomized_response(epsilon: float, bits, rng: np.random.Generator) -> np.ndarray:
    """Apply randomized response independently to every bit.

    Accepts a bitstring or a (n_rows, n_bits) bit matrix; each position is
    flipped with probability ``1 / (e^eps + 1)``.  The expected Hamming
    distance to the input is ``n_bits / (e^eps + 1)`` per row.
    """
    arr = np.asarray(bits)
    if arr.ndim == 1:
        arr = _v.as_bits(arr, "bits")
    else:
        arr = _v.as_bit_matrix(arr, "bits")
    flips = rng.random(arr.shape) < flip_probability(epsilon)
    return arr ^ flips.astype(np.uint8)


def lshrr(family: ProjectionFamily, epsilon: float, x, rng: np.random.Generator) -> np.ndarray:
    """Hash ``x`` with the shared family, then flip each bit via randomized response.

    Equivalent in distribution to ``randomized_response(epsilon,
    hash_vector(family, x), rng)``; the family is the only randomness shared
    with other users.  Rejects the zero vector (its hash is undefined).
    """
    return randomized_response(epsilon, hash_vector(family, x), rng)


def spherical_laplace_noise(epsilon: float, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw noise with density proportional to ``exp(-eps * ||z||)`` in R^dim.

    Radius ~ Gamma(shape=dim, scale=1/eps), direction uniform on the unit
    sphere (a normalized Gaussian draw).  E[||z||] = dim / eps.
    """
    epsilon = _check_epsilon(epsilon, positive=True)
    if dim < 1:
        raise InvalidParamsError(f"dim must be >= 1, got {dim}")
    g = rng.standard_normal(dim)
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:  # measure zero; one retry keeps the distribution intact
        g = rng.standard_normal(dim)
        gnorm = np.linalg.norm(g)
        if gnorm == 0.0:
            raise ZeroVectorError("direction sampling returned the zero vector twice")
    radius = rng.gamma(shape=dim, scale=1.0 / epsilon)
    return (radius / gnorm) * g


def multivariate_laplace(epsilon: float, x, rng: np.random.Generator) -> np.ndarray:
    """Euclidean Laplace mechanism: ``x`` plus spherical Laplace noise.

    Output density is proportional to ``exp(-eps * ||y - x||_2)``, which
    makes any two outputs ``eps * Euclidean-distance`` indistinguishable.
    Dense input only; densify sparse vectors explicitly first (the noisy
    output is dense regardless).
    """
    if _v.is_sparse(x):
        raise InvalidParamsError("multivariate_laplace needs a dense vector; convert explicitly (e.g. .toarray())")
    x = _v.as_vector(x)
    return x + spherical_laplace_noise(epsilon, x.shape[0], rng)


def laplsh(family: ProjectionFamily, epsilon: float, x, rng: np.random.Generator) -> np.ndarray:
    """Add Laplace noise to ``x``, then hash the noisy vector with ``family``.

    The noise is calibrated to the Euclidean metric on the raw input, so
    unlike ``lshrr`` the output distribution is NOT scale-invariant: noise
    overwhelms short vectors and barely moves long ones.  Normalizing the
    input beforehand is the caller's decision.

    If the noisy vector lands exactly on the origin (probability zero), the
    noise is resampled once; a second zero raises.
    """
    if _v.is_sparse(x):
        raise InvalidParamsError("laplsh needs a dense vector; convert explicitly (e.g. .toarray())")
    x = _v.as_vector(x)
    if x.shape[0] != family.dim:
        from .exceptions import DimensionMismatchError

        raise DimensionMismatchError(f"vector dimension {x.shape[0]} != family dim {family.dim}")
    noisy = x + spherical_laplace_noise(epsilon, x.shape[0], rng)
    if np.linalg.norm(noisy) == 0.0:
        noisy = x + spherical_laplace_noise(epsilon, x.shape[0], rng)
        if np.linalg.norm(noisy) == 0.0:
            raise ZeroVectorError("noisy vector was exactly zero twice in a row")
    return hash_vector(family, noisy)


def uniform_bits(n_bits: int, rng: np.random.Generator, n_rows: int | None = None) -> np.ndarray:
    """Fair-coin bitstrings: the zero-budget baseline."""
    if n_bits < 1:
        raise InvalidParamsError(f"n_bits must be >= 1, got {n_bits}")
    shape = (n_bits,) if n_rows is None else (n_rows, n_bits)
    return rng.integers(0, 2, size=shape, dtype=np.uint8)


class _BaseHashingMechanism(BaseEstimator, TransformerMixin):
    """Shared fit logic: sample the family, resolve seeds."""

    def __init__(self, n_bits=20, epsilon=1.0, family_seed=None, noise_seed=None):
        self.n_bits = n_bits
        self.epsilon = epsilon
        self.family_seed = family_seed
        self.noise_seed = noise_seed

    def fit(self, X, y=None):
        X = check_array(X, accept_sparse="csr")
        fam_seed = self.family_seed
        noise_seed = self.noise_seed
        if fam_seed is None:
            fam_seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        if noise_seed is None:
            noise_seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
        self.family_ = sample_family(X.shape[1], self.n_bits, fam_seed)
        self.noise_seed_ = noise_seed
        return self

    def _check_fitted(self):
        if not hasattr(self, "family_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")


class LSHRR(_BaseHashingMechanism):
    """Hash-then-randomized-response as a transformer.

    ``transform`` privatizes each row independently with fresh noise drawn
    from ``noise_seed`` (so repeated calls return the same bits).  The hash
    family is shared across all rows, matching the deployment where many
    users publish hashes under one seed.
    """

    def transform(self, X):
        self._check_fitted()
        X = check_array(X, accept_sparse="csr")
        rng = np.random.default_rng(self.noise_seed_)
        return randomized_response(self.epsilon, hash_dataset(self.family_, X), rng)


class LapLSH(_BaseHashingMechanism):
    """Noise-then-hash as a transformer.

    Adds per-row spherical Laplace noise in input space before hashing.
    Rows must be dense (noise is dense); the budget is spent on the
    Euclidean metric of the raw inputs.
    """

    def transform(self, X):
        self._check_fitted()
        X = check_array(X, accept_sparse=False)
        rng = np.random.default_rng(self.noise_seed_)
        return np.stack([laplsh(self.family_, self.epsilon, row, rng) for row in X])
