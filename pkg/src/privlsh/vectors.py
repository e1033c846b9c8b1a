"""Distances used throughout the package and the transform between them.

Three metrics appear in the pipeline:

* angular distance on input vectors: ``arccos(cosine similarity) / pi``,
  in [0, 1] (0 = same direction, 0.5 = orthogonal, 1 = antipodal);
* Euclidean distance on input vectors;
* Hamming distance on hash bitstrings.

For unit-norm vectors the angular and Euclidean metrics are related by
``d_euc = sqrt(2 - 2 cos(pi * d_theta))``, which is what lets mechanisms
calibrated in one metric be compared against the other.
"""

from __future__ import annotations

import math

import numpy as np

from . import validation as _v
from .exceptions import DimensionMismatchError, OutOfRangeError


def normalize(x):
    """Scale ``x`` to unit Euclidean norm.

    Preserves the direction exactly (angular distance to the input is 0)
    and the sparsity type of the input.  Raises ``ZeroVectorError`` for the
    zero vector.
    """
    x = _v.as_vector(x)
    _v.check_nonzero(x)
    return x / _v.norm(x)


def cosine_similarity(x, xp) -> float:
    """Cosine of the angle between two nonzero vectors, clamped to [-1, 1].

    Computed square-root-free as sign(x.xp) * sqrt((x.xp)^2 / (x.x)(xp.xp)),
    so identical (and exactly negated) inputs give exactly +-1 and arccos
    lands exactly on 0 / pi.  The clamp matters regardless: rounding can
    push the ratio a few ulp past 1, which would turn arccos into NaN.
    """
    x = _v.as_vector(x, "x")
    xp = _v.as_vector(xp, "xp")
    _v.check_same_dimension(x, xp)
    _v.check_nonzero(x, "x")
    _v.check_nonzero(xp, "xp")
    dxy = _v.dot(x, xp)
    nx2 = _v.dot(x, x)
    np2 = _v.dot(xp, xp)
    if not (math.isfinite(dxy * dxy) and math.isfinite(nx2 * np2)):
        # entries near 1e160 overflow the squared products; renormalize once
        x = x / _v.norm(x)
        xp = xp / _v.norm(xp)
        dxy, nx2, np2 = _v.dot(x, xp), _v.dot(x, x), _v.dot(xp, xp)
    if dxy == 0.0:
        return 0.0
    c = math.copysign(math.sqrt(min((dxy * dxy) / (nx2 * np2), 1.0)), dxy)
    return min(1.0, max(-1.0, c))


def angular_distance(x, xp) -> float:
    """Angular distance ``arccos(cos_sim(x, xp)) / pi`` in [0, 1].

    Symmetric, zero iff the directions coincide, invariant under positive
    scaling of either argument.  Both vectors must be nonzero and of equal
    dimension; dense and sparse inputs mix freely.
    """
    return math.acos(cosine_similarity(x, xp)) / math.pi


def euclidean_distance(x, xp) -> float:
    """Euclidean (l2) distance between two vectors of equal dimension."""
    x = _v.as_vector(x, "x")
    xp = _v.as_vector(xp, "xp")
    _v.check_same_dimension(x, xp)
    diff = x - xp
    return _v.norm(diff)


def hamming_distance(v, vp) -> int:
    """Number of positions at which two equal-length bitstrings differ."""
    v = _v.as_bits(v, "v")
    vp = _v.as_bits(vp, "vp")
    if v.shape[0] != vp.shape[0]:
        raise DimensionMismatchError(f"bitstring lengths differ: {v.shape[0]} vs {vp.shape[0]}")
    return int(np.count_nonzero(v != vp))


def angular_to_euclidean(d_theta: float) -> float:
    """Euclidean distance between two unit vectors at angular distance ``d_theta``.

    ``sqrt(2 - 2 cos(pi * d_theta))``; strictly increasing on [0, 1], with
    0 -> 0, 0.5 -> sqrt(2), 1 -> 2.  Only meaningful for unit-norm vectors.
    """
    d_theta = _v.check_finite_scalar(d_theta, "d_theta")
    if not 0.0 <= d_theta <= 1.0:
        raise OutOfRangeError(f"d_theta must be in [0, 1], got {d_theta}")
    return math.sqrt(max(0.0, 2.0 - 2.0 * math.cos(math.pi * d_theta)))


def euclidean_to_angular(d_euc: float) -> float:
    """Inverse of :func:`angular_to_euclidean`, defined on [0, 2]."""
    d_euc = _v.check_finite_scalar(d_euc, "d_euc")
    if not 0.0 <= d_euc <= 2.0:
        raise OutOfRangeError(f"d_euc must be in [0, 2], got {d_euc}")
    c = 1.0 - d_euc * d_euc / 2.0
    return math.acos(min(1.0, max(-1.0, c))) / math.pi
