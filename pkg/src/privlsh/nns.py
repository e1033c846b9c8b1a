"""Exact and hash-space k-nearest-neighbor search plus the utility-loss metric.

The evaluation protocol: every user publishes a (possibly privatized) hash
under one shared projection family; neighbors are retrieved by exhaustive
Hamming scan over the hashes and scored against the true angular-distance
neighbors.  Utility loss for a query is the average angular distance of the
returned set minus that of the true set — zero when the returned neighbors
are as close (in the original space) as the true ones, regardless of
whether the identities coincide.

Ties everywhere break by ascending id so all results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import validation as _v
from .exceptions import (
    DimensionMismatchError,
    EmptyDatasetError,
    InvalidParamsError,
    LengthMismatchError,
    UnknownIdError,
)
from .lsh import ProjectionFamily, hash_dataset
from .mechanisms import laplsh, randomized_response, uniform_bits
from .vectors import angular_distance

MECHANISMS = ("lsh", "lshrr", "laplsh", "uniform")


@dataclass
class Dataset:
    """An id-keyed collection of equal-dimension vectors.

    ``matrix`` is (n_users, dim), dense or CSR; ``ids`` are unique and
    aligned with the rows.  Immutable by convention once built.
    """

    ids: list[str]
    matrix: object  # np.ndarray or scipy.sparse.csr_matrix
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not _v.is_sparse(self.matrix):
            self.matrix = np.asarray(self.matrix, dtype=float)
            if self.matrix.ndim != 2:
                raise InvalidParamsError(f"matrix must be 2-D, got shape {self.matrix.shape}")
        else:
            self.matrix = sparse.csr_matrix(self.matrix)
        if len(self.ids) == 0 or self.matrix.shape[0] == 0:
            raise EmptyDatasetError("dataset has no rows")
        if len(self.ids) != self.matrix.shape[0]:
            raise InvalidParamsError(f"{len(self.ids)} ids for {self.matrix.shape[0]} rows")
        self.ids = [str(i) for i in self.ids]
        if len(set(self.ids)) != len(self.ids):
            raise InvalidParamsError("ids must be unique")
        self._index = {uid: i for i, uid in enumerate(self.ids)}

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def row(self, uid: str):
        try:
            i = self._index[uid]
        except KeyError:
            raise UnknownIdError(f"id {uid!r} not in dataset") from None
        return self.matrix[i] if _v.is_sparse(self.matrix) else self.matrix[i, :]

    def position(self, uid: str) -> int:
        try:
            return self._index[uid]
        except KeyError:
            raise UnknownIdError(f"id {uid!r} not in dataset") from None


@dataclass(frozen=True)
class NeighborList:
    """Ranked neighbors of one query: (id, distance) pairs, distance ascending."""

    query_id: str
    neighbors: tuple

    @property
    def ids(self) -> list[str]:
        return [nid for nid, _ in self.neighbors]

    @property
    def distances(self) -> list[float]:
        return [nd for _, nd in self.neighbors]

    def __len__(self) -> int:
        return len(self.neighbors)


def _ranked_take(ids: list[str], distances: np.ndarray, exclude: int, k: int) -> tuple:
    # Sort by (distance, id); the id rank makes ordering total and stable.
    id_rank = np.argsort(np.argsort(np.asarray(ids, dtype=object)))
    order = np.lexsort((id_rank, distances))
    out = []
    for i in order:
        if i == exclude:
            continue
        out.append((ids[i], distances[i]))
        if len(out) == k:
            break
    return tuple(out)


def _angular_distances_to(dataset: Dataset, qpos: int) -> np.ndarray:
    X = dataset.matrix
    if _v.is_sparse(X):
        q = X[qpos]
        dots = np.asarray((X @ q.T).todense()).ravel()
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    else:
        q = X[qpos, :]
        dots = X @ q
        norms = np.linalg.norm(X, axis=1)
    qnorm = norms[qpos]
    if qnorm == 0.0 or np.any(norms == 0.0):
        from .exceptions import ZeroVectorError

        raise ZeroVectorError("angular search needs all rows nonzero")
    cos = np.clip(dots / (norms * qnorm), -1.0, 1.0)
    return np.arccos(cos) / math.pi


def exact_knn(dataset: Dataset, query_id: str, k: int) -> NeighborList:
    """The k angularly-closest other rows, by exhaustive comparison.

    Returns fewer than k pairs only when the dataset has fewer than k other
    rows.  Distance ties break by ascending id.
    """
    if k < 1:
        raise InvalidParamsError(f"k must be >= 1, got {k}")
    qpos = dataset.position(query_id)
    dists = _angular_distances_to(dataset, qpos)
    return NeighborList(query_id=query_id, neighbors=_ranked_take(dataset.ids, dists, qpos, k))


def approx_knn(ids: list[str], bits: np.ndarray, query_id: str, k: int) -> NeighborList:
    """The k Hamming-closest other hash rows; distances are raw bit counts."""
    if k < 1:
        raise InvalidParamsError(f"k must be >= 1, got {k}")
    bits = _v.as_bit_matrix(bits, "bits")
    ids = [str(i) for i in ids]
    if len(ids) != bits.shape[0]:
        raise DimensionMismatchError(f"{len(ids)} ids for {bits.shape[0]} hash rows")
    try:
        qpos = ids.index(str(query_id))
    except ValueError:
        raise UnknownIdError(f"id {query_id!r} not in hash collection") from None
    dists = np.count_nonzero(bits != bits[qpos], axis=1)
    neighbors = _ranked_take(ids, dists, qpos, k)
    return NeighborList(query_id=str(query_id), neighbors=tuple((nid, int(nd)) for nid, nd in neighbors))


def utility_loss(dataset: Dataset, query_id: str, approx: NeighborList, exact: NeighborList) -> float:
    """Average angular distance of the returned set minus that of the true set.

    Both lists must have equal length and belong to ``query_id``.  Distances
    are recomputed in the original vector space for BOTH lists — the metric
    that matters is the true one, not whatever space retrieval ran in.
    Non-negative (up to rounding) whenever ``exact`` really is optimal.
    """
    if len(approx) != len(exact):
        raise LengthMismatchError(f"neighbor lists differ in length: {len(approx)} vs {len(exact)}")
    if approx.query_id != query_id or exact.query_id != query_id:
        raise InvalidParamsError("neighbor lists belong to a different query")
    if len(exact) == 0:
        raise LengthMismatchError("neighbor lists are empty")
    q = dataset.row(query_id)
    mean_approx = sum(angular_distance(q, dataset.row(nid)) for nid in approx.ids) / len(approx)
    mean_exact = sum(angular_distance(q, dataset.row(nid)) for nid in exact.ids) / len(exact)
    return mean_approx - mean_exact


@dataclass(frozen=True)
class MatchingSummary:
    """Output of one matching experiment: per-query losses plus aggregates."""

    mechanism: str
    n_bits: int
    epsilon: float | None
    k: int
    losses: dict
    approx_ids: dict
    exact_ids: dict
    mean_loss: float
    std_err: float
    k_truncated: bool

    def records(self, xi: float | None = None) -> list[dict]:
        """One flat record per query, ordered by query id."""
        return [
            {
                "query_id": q,
                "k": self.k,
                "n_bits": self.n_bits,
                "epsilon": self.epsilon,
                "xi": xi,
                "mechanism": self.mechanism,
                "utility_loss": loss,
            }
            for q, loss in sorted(self.losses.items())
        ]


def perturbed_hashes(
    dataset: Dataset,
    family: ProjectionFamily,
    mechanism: str,
    rng: np.random.Generator,
    epsilon: float | None = None,
) -> np.ndarray:
    """Publish one hash row per user under the given mechanism and shared family."""
    if mechanism not in MECHANISMS:
        raise InvalidParamsError(f"mechanism must be one of {MECHANISMS}, got {mechanism!r}")
    if mechanism == "lsh":
        return hash_dataset(family, dataset.matrix)
    if mechanism == "uniform":
        return uniform_bits(family.n_bits, rng, n_rows=len(dataset))
    if epsilon is None:
        raise InvalidParamsError(f"mechanism {mechanism!r} needs epsilon")
    if mechanism == "lshrr":
        if epsilon == 0.0:
            # zero budget: every bit is uniform, identical to the baseline
            return uniform_bits(family.n_bits, rng, n_rows=len(dataset))
        return randomized_response(epsilon, hash_dataset(family, dataset.matrix), rng)
    X = dataset.matrix
    rows = [np.asarray(X[i].todense()).ravel() if _v.is_sparse(X) else X[i, :] for i in range(len(dataset))]
    return np.stack([laplsh(family, epsilon, row, rng) for row in rows])


def run_matching_experiment(
    dataset: Dataset,
    family: ProjectionFamily,
    mechanism: str,
    k: int,
    *,
    epsilon: float | None = None,
    queries: list[str] | None = None,
    noise_seed: int = 0,
) -> MatchingSummary:
    """Score one mechanism against exact search over a set of queries.

    All users publish hashes under the ONE given family (the shared-seed
    deployment); each query's published-hash neighbors are then compared to
    its true angular neighbors via :func:`utility_loss`.  Deterministic
    given (dataset, family, noise_seed); results are keyed and ordered by
    query id.

    When ``k`` exceeds the available neighbor count the lists are truncated
    to what exists and the summary is flagged.
    """
    if queries is None:
        queries = sorted(dataset.ids)
    else:
        queries = [str(q) for q in queries]
        for q in queries:
            dataset.position(q)  # raises UnknownIdError early
        queries = sorted(queries)

    rng = np.random.default_rng(noise_seed)
    bits = perturbed_hashes(dataset, family, mechanism, rng, epsilon=epsilon)
    k_eff = min(k, len(dataset) - 1)
    if k_eff < 1:
        raise EmptyDatasetError("need at least two rows to search for neighbors")

    losses, approx_ids, exact_ids = {}, {}, {}
    for q in queries:
        exact = exact_knn(dataset, q, k_eff)
        approx = approx_knn(dataset.ids, bits, q, k_eff)
        losses[q] = utility_loss(dataset, q, approx, exact)
        approx_ids[q] = approx.ids
        exact_ids[q] = exact.ids

    values = np.array([losses[q] for q in queries])
    mean = float(values.mean())
    std_err = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return MatchingSummary(
        mechanism=mechanism,
        n_bits=family.n_bits,
        epsilon=epsilon,
        k=k_eff,
        losses=losses,
        approx_ids=approx_ids,
        exact_ids=exact_ids,
        mean_loss=mean,
        std_err=std_err,
        k_truncated=k_eff < k,
    )
