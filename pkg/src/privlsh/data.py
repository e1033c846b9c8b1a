"""Dataset ingestion and synthesis.

Real inputs arrive as (user, item, value) event streams — movie ratings or
place visit counts — and become sparse per-user vectors.  Two preprocessing
modes mirror the two source flavors: ``rating_centered`` subtracts each
user's mean rating over the items they actually rated (unrated stays 0);
``raw_counts`` keeps values as-is.  Users whose vector ends up all-zero are
dropped with a warning, since a zero vector has no direction to hash.

``synthesize`` builds a clustered stand-in corpus for desk-scale
experiments: cluster centers pairwise far apart in angle, members a fixed
small angle from their center.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .exceptions import EmptyDatasetError, InvalidParamsError, ParseError
from .nns import Dataset
from .vectors import angular_distance

MODES = ("rating_centered", "raw_counts")


@dataclass(frozen=True)
class EventRecord:
    user_id: str
    item_index: int
    value: float


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a clustered synthetic dataset."""

    dim: int
    clusters: int
    users_per_cluster: int
    spread: float  # intra-cluster angular distance to the center
    seed: int

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidParamsError(f"dim must be >= 2 to spread members around a center, got {self.dim}")
        if self.clusters < 1 or self.users_per_cluster < 1:
            raise InvalidParamsError("clusters and users_per_cluster must be >= 1")
        if not (0.0 < self.spread < 0.5):
            raise InvalidParamsError(f"spread must be in (0, 0.5), got {self.spread}")


def load_events(path, fmt: str = "csv", header: bool = False, n_items: int | None = None) -> list[EventRecord]:
    """Parse ``user_id,item_index,value`` records from a CSV/TSV file.

    Records come back in file order.  A malformed line raises ``ParseError``
    carrying its 1-based line number; when ``n_items`` is given, out-of-range
    item indices are treated as malformed too.
    """
    if fmt not in ("csv", "tsv"):
        raise InvalidParamsError(f"format must be 'csv' or 'tsv', got {fmt!r}")
    delim = "," if fmt == "csv" else "\t"
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delim)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
            user_id = row[0].strip()
            if not user_id:
                raise ParseError(lineno, "empty user id")
            try:
                item_index = int(row[1])
                value = float(row[2])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            if not math.isfinite(value):
                raise ParseError(lineno, f"value must be finite, got {row[2]}")
            if item_index < 0 or (n_items is not None and item_index >= n_items):
                raise ParseError(lineno, f"item index {item_index} out of range [0, {n_items})")
            records.append(EventRecord(user_id, item_index, value))
    return records


def build_vectors(events: list[EventRecord], n_items: int, mode: str = "rating_centered") -> Dataset:
    """Turn an event stream into a sparse per-user Dataset.

    Duplicate (user, item) pairs resolve last-write-wins.  In
    ``rating_centered`` mode each user's mean over their rated items is
    subtracted from those items only.  Users reduced to the zero vector are
    dropped with a warning; an empty result raises.  Rows are ordered by
    ascending user id.
    """
    if mode not in MODES:
        raise InvalidParamsError(f"mode must be one of {MODES}, got {mode!r}")
    if n_items < 1:
        raise InvalidParamsError(f"n_items must be >= 1, got {n_items}")

    per_user: dict[str, dict[int, float]] = {}
    for rec in events:
        if rec.item_index < 0 or rec.item_index >= n_items:
            raise InvalidParamsError(f"item index {rec.item_index} out of range [0, {n_items})")
        per_user.setdefault(rec.user_id, {})[rec.item_index] = float(rec.value)

    ids, rows_i, cols_i, vals = [], [], [], []
    dropped = []
    row = 0
    for uid in sorted(per_user):
        items = per_user[uid]
        values = dict(items)
        if mode == "rating_centered":
            mean = sum(values.values()) / len(values)
            values = {idx: v - mean for idx, v in values.items()}
        values = {idx: v for idx, v in values.items() if v != 0.0}
        if not values:
            dropped.append(uid)
            continue
        ids.append(uid)
        for idx in sorted(values):
            rows_i.append(row)
            cols_i.append(idx)
            vals.append(values[idx])
        row += 1

    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} user(s) with all-zero vectors: {', '.join(dropped[:5])}"
            + ("..." if len(dropped) > 5 else ""),
            RuntimeWarning,
            stacklevel=2,
        )
    if not ids:
        raise EmptyDatasetError("no users with nonzero vectors")
    matrix = sparse.csr_matrix((vals, (rows_i, cols_i)), shape=(len(ids), n_items))
    return Dataset(ids=ids, matrix=matrix)


def truncate_dimensions(dataset: Dataset, n_keep: int, strategy: str = "most_popular") -> Dataset:
    """Keep the ``n_keep`` items with the widest nonzero support, re-indexed.

    Support ties break by ascending original index; kept items preserve
    their relative order.  Users left all-zero are dropped with a warning.
    """
    if strategy != "most_popular":
        raise InvalidParamsError(f"unknown strategy {strategy!r}")
    if n_keep < 1 or n_keep > dataset.dim:
        raise InvalidParamsError(f"n_keep must be in [1, {dataset.dim}], got {n_keep}")

    X = sparse.csr_matrix(dataset.matrix) if not sparse.issparse(dataset.matrix) else dataset.matrix.tocsr()
    support = np.asarray((X != 0).sum(axis=0)).ravel()
    # stable argsort on -support keeps ascending index within equal support
    keep = np.sort(np.argsort(-support, kind="stable")[:n_keep])
    sub = X[:, keep]

    nonzero = np.asarray(abs(sub).sum(axis=1)).ravel() != 0.0
    if not np.all(nonzero):
        dropped = [dataset.ids[i] for i in np.flatnonzero(~nonzero)]
        warnings.warn(
            f"dropped {len(dropped)} user(s) with all-zero vectors after truncation",
            RuntimeWarning,
            stacklevel=2,
        )
    ids = [uid for uid, keep_row in zip(dataset.ids, nonzero) if keep_row]
    if not ids:
        raise EmptyDatasetError("truncation removed every user")
    return Dataset(ids=ids, matrix=sub[nonzero])


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def synthesize(spec: SynthSpec) -> Dataset:
    """Generate a clustered dataset of unit vectors, deterministic in the seed.

    Cluster centers are rejection-sampled to sit at pairwise angular
    distance >= 0.4; every member is rotated exactly ``spec.spread`` away
    from its center toward an independent orthogonal direction, so
    intra-cluster distances stay <= 2 * spread while inter-cluster pairs
    stay far.  Raises when the requested cluster count cannot be placed.
    """
    rng = np.random.default_rng(spec.seed)
    min_center_angle = 0.4

    centers: list[np.ndarray] = []
    attempts = 0
    max_attempts = 500 * spec.clusters
    while len(centers) < spec.clusters:
        if attempts >= max_attempts:
            raise InvalidParamsError(
                f"could not place {spec.clusters} cluster centers at pairwise angular "
                f"distance >= {min_center_angle} in dimension {spec.dim}"
            )
        attempts += 1
        cand = rng.standard_normal(spec.dim)
        if np.linalg.norm(cand) == 0.0:
            continue
        cand = _unit(cand)
        if all(angular_distance(cand, c) >= min_center_angle for c in centers):
            centers.append(cand)

    ids, rows = [], []
    angle = math.pi * spec.spread
    for ci, center in enumerate(centers):
        for ui in range(spec.users_per_cluster):
            g = rng.standard_normal(spec.dim)
            perp = g - np.dot(g, center) * center
            while np.linalg.norm(perp) == 0.0:  # measure zero
                g = rng.standard_normal(spec.dim)
                perp = g - np.dot(g, center) * center
            member = math.cos(angle) * center + math.sin(angle) * _unit(perp)
            ids.append(f"c{ci:03d}u{ui:04d}")
            rows.append(member)
    return Dataset(ids=ids, matrix=np.stack(rows))
