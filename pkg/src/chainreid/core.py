"""Domain types and distance computation shared by every stage.

Items are addressed by opaque string ids at the edges and by position
internally. All containers are immutable once built: arrays are copied to
float64/int64 and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist


class ChainReIDError(ValueError):
    """Base error. ``code`` is the short token surfaced by the CLI."""

    code = "error"


class ConfigError(ChainReIDError):
    code = "bad-config"


class DataError(ChainReIDError):
    code = "bad-data"


class ShapeError(ChainReIDError):
    code = "shape-mismatch"


class LabelError(ChainReIDError):
    code = "label-mismatch"


class FormatError(ChainReIDError):
    code = "bad-format"


def _check_ids(ids: Sequence[str], what: str) -> tuple[str, ...]:
    ids = tuple(ids)
    for item in ids:
        if not isinstance(item, str) or not item or any(ch.isspace() for ch in item):
            raise DataError(f"{what}: invalid item id {item!r}")
    if len(set(ids)) != len(ids):
        raise DataError(f"{what}: duplicate item ids")
    return ids


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class EmbeddingSet:
    ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        ids = _check_ids(self.ids, "embedding set")
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(ids) or vectors.shape[1] < 1:
            raise ShapeError(
                f"embedding set: expected {len(ids)} vectors of positive dim, got shape {vectors.shape}"
            )
        if not np.all(np.isfinite(vectors)):
            raise DataError("embedding set: non-finite component")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "vectors", _frozen(vectors))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense non-negative distances with row and column labels.

    When the row and column labels are identical the diagonal is forced
    to zero.
    """

    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        row_ids = _check_ids(self.row_ids, "matrix rows")
        col_ids = _check_ids(self.col_ids, "matrix columns")
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(row_ids), len(col_ids)):
            raise ShapeError(
                f"matrix: values shape {values.shape} does not match "
                f"{len(row_ids)}x{len(col_ids)} labels"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("matrix: non-finite value")
        if np.any(values < 0):
            raise DataError("matrix: negative distance")
        if row_ids == col_ids:
            np.fill_diagonal(values, 0.0)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class GroundTruth:
    identity_of: Mapping[str, str]
    frame_of: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        identity_of = dict(self.identity_of)
        frame_of = None if self.frame_of is None else dict(self.frame_of)
        if frame_of is not None:
            seen: dict[tuple[str, int], str] = {}
            for item, frame in frame_of.items():
                if item not in identity_of:
                    raise DataError(f"ground truth: frame given for unknown id {item!r}")
                if int(frame) != frame or frame < 0:
                    raise DataError(f"ground truth: bad frame index {frame!r} for {item!r}")
                key = (identity_of[item], int(frame))
                if key in seen:
                    raise DataError(
                        f"ground truth: ids {seen[key]!r} and {item!r} share identity and frame"
                    )
                seen[key] = item
            frame_of = {k: int(v) for k, v in frame_of.items()}
        object.__setattr__(self, "identity_of", identity_of)
        object.__setattr__(self, "frame_of", frame_of)

    def identities(self, ids: Sequence[str]) -> list[str]:
        missing = [i for i in ids if i not in self.identity_of]
        if missing:
            raise DataError(f"ground truth: no identity for {missing[0]!r}")
        return [self.identity_of[i] for i in ids]


def _check_pair(queries: EmbeddingSet, gallery: EmbeddingSet):
    if queries.dim != gallery.dim:
        raise ShapeError(f"dimension mismatch: {queries.dim} vs {gallery.dim}")


def euclidean_distances(queries: EmbeddingSet, gallery: EmbeddingSet) -> DistanceMatrix:
    _check_pair(queries, gallery)
    values = cdist(queries.vectors, gallery.vectors, metric="euclidean")
    if queries.ids == gallery.ids:
        # cdist is exact on the diagonal but symmetry is worth guaranteeing
        values = np.minimum(values, values.T)
    return DistanceMatrix(queries.ids, gallery.ids, values)


def cosine_distances(queries: EmbeddingSet, gallery: EmbeddingSet) -> DistanceMatrix:
    """``1 - cos(q, g)``, clipped into [0, 2] against rounding."""
    _check_pair(queries, gallery)
    for name, emb in (("query", queries), ("gallery", gallery)):
        norms = np.linalg.norm(emb.vectors, axis=1)
        if np.any(norms == 0):
            bad = emb.ids[int(np.argmax(norms == 0))]
            raise DataError(f"zero-norm {name} vector {bad!r}")
    values = np.clip(cdist(queries.vectors, gallery.vectors, metric="cosine"), 0.0, 2.0)
    if queries.ids == gallery.ids:
        values = np.minimum(values, values.T)
    return DistanceMatrix(queries.ids, gallery.ids, values)


METRICS = {
    "euclidean": euclidean_distances,
    "cosine": cosine_distances,
}


def pairwise_distances(queries: EmbeddingSet, gallery: EmbeddingSet, metric: str = "euclidean") -> DistanceMatrix:
    try:
        fn = METRICS[metric]
    except KeyError:
        raise ConfigError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None
    return fn(queries, gallery)
