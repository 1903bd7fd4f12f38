"""k-reciprocal re-ranking of a query-gallery distance matrix.

Queries and gallery are stitched into one item set P with the full distance
matrix [[qq, qg], [qg^T, gg]]. Neighbor lists come from a stable argsort of
each row of that matrix, so the item itself (distance 0) normally leads its
own list and ties go to the lower stitched position.

* ``N(p, k)``: the first k + 1 entries of p's list (p and its k nearest);
* ``R(p, k)``: members x of N(p, k) with p in N(x, k);
* ``R*(p, k1)``: R(p, k1) joined with R(x, k1 // 2) for every x in R(p, k1)
  where 3 * |R(p, k1) & R(x, k1 // 2)| >= 2 * |R(x, k1 // 2)|;
* ``V_p``: exp(-d(p, x)) on R*(p, k1), zero elsewhere, scaled to sum 1;
* query expansion: V_p becomes the mean of V_x over the first k2 entries of
  p's list (k2 = 1 leaves V unchanged);
* Jaccard distance 1 - sum(min(V_q, V_g)) / sum(max(V_q, V_g)), defined as 1
  when both vectors are zero;
* result (1 - lambda) * jaccard + lambda * qg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DistanceMatrix, LabelError, ShapeError


@dataclass(frozen=True)
class RerankParams:
    k1: int = 20
    k2: int = 6
    lambda_value: float = 0.3

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ConfigError("k1 and k2 must be >= 1")
        if self.k2 > self.k1:
            raise ConfigError("k2 must be <= k1")
        if not 0.0 <= self.lambda_value <= 1.0:
            raise ConfigError("lambda must lie in [0, 1]")


def _check(qg: DistanceMatrix, qq: DistanceMatrix, gg: DistanceMatrix, params: RerankParams):
    m, n = qg.shape
    if qq.shape != (m, m) or gg.shape != (n, n):
        raise ShapeError(
            f"expected qq {m}x{m} and gg {n}x{n}, got {qq.shape} and {gg.shape}"
        )
    if qq.row_ids != qg.row_ids or qq.col_ids != qg.row_ids:
        raise LabelError("query-query labels differ from query-gallery rows")
    if gg.row_ids != qg.col_ids or gg.col_ids != qg.col_ids:
        raise LabelError("gallery-gallery labels differ from query-gallery columns")
    if params.k1 >= m + n:
        raise ConfigError(f"k1 must be smaller than the {m + n} stitched items")


def stitch(qg: np.ndarray, qq: np.ndarray, gg: np.ndarray) -> np.ndarray:
    return np.block([[qq, qg], [qg.T, gg]])


def _reciprocal(ranks: np.ndarray, k: int) -> np.ndarray:
    """Boolean matrix whose row p marks R(p, k)."""
    size = ranks.shape[0]
    near = np.zeros((size, size), dtype=bool)
    np.put_along_axis(near, ranks[:, : k + 1], True, axis=1)
    return near & near.T


def encode(dist: np.ndarray, k1: int, k2: int) -> np.ndarray:
    """Expanded, query-expanded k-reciprocal vectors V for every stitched item."""
    ranks = np.argsort(dist, axis=1, kind="stable")
    recip = _reciprocal(ranks, k1)
    half = _reciprocal(ranks, k1 // 2)

    # overlap[p, x] = |R(p, k1) & R(x, k1 // 2)|
    overlap = recip.astype(np.int64) @ half.T.astype(np.int64)
    half_size = half.sum(axis=1)
    accept = recip & (3 * overlap >= 2 * half_size[None, :])
    expanded = recip | ((accept.astype(np.int64) @ half.astype(np.int64)) > 0)

    weights = np.where(expanded, np.exp(-dist), 0.0)
    totals = weights.sum(axis=1, keepdims=True)
    weights = np.divide(weights, totals, out=np.zeros_like(weights), where=totals > 0)

    if k2 > 1:
        weights = weights[ranks[:, :k2]].mean(axis=1)
    return weights


def jaccard(vq: np.ndarray, vg: np.ndarray) -> np.ndarray:
    """Jaccard distances between every row of ``vq`` and every row of ``vg``."""
    out = np.empty((vq.shape[0], vg.shape[0]))
    for i, row in enumerate(vq):
        low = np.minimum(row, vg).sum(axis=1)
        high = np.maximum(row, vg).sum(axis=1)
        out[i] = 1.0 - np.divide(low, high, out=np.zeros_like(low), where=high > 0)
    return out


def k_reciprocal_rerank(
    qg: DistanceMatrix,
    qq: DistanceMatrix,
    gg: DistanceMatrix,
    params: RerankParams = RerankParams(),
) -> DistanceMatrix:
    _check(qg, qq, gg, params)
    lam = params.lambda_value
    if lam == 1.0:
        return qg
    m = qg.shape[0]
    vectors = encode(stitch(qg.values, qq.values, gg.values), params.k1, params.k2)
    jd = jaccard(vectors[:m], vectors[m:])
    return DistanceMatrix(qg.row_ids, qg.col_ids, (1.0 - lam) * jd + lam * qg.values)


def rerank_gallery(gg: DistanceMatrix, params: RerankParams = RerankParams()) -> DistanceMatrix:
    """Re-rank gallery-gallery distances by letting the gallery play both sides."""
    return k_reciprocal_rerank(gg, gg, gg, params)
