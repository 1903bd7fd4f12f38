"""Positionwise vote fusion of several models' rankings.

For each output position every model nominates its best-ranked item not yet
emitted. The item with the most nominations wins; a tie goes to the tied item
closest to the query, where an item's distance is its nominating model's
query-gallery entry (the smallest one when several models nominated it).
A residual tie goes to the lowest gallery position.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .chain import RetrievalResult
from .core import ConfigError, DistanceMatrix, LabelError, ShapeError


def minmax_rows(values: np.ndarray) -> np.ndarray:
    """Rescale each row to [0, 1]; constant rows become zeros."""
    lo = values.min(axis=1, keepdims=True)
    span = values.max(axis=1, keepdims=True) - lo
    return np.divide(values - lo, span, out=np.zeros_like(values), where=span > 0)


def _check(results: Sequence[RetrievalResult], matrices: Sequence[DistanceMatrix]):
    if len(results) == 0:
        raise ConfigError("fusion needs at least one model")
    if len(matrices) != len(results):
        raise ShapeError(f"{len(results)} rankings but {len(matrices)} matrices")
    ref = results[0]
    for r in results:
        if r.query_ids != ref.query_ids or r.gallery_ids != ref.gallery_ids:
            raise LabelError("rankings disagree on query or gallery labels")
    for mat in matrices:
        if mat.row_ids != ref.query_ids or mat.col_ids != ref.gallery_ids:
            raise LabelError("distance matrix labels differ from the rankings")


def fuse_row(lists: Sequence[np.ndarray], dists: Sequence[np.ndarray]) -> np.ndarray:
    """Fuse one query's K rankings; ``dists[l]`` is model l's distance row."""
    n = len(lists[0])
    used = np.zeros(n, dtype=bool)
    cursor = [0] * len(lists)
    out = np.empty(n, dtype=np.int64)
    for pos in range(n):
        votes: dict[int, int] = {}
        score: dict[int, float] = {}
        for l, ranking in enumerate(lists):
            while used[ranking[cursor[l]]]:
                cursor[l] += 1
            c = int(ranking[cursor[l]])
            votes[c] = votes.get(c, 0) + 1
            d = float(dists[l][c])
            score[c] = min(score.get(c, d), d)
        top = max(votes.values())
        tied = [c for c, v in votes.items() if v == top]
        if len(tied) == 1:
            choice = tied[0]
        else:
            choice = min(tied, key=lambda c: (score[c], c))
        out[pos] = choice
        used[choice] = True
    return out


def fuse(
    results: Sequence[RetrievalResult],
    matrices: Sequence[DistanceMatrix],
    normalize: bool = False,
) -> RetrievalResult:
    """Vote-fuse K retrieval results.

    ``matrices[l]`` is the query-gallery matrix of model l, used only for tie
    breaks. Set ``normalize`` to min-max scale each row of each matrix before
    comparing distances across models.
    """
    _check(results, matrices)
    values = [m.values for m in matrices]
    if normalize:
        values = [minmax_rows(v) for v in values]
    ref = results[0]
    fused = np.empty_like(ref.rankings)
    for i in range(len(ref.query_ids)):
        fused[i] = fuse_row([r.rankings[i] for r in results], [v[i] for v in values])
    return RetrievalResult(ref.query_ids, ref.gallery_ids, fused)
