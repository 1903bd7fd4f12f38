"""mAP, CMC and frame-order consistency of retrieval results.

Every gallery item sharing the query's identity counts as relevant; there is
no junk or same-camera masking and AP is computed over the full ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import kendalltau

from .chain import RetrievalResult
from .core import DataError, GroundTruth


@dataclass(frozen=True)
class EvalReport:
    map_score: float
    cmc: list[float]
    per_query_ap: list[float]
    order_consistency: Optional[float] = None
    kendall_tau: Optional[float] = None
    query_ids: list[str] = field(default_factory=list)

    def to_text(self, ranks=(1, 5, 10)) -> str:
        lines = [f"queries: {len(self.per_query_ap)}", f"mAP: {self.map_score:.6f}"]
        for r in ranks:
            if r <= len(self.cmc):
                lines.append(f"rank-{r}: {self.cmc[r - 1]:.6f}")
        if self.order_consistency is not None:
            lines.append(f"order consistency: {self.order_consistency:.6f}")
        if self.kendall_tau is not None:
            lines.append(f"kendall tau: {self.kendall_tau:.6f}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        lines = [f"num_queries={len(self.per_query_ap)}", f"map={self.map_score:.6f}"]
        lines += [f"cmc_{r + 1}={v:.6f}" for r, v in enumerate(self.cmc)]
        if self.order_consistency is not None:
            lines.append(f"order_consistency={self.order_consistency:.6f}")
        if self.kendall_tau is not None:
            lines.append(f"kendall_tau={self.kendall_tau:.6f}")
        lines += [f"ap[{q}]={ap:.6f}" for q, ap in zip(self.query_ids, self.per_query_ap)]
        return "\n".join(lines) + "\n"


def relevance(result: RetrievalResult, truth: GroundTruth) -> np.ndarray:
    """Boolean (m, n) matrix: entry (i, r) is True when rank r of query i is relevant."""
    q_ident = np.array(truth.identities(result.query_ids), dtype=object)
    g_ident = np.array(truth.identities(result.gallery_ids), dtype=object)
    return g_ident[result.rankings] == q_ident[:, None]


def average_precision(hits: np.ndarray) -> float:
    hits = np.asarray(hits, dtype=bool)
    n_rel = int(hits.sum())
    if n_rel == 0:
        raise DataError("no relevant gallery item; average precision undefined")
    ranks = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, n_rel + 1) / ranks))


def mean_average_precision(result: RetrievalResult, truth: GroundTruth) -> EvalReport:
    hits = relevance(result, truth)
    per_query = []
    for i, row in enumerate(hits):
        if not row.any():
            raise DataError(f"query {result.query_ids[i]!r} has no relevant gallery item")
        per_query.append(average_precision(row))
    if per_query:
        cmc = (np.cumsum(hits, axis=1) > 0).mean(axis=0).tolist()
        map_score = float(np.mean(per_query))
    else:
        cmc, map_score = [], 0.0
    return EvalReport(map_score, cmc, per_query, query_ids=list(result.query_ids))


def _same_identity_frames(result: RetrievalResult, truth: GroundTruth, i: int) -> list[int]:
    if truth.frame_of is None:
        raise DataError("ground truth carries no frame indices")
    identity = truth.identities([result.query_ids[i]])[0]
    frames = []
    for gid in result.ranked_ids(i):
        if truth.identity_of.get(gid) != identity:
            continue
        if gid not in truth.frame_of:
            raise DataError(f"no frame index for gallery item {gid!r}")
        frames.append(truth.frame_of[gid])
    return frames


def query_order_consistency(result: RetrievalResult, truth: GroundTruth, i: int) -> float:
    """Fraction of same-identity positions whose frame matches the true frame order."""
    frames = _same_identity_frames(result, truth, i)
    if not frames:
        raise DataError(f"query {result.query_ids[i]!r} has no same-identity gallery item")
    return float(np.mean(np.array(frames) == np.sort(frames)))


def order_consistency(result: RetrievalResult, truth: GroundTruth) -> float:
    scores = [query_order_consistency(result, truth, i) for i in range(len(result.query_ids))]
    return float(np.mean(scores)) if scores else 0.0


def order_kendall_tau(result: RetrievalResult, truth: GroundTruth) -> float:
    """Mean Kendall tau between retrieved and true frame order (1.0 for single-item sequences)."""
    taus = []
    for i in range(len(result.query_ids)):
        frames = _same_identity_frames(result, truth, i)
        if len(frames) < 2:
            taus.append(1.0)
        else:
            taus.append(float(kendalltau(np.arange(len(frames)), frames).statistic))
    return float(np.mean(taus)) if taus else 0.0


def evaluate(result: RetrievalResult, truth: GroundTruth, with_order: Optional[bool] = None) -> EvalReport:
    """Full report; order metrics are included when frames are known (or forced via ``with_order``)."""
    report = mean_average_precision(result, truth)
    if with_order is None:
        with_order = truth.frame_of is not None
    if not with_order:
        return report
    return EvalReport(
        report.map_score,
        report.cmc,
        report.per_query_ap,
        order_consistency=order_consistency(result, truth),
        kendall_tau=order_kendall_tau(result, truth),
        query_ids=report.query_ids,
    )
