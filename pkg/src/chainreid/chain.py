"""Chain retrieval over query-gallery and gallery-gallery distances.

The first item of each chain is the gallery item nearest to the query.
Every later item is the remaining gallery item nearest to a *window* of
already retrieved items:

* ``local`` with ``window=N``: the last N retrieved items;
* ``with_ref``: the query is kept as a permanent extra window member;
* ``global``: the query plus every retrieved item.

``local``, ``window=1``, ``with_ref=False`` is plain frame-by-frame chaining.
A member's distance to a candidate is aggregated over the window with
``min`` (default) or ``mean``. Ties always go to the lowest gallery position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DataError, DistanceMatrix, LabelError, ShapeError, _check_ids, _frozen

VARIANTS = ("local", "global")
AGGREGATIONS = ("min", "mean")


@dataclass(frozen=True)
class ChainConfig:
    variant: str = "local"
    window: int = 1
    with_ref: bool = False
    aggregation: str = "min"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {', '.join(VARIANTS)}")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {', '.join(AGGREGATIONS)}")
        if self.variant == "local" and (int(self.window) != self.window or self.window < 1):
            raise ConfigError("window must be >= 1")

    @property
    def name(self) -> str:
        if self.variant == "global":
            return "Global"
        return f"Local-{self.window}" + (" w.ref" if self.with_ref else "")


@dataclass(frozen=True)
class RetrievalResult:
    """Per-query rankings; row i is a permutation of gallery positions."""

    query_ids: tuple[str, ...]
    gallery_ids: tuple[str, ...]
    rankings: np.ndarray

    def __post_init__(self):
        query_ids = _check_ids(self.query_ids, "result queries")
        gallery_ids = _check_ids(self.gallery_ids, "result gallery")
        rankings = np.asarray(self.rankings)
        n = len(gallery_ids)
        if rankings.shape != (len(query_ids), n):
            raise ShapeError(
                f"rankings shape {rankings.shape} != ({len(query_ids)}, {n})"
            )
        if rankings.size and not np.issubdtype(rankings.dtype, np.integer):
            raise DataError("rankings must hold integer gallery positions")
        rankings = rankings.astype(np.int64)
        expected = np.arange(n)
        for i, row in enumerate(rankings):
            if not np.array_equal(np.sort(row), expected):
                raise DataError(f"ranking for {query_ids[i]!r} is not a permutation of the gallery")
        object.__setattr__(self, "query_ids", query_ids)
        object.__setattr__(self, "gallery_ids", gallery_ids)
        object.__setattr__(self, "rankings", _frozen(rankings))

    def ranked_ids(self, i: int) -> list[str]:
        return [self.gallery_ids[j] for j in self.rankings[i]]


def direct_ranking(qg: DistanceMatrix) -> RetrievalResult:
    """Sort each query row by ascending distance (stable, so ties keep position order)."""
    rankings = np.argsort(qg.values, axis=1, kind="stable")
    return RetrievalResult(qg.row_ids, qg.col_ids, rankings)


def _check_inputs(qg: DistanceMatrix, gg: DistanceMatrix):
    m, n = qg.shape
    if n == 0:
        raise DataError("empty gallery")
    if gg.shape != (n, n):
        raise ShapeError(f"gallery matrix is {gg.shape[0]}x{gg.shape[1]}, expected {n}x{n}")
    if gg.row_ids != qg.col_ids or gg.col_ids != qg.col_ids:
        raise LabelError("gallery matrix labels differ from query-gallery columns")


def mine_chains(qg: DistanceMatrix, gg: DistanceMatrix, cfg: ChainConfig = ChainConfig()) -> RetrievalResult:
    _check_inputs(qg, gg)
    rankings = _mine(qg.values, gg.values, cfg)
    return RetrievalResult(qg.row_ids, qg.col_ids, rankings)


def mine_rows(qg: np.ndarray, gg: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """Array-level entry point: rankings for the rows of ``qg``.

    Rows are independent, so callers may split ``qg`` across workers and
    stack the results.
    """
    return _mine(np.asarray(qg, dtype=np.float64), np.asarray(gg, dtype=np.float64), cfg)


def _mine(qg: np.ndarray, gg: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    # All queries advance in lockstep: step s fills column s of every chain.
    m, n = qg.shape
    rows = np.arange(m)
    out = np.empty((m, n), dtype=np.int64)
    taken = np.zeros((m, n), dtype=bool)
    use_min = cfg.aggregation == "min"

    def pick(scores: np.ndarray, step: int):
        scores = np.where(taken, np.inf, scores)
        choice = np.argmin(scores, axis=1)
        out[:, step] = choice
        taken[rows, choice] = True

    pick(qg, 0)
    if cfg.variant == "global":
        acc = qg.copy()
        for step in range(1, n):
            last = gg[out[:, step - 1]]
            if use_min:
                np.minimum(acc, last, out=acc)
                pick(acc, step)
            else:
                acc += last
                pick(acc / (step + 1), step)
        return out

    for step in range(1, n):
        members = gg[out[:, max(0, step - cfg.window):step]]
        if use_min:
            scores = members.min(axis=1)
            if cfg.with_ref:
                scores = np.minimum(scores, qg)
        else:
            scores = members.sum(axis=1)
            count = members.shape[1]
            if cfg.with_ref:
                scores = scores + qg
                count += 1
            scores = scores / count
        pick(scores, step)
    return out


def parse_variant(name: str) -> ChainConfig:
    """Build a config from labels like ``Local-2``, ``local-3-ref`` or ``Global``."""
    token = name.strip().lower().replace(" ", "").replace(".", "")
    if token == "global":
        return ChainConfig(variant="global")
    with_ref = token.endswith("wref") or token.endswith("-ref")
    token = token.removesuffix("wref").removesuffix("-ref").rstrip("-")
    if not token.startswith("local-"):
        raise ConfigError(f"unrecognised variant {name!r}")
    try:
        window = int(token[len("local-"):])
    except ValueError:
        raise ConfigError(f"unrecognised variant {name!r}") from None
    return ChainConfig(variant="local", window=window, with_ref=with_ref)

