"""Chain retrieval, vote fusion and k-reciprocal re-ranking for re-identification."""

from .chain import ChainConfig, RetrievalResult, direct_ranking, mine_chains
from .core import (
    ChainReIDError,
    DistanceMatrix,
    EmbeddingSet,
    GroundTruth,
    cosine_distances,
    euclidean_distances,
    pairwise_distances,
)
from .evaluation import EvalReport, evaluate, mean_average_precision, order_consistency
from .fusion import fuse
from .rerank import RerankParams, k_reciprocal_rerank, rerank_gallery
from .synth import SynthConfig, generate

__all__ = [
    "ChainConfig",
    "ChainReIDError",
    "DistanceMatrix",
    "EmbeddingSet",
    "EvalReport",
    "GroundTruth",
    "RerankParams",
    "RetrievalResult",
    "SynthConfig",
    "cosine_distances",
    "direct_ranking",
    "euclidean_distances",
    "evaluate",
    "fuse",
    "generate",
    "k_reciprocal_rerank",
    "mean_average_precision",
    "mine_chains",
    "order_consistency",
    "pairwise_distances",
    "rerank_gallery",
]
