"""Synthetic drifting-identity sequences.

Each identity is a Gaussian random walk started at its center: frame 0 is
the center, frame t adds an isotropic step to frame t-1, and every emitted
vector carries independent observation noise. Frame 0 becomes the query,
the remaining frames form the gallery.

Randomness comes from numpy's ``Generator(PCG64(seed))`` and is drawn in a
fixed order, so a seed pins the output on every platform numpy supports:

1. centers, shape (identities, dim), scale ``center_sigma``
2. steps, shape (identities, frames - 1, dim), scale ``step_sigma``
3. noise, shape (identities, frames, dim), scale ``noise_sigma``
4. one permutation of the gallery rows
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, EmbeddingSet, GroundTruth


@dataclass(frozen=True)
class SynthConfig:
    num_identities: int = 10
    frames_per_identity: int = 10
    dim: int = 16
    center_sigma: float = 10.0
    step_sigma: float = 1.0
    noise_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.num_identities < 1:
            raise ConfigError("num_identities must be >= 1")
        if self.frames_per_identity < 2:
            raise ConfigError("frames_per_identity must be >= 2")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if not self.center_sigma > 0:
            raise ConfigError("center_sigma must be > 0")
        if not self.step_sigma >= 0:
            raise ConfigError("step_sigma must be >= 0")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be >= 0")
        if not -(2**63) <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")


def item_id(identity: int, frame: int) -> str:
    return f"id{identity:04d}_f{frame:04d}"


def identity_label(identity: int) -> str:
    return f"id{identity:04d}"


def generate(cfg: SynthConfig) -> tuple[EmbeddingSet, EmbeddingSet, GroundTruth]:
    rng = np.random.Generator(np.random.PCG64(cfg.seed % 2**64))
    k, t, d = cfg.num_identities, cfg.frames_per_identity, cfg.dim

    centers = rng.normal(0.0, cfg.center_sigma, size=(k, d))
    steps = rng.normal(0.0, cfg.step_sigma, size=(k, t - 1, d))
    noise = rng.normal(0.0, cfg.noise_sigma, size=(k, t, d))

    walk = np.empty((k, t, d))
    walk[:, 0] = centers
    for f in range(1, t):
        walk[:, f] = walk[:, f - 1] + steps[:, f - 1]
    observed = walk + noise

    queries = EmbeddingSet(tuple(item_id(i, 0) for i in range(k)), observed[:, 0])

    gallery_ids = [item_id(i, f) for i in range(k) for f in range(1, t)]
    gallery_vecs = observed[:, 1:].reshape(k * (t - 1), d)
    order = rng.permutation(len(gallery_ids))
    gallery = EmbeddingSet(tuple(gallery_ids[j] for j in order), gallery_vecs[order])

    identity_of = {}
    frame_of = {}
    for i in range(k):
        for f in range(t):
            identity_of[item_id(i, f)] = identity_label(i)
            frame_of[item_id(i, f)] = f
    return queries, gallery, GroundTruth(identity_of, frame_of)
