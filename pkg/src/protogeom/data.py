"""Synthetic label distributions, free embeddings and batch plans."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelDistribution:
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) == 0 or min(counts) < 1:
            raise DomainError(f"every class needs at least one sample, got counts {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.counts)


@dataclass(eq=False)
class EmbeddingSet:
    """Free unit-norm embeddings stored column-wise (``d x N``) with labels."""

    vectors: np.ndarray
    labels: np.ndarray
    k: int | None = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.labels.shape[0]:
            raise DomainError(
                f"vectors {self.vectors.shape} do not match {self.labels.shape[0]} labels"
            )
        if self.k is None:
            self.k = int(self.labels.max()) + 1
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise DomainError(f"labels must lie in [0, {self.k})")

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def copy(self) -> "EmbeddingSet":
        return EmbeddingSet(self.vectors.copy(), self.labels.copy(), self.k)

    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.vectors, axis=0) - 1.0)))


@dataclass(frozen=True, eq=False)
class BatchPlan:
    """Indices of one batch plus the number of copies of each prototype added to it."""

    sample_indices: np.ndarray
    n_w: int = 0
    bound: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        idx = np.asarray(self.sample_indices, dtype=np.int64)
        if len(np.unique(idx)) != len(idx):
            raise DomainError("batch sample indices must be distinct")
        if self.n_w < 0:
            raise DomainError(f"n_w must be nonnegative, got {self.n_w}")
        object.__setattr__(self, "sample_indices", idx)

    def __len__(self):
        return len(self.sample_indices)

    def per_class_counts(self, labels: np.ndarray, k: int) -> np.ndarray:
        return np.bincount(np.asarray(labels)[self.sample_indices], minlength=k)


def step_imbalance(k: int, n_maj: int, ratio: int) -> LabelDistribution:
    """STEP imbalance: first half of the classes get ``n_maj`` samples, the rest ``n_maj // ratio``."""
    if k < 2 or k % 2:
        raise DomainError(f"STEP imbalance splits classes in halves; k must be even, got {k}")
    if ratio < 1:
        raise DomainError(f"imbalance ratio must be >= 1, got {ratio}")
    n_min = n_maj // ratio
    if n_maj % ratio:
        log.warning("n_maj=%d not divisible by R=%d; minority count floored to %d", n_maj, ratio, n_min)
    if n_min < 1:
        raise DomainError(f"minority classes would be empty ({n_maj}/{ratio} < 1)")
    return LabelDistribution((n_maj,) * (k // 2) + (n_min,) * (k // 2))


def init_embeddings(dist: LabelDistribution, d: int, seed: int) -> EmbeddingSet:
    """Gaussian vectors normalized onto the unit sphere."""
    if d < 1:
        raise DomainError(f"embedding dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((d, dist.total))
    h /= np.linalg.norm(h, axis=0, keepdims=True)
    return EmbeddingSet(h, dist.labels(), dist.k)


def sample_batches(
    dist: LabelDistribution | np.ndarray,
    batch_size: int,
    n_w: int = 0,
    seed: int | np.random.Generator = 0,
    bind_classes: bool = False,
) -> list[BatchPlan]:
    """Randomly partition the samples of one epoch into batches.

    The last batch may be short. With ``bind_classes`` every batch that is
    missing a class gets one sample of that class, drawn from outside the
    batch, appended to it; such samples then appear in two batches of the
    epoch and the batch grows by at most ``k - 1``.
    """
    labels = dist.labels() if isinstance(dist, LabelDistribution) else np.asarray(dist)
    k = int(labels.max()) + 1
    n_total = len(labels)
    if batch_size < 1 or batch_size > n_total:
        raise ConfigError(f"batch size must be in [1, N={n_total}], got {batch_size}")
    if bind_classes and batch_size < k:
        raise ConfigError(f"class binding needs batch size >= k={k}, got {batch_size}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    perm = rng.permutation(n_total)
    chunks = [perm[s : s + batch_size] for s in range(0, n_total, batch_size)]
    by_class = [np.flatnonzero(labels == c) for c in range(k)]

    plans = []
    for chunk in chunks:
        bound = np.zeros(0, dtype=np.int64)
        if bind_classes:
            present = np.zeros(k, dtype=bool)
            present[labels[chunk]] = True
            extra = []
            for c in np.flatnonzero(~present):
                extra.append(rng.choice(by_class[c]))
            bound = np.asarray(extra, dtype=np.int64)
            chunk = np.concatenate([chunk, bound])
        plans.append(BatchPlan(chunk, n_w, bound))
    return plans
