"""Geometry diagnostics for a set of embeddings."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import EmbeddingSet
from .errors import DegenerateError, EmptyClassError
from .geometry import PrototypeSet, convergence_delta, gram


@dataclass
class MetricsRecord:
    epoch: int
    loss: float
    delta: float
    alignment: float
    spread: float
    min_mean_norm: float = float("nan")
    max_mean_norm: float = float("nan")

    CSV_FIELDS = ("epoch", "loss", "delta", "alignment", "spread")

    def as_dict(self) -> dict:
        return asdict(self)


def class_means(embeddings: EmbeddingSet, k: int | None = None) -> np.ndarray:
    """``d x k`` matrix of per-class averages (not renormalized)."""
    k = embeddings.k if k is None else k
    counts = np.bincount(embeddings.labels, minlength=k)
    if np.any(counts == 0):
        raise EmptyClassError(f"classes {np.flatnonzero(counts == 0).tolist()} have no samples")
    sums = np.zeros((embeddings.d, k))
    np.add.at(sums.T, embeddings.labels, embeddings.vectors.T)
    return sums / counts


def mean_gram(embeddings: EmbeddingSet, normalize_means: bool = False) -> np.ndarray:
    m = class_means(embeddings)
    if normalize_means:
        norms = np.linalg.norm(m, axis=0)
        if np.any(norms < 1e-15):
            raise DegenerateError("cannot normalize a vanishing class mean")
        m = m / norms
    return gram(m)


def geometry_delta(embeddings: EmbeddingSet, reference: np.ndarray, normalize_means: bool = False) -> float:
    g_m = mean_gram(embeddings, normalize_means)
    if np.linalg.norm(g_m) < 1e-15:
        raise DegenerateError("all class means vanish")
    return convergence_delta(g_m, reference)


def alignment(embeddings: EmbeddingSet, prototypes: PrototypeSet) -> float:
    """Mean inner product between each embedding and its class prototype."""
    w = prototypes.vectors[:, embeddings.labels]
    return float(np.mean(np.sum(w * embeddings.vectors, axis=0)))


def within_class_spread(embeddings: EmbeddingSet) -> float:
    m = class_means(embeddings)
    return float(np.mean(np.linalg.norm(embeddings.vectors - m[:, embeddings.labels], axis=0)))


def normalized(g: np.ndarray) -> np.ndarray:
    return g / np.linalg.norm(g)


def metrics(
    embeddings: EmbeddingSet,
    prototypes: PrototypeSet,
    epoch: int = 0,
    loss: float = float("nan"),
    normalize_means: bool = False,
) -> MetricsRecord:
    means = class_means(embeddings)
    norms = np.linalg.norm(means, axis=0)
    return MetricsRecord(
        epoch=epoch,
        loss=loss,
        delta=geometry_delta(embeddings, prototypes.gram, normalize_means),
        alignment=alignment(embeddings, prototypes),
        spread=within_class_spread(embeddings),
        min_mean_norm=float(norms.min()),
        max_mean_norm=float(norms.max()),
    )
