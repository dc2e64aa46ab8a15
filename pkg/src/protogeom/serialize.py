"""Plain-text and raster outputs: Gram CSV, embedding CSV, metrics CSV, PGM heatmaps.

Decimals are written with 9 significant digits. Output is bit-identical
for bit-identical inputs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

from .analysis import MetricsRecord
from .data import EmbeddingSet
from .errors import DomainError

CELL = 32


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def write_matrix_csv(path: str | Path, rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    Path(path).write_text("".join(",".join(fmt(v) for v in r) + "\n" for r in rows))


def write_gram_csv(path: str | Path, g: np.ndarray) -> None:
    """k rows of k comma-separated values, no header."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError(f"Gram matrix must be square, got {g.shape}")
    write_matrix_csv(path, g)


def read_gram_csv(path: str | Path) -> np.ndarray:
    g = np.loadtxt(path, delimiter=",", ndmin=2)
    if g.shape[0] != g.shape[1]:
        raise DomainError(f"{path}: Gram CSV must be square, got {g.shape}")
    return g


def write_embeddings_csv(path: str | Path, emb: EmbeddingSet) -> None:
    """Header ``d,N,k`` then one line per sample: label, then d coordinates."""
    lines = [f"{emb.d},{emb.n},{emb.k}\n"]
    for label, col in zip(emb.labels, emb.vectors.T):
        lines.append(str(int(label)) + "," + ",".join(fmt(v) for v in col) + "\n")
    Path(path).write_text("".join(lines))


def read_embeddings_csv(path: str | Path) -> EmbeddingSet:
    with open(path) as fh:
        header = fh.readline()
        try:
            d, n, k = (int(t) for t in header.strip().split(","))
        except ValueError as exc:
            raise DomainError(f"{path}: bad header {header!r}, expected d,N,k") from exc
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape != (n, d + 1):
        raise DomainError(f"{path}: expected {n} rows of {d + 1} values, got {body.shape}")
    return EmbeddingSet(body[:, 1:].T.copy(), body[:, 0].astype(np.int64), k)


def write_metrics_csv(path: str | Path, records: Iterable[MetricsRecord]) -> None:
    lines = [",".join(MetricsRecord.CSV_FIELDS) + "\n"]
    for r in records:
        lines.append(f"{r.epoch},{fmt(r.loss)},{fmt(r.delta)},{fmt(r.alignment)},{fmt(r.spread)}\n")
    Path(path).write_text("".join(lines))


def read_metrics_csv(path: str | Path) -> np.ndarray:
    """Structured array with the metrics columns."""
    return np.genfromtxt(path, delimiter=",", names=True)


def heatmap(g: np.ndarray, cell: int = CELL) -> np.ndarray:
    """Grayscale raster of a matrix with values in [-1, 1] mapped linearly to [0, 255]."""
    g = np.asarray(g, dtype=np.float64)
    levels = np.rint((np.clip(g, -1.0, 1.0) + 1.0) * 127.5).astype(np.uint8)
    return np.kron(levels, np.ones((cell, cell), dtype=np.uint8))


def write_pgm(path: str | Path, g: np.ndarray, cell: int = CELL) -> None:
    """Binary PGM (P5, maxval 255) heatmap of ``g``."""
    img = heatmap(g, cell)
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise DomainError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise DomainError(f"{path}: unsupported maxval {maxval}")
    pixels = data[len(data) - w * h :]
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w)
