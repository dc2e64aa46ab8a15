"""Projected gradient descent of free embeddings on the unit sphere."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .analysis import MetricsRecord, metrics
from .config import RunConfig, Schedule
from .data import BatchPlan, EmbeddingSet, init_embeddings, sample_batches
from .errors import EmptyAnchorError, NumericalError
from .geometry import PrototypeSet
from .loss import LossParams, evaluate

log = logging.getLogger(__name__)

NORM_TOL = 1e-9

__all__ = ["Schedule", "TrainState", "project_and_step", "run", "initial_loss"]


def project_and_step(
    embeddings: EmbeddingSet,
    grad: np.ndarray,
    lr: float,
    columns: np.ndarray | None = None,
    velocity: np.ndarray | None = None,
    momentum: float = 0.0,
) -> EmbeddingSet:
    """One Riemannian SGD step with renormalization as the retraction.

    The ambient gradient of each column is projected onto the tangent
    space of the sphere at that column, a step of size ``lr`` is taken and
    the result is rescaled to unit norm. Columns whose tangent gradient is
    below 1e-15 are left untouched. Updates ``embeddings`` in place.
    """
    cols = np.arange(embeddings.n) if columns is None else np.asarray(columns)
    g = np.asarray(grad)[:, cols]
    if not np.all(np.isfinite(g)):
        bad = cols[~np.all(np.isfinite(g), axis=0)]
        raise NumericalError(f"non-finite gradient in columns {bad[:10].tolist()}")
    h = embeddings.vectors[:, cols]
    g_t = g - h * np.sum(h * g, axis=0)
    if velocity is not None and momentum > 0:
        v = momentum * velocity[:, cols] + g_t
        v -= h * np.sum(h * v, axis=0)
        velocity[:, cols] = v
        g_t = v
    moving = np.linalg.norm(g_t, axis=0) >= 1e-15
    if not moving.any():
        return embeddings
    stepped = h[:, moving] - lr * g_t[:, moving]
    stepped /= np.linalg.norm(stepped, axis=0, keepdims=True)
    embeddings.vectors[:, cols[moving]] = stepped
    return embeddings


@dataclass
class TrainState:
    embeddings: EmbeddingSet
    prototypes: PrototypeSet
    config: RunConfig
    epoch: int = 0
    history: list[MetricsRecord] = field(default_factory=list)
    skipped_batches: int = 0
    short_batches: int = 0


def _batch_loss(cfg: RunConfig, emb, plan, protos, params) -> float | None:
    try:
        return evaluate(cfg.loss, emb, plan, protos, params).value
    except EmptyAnchorError:
        return None


def initial_loss(cfg: RunConfig, emb: EmbeddingSet, protos: PrototypeSet) -> float:
    """Mean batch loss over an in-order partition; consumes no randomness."""
    params = cfg.params
    n = cfg.batch_size
    values = []
    for s in range(0, emb.n, n):
        v = _batch_loss(cfg, emb, BatchPlan(np.arange(s, min(s + n, emb.n)), cfg.n_w), protos, params)
        if v is not None:
            values.append(v)
    return float(np.mean(values)) if values else float("nan")


def _record(state: TrainState, loss: float) -> MetricsRecord:
    emb = state.embeddings
    drift = emb.max_norm_drift()
    if drift >= NORM_TOL:
        raise NumericalError(f"norm drift {drift:.3g} at epoch {state.epoch}")
    rec = metrics(emb, state.prototypes, state.epoch, loss, state.config.normalize_means)
    state.history.append(rec)
    return rec


def run(config: RunConfig, state: TrainState | None = None) -> TrainState:
    """Train the free embeddings for ``config.epochs`` epochs.

    The history gets one record for the initialization (epoch 0) and one
    per epoch. A batch in which no sample has a positive (possible with
    vanilla SCL and small batches) is skipped. On a numerical failure the
    partial state is attached to the exception as ``exc.state``.
    """
    cfg = config
    if state is None:
        protos = cfg.prototypes()
        emb = init_embeddings(cfg.distribution(), cfg.d, cfg.seed_init)
        state = TrainState(emb, protos, cfg)
    emb, protos = state.embeddings, state.prototypes
    params: LossParams = cfg.params
    schedule = cfg.schedule
    rng = np.random.default_rng(cfg.seed_batch)
    velocity = np.zeros_like(emb.vectors) if cfg.momentum > 0 else None

    try:
        _record(state, initial_loss(cfg, emb, protos))
        for epoch in range(1, schedule.epochs + 1):
            lr = schedule.lr(epoch)
            plans = sample_batches(emb.labels, cfg.batch_size, cfg.n_w, rng, cfg.bind_classes)
            if len(plans[-1]) < cfg.batch_size:
                state.short_batches += 1
            losses = []
            for plan in plans:
                try:
                    report = evaluate(cfg.loss, emb, plan, protos, params)
                except EmptyAnchorError:
                    state.skipped_batches += 1
                    continue
                if not np.isfinite(report.value):
                    raise NumericalError(f"non-finite loss at epoch {epoch}")
                project_and_step(emb, report.grad, lr, plan.sample_indices, velocity, cfg.momentum)
                losses.append(report.value)
            state.epoch = epoch
            _record(state, float(np.mean(losses)) if losses else float("nan"))
    except NumericalError as exc:
        exc.state = state
        raise
    if state.skipped_batches:
        log.info("skipped %d batches without anchors", state.skipped_batches)
    return state
