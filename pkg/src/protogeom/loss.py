"""Supervised-contrastive losses on free embeddings and their gradients.

Three losses share one calling convention ``f(embeddings, plan, ...)`` and
return a :class:`LossReport` whose ``grad`` is the ambient Euclidean
gradient over the full ``d x N`` embedding matrix (zero outside the batch).

* :func:`scl_loss` -- vanilla batch SCL.
* :func:`scl_augmented_loss` -- SCL on the batch extended by ``n_w`` copies
  of every prototype, evaluated without materializing the copies.
* :func:`limit_loss` -- the large-``n_w`` form: cross-entropy against the
  fixed prototypes plus an alignment term.

All inner products are divided by the temperature ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import BatchPlan, EmbeddingSet
from .errors import DomainError, EmptyAnchorError, MismatchError
from .geometry import PrototypeSet

LOSS_KINDS = ("scl", "scl_proto", "limit")


@dataclass(frozen=True)
class LossParams:
    temperature: float = 0.1

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")

    @property
    def tau(self) -> float:
        return self.temperature


@dataclass
class LossReport:
    value: float
    grad: np.ndarray
    inner_product_count: int
    anchors: int = 0


def _batch(embeddings: EmbeddingSet, plan: BatchPlan):
    idx = plan.sample_indices
    return idx, embeddings.vectors[:, idx], embeddings.labels[idx]


def _scatter(embeddings: EmbeddingSet, idx: np.ndarray, g_batch: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(embeddings.vectors)
    grad[:, idx] = g_batch
    return grad


def _check_protos(embeddings: EmbeddingSet, prototypes: PrototypeSet):
    if prototypes.d != embeddings.d:
        raise MismatchError(f"prototype dim {prototypes.d} != embedding dim {embeddings.d}")
    if prototypes.k < embeddings.k:
        raise MismatchError(f"{prototypes.k} prototypes for {embeddings.k} classes")


def scl_loss(embeddings: EmbeddingSet, plan: BatchPlan, params: LossParams = LossParams()) -> LossReport:
    """Vanilla supervised-contrastive loss of one batch.

    Anchors without an in-batch positive are skipped as anchors but still
    act as negatives for everyone else.
    """
    if plan.n_w:
        raise DomainError("scl_loss takes a plan with n_w = 0; use scl_augmented_loss")
    idx, h, y = _batch(embeddings, plan)
    n = len(idx)
    if n < 2:
        raise EmptyAnchorError("batch needs at least two samples")
    tau = params.tau

    s = (h.T @ h) / tau
    off = ~np.eye(n, dtype=bool)
    pos = (y[:, None] == y[None, :]) & off
    n_pos = pos.sum(axis=1)
    anchor = n_pos > 0
    if not anchor.any():
        raise EmptyAnchorError("no anchor in the batch has a positive")

    masked = np.where(off, s, -np.inf)
    row_max = masked.max(axis=1, keepdims=True)
    e = np.exp(masked - row_max)
    z = e.sum(axis=1, keepdims=True)
    lse = row_max[:, 0] + np.log(z[:, 0])
    softmax = e / z

    inv_pos = np.where(anchor, 1.0 / np.maximum(n_pos, 1), 0.0)
    pos_mean = (np.where(pos, s, 0.0).sum(axis=1)) * inv_pos
    value = float(np.sum(np.where(anchor, lse - pos_mean, 0.0)))

    coef = anchor[:, None] * (softmax - pos * inv_pos[:, None])
    g = h @ (coef + coef.T) / tau
    return LossReport(value, _scatter(embeddings, idx, g), n * (n - 1) // 2, int(anchor.sum()))


def scl_augmented_loss(
    embeddings: EmbeddingSet,
    plan: BatchPlan,
    prototypes: PrototypeSet,
    params: LossParams = LossParams(),
) -> LossReport:
    """SCL on the batch plus ``plan.n_w`` copies of each prototype.

    The copies are handled as multiplicities: point ``v`` with multiplicity
    ``m_v`` enters every denominator and positive sum ``m_v`` times (one
    less for the anchor's own copies), and each anchor's term is counted
    ``m_u`` times. Only the ``n(n-1)/2`` sample pairs and ``n*k``
    sample/prototype pairs are computed; prototype pairs come from the
    cached prototype Gram, so the cost does not depend on ``n_w``.
    """
    n_w = int(plan.n_w)
    if n_w < 1:
        raise DomainError("scl_augmented_loss needs n_w >= 1")
    _check_protos(embeddings, prototypes)
    idx, h, y = _batch(embeddings, plan)
    n, k = len(idx), prototypes.k
    w = prototypes.vectors
    tau = params.tau

    s = np.empty((n + k, n + k))
    s[:n, :n] = h.T @ h
    s[:n, n:] = h.T @ w
    s[n:, :n] = s[:n, n:].T
    s[n:, n:] = prototypes.gram
    s /= tau

    labels = np.concatenate([y, np.arange(k)])
    mult = np.concatenate([np.ones(n), np.full(k, float(n_w))])
    # multiplicity of v seen from an anchor at u: the anchor excludes itself
    m_other = np.broadcast_to(mult, (n + k, n + k)) - np.eye(n + k)
    same = labels[:, None] == labels[None, :]

    with np.errstate(divide="ignore"):
        log_m = np.log(m_other)
    a = s + log_m
    row_max = a.max(axis=1, keepdims=True)
    e = np.exp(a - row_max)
    z = e.sum(axis=1, keepdims=True)
    lse = row_max[:, 0] + np.log(z[:, 0])
    softmax = e / z

    pos_w = np.where(same, m_other, 0.0)
    n_pos = pos_w.sum(axis=1)
    anchor = n_pos > 0.5
    if not anchor.any():
        raise EmptyAnchorError("no anchor in the augmented batch has a positive")
    inv_pos = np.where(anchor, 1.0 / np.maximum(n_pos, 1.0), 0.0)
    pos_mean = (pos_w * s).sum(axis=1) * inv_pos
    value = float(np.sum(np.where(anchor, mult * (lse - pos_mean), 0.0)))

    coef = (mult * anchor)[:, None] * (softmax - pos_w * inv_pos[:, None])
    sym = coef[:, :n] + coef[:n, :].T
    x = np.concatenate([h, w], axis=1)
    g = x @ sym / tau
    count = n * (n - 1) // 2 + n * k
    return LossReport(value, _scatter(embeddings, idx, g), count, int(anchor.sum()))


def limit_loss(
    embeddings: EmbeddingSet,
    plan: BatchPlan,
    prototypes: PrototypeSet,
    params: LossParams = LossParams(),
) -> LossReport:
    """Cross-entropy against fixed prototypes plus an alignment reward.

    Per sample: ``logsumexp_c(w_c.h/tau) - 2 w_y.h/tau``, i.e. the CE term
    minus the alignment ``w_y.h/tau``.
    """
    _check_protos(embeddings, prototypes)
    idx, h, y = _batch(embeddings, plan)
    if len(idx) == 0:
        raise EmptyAnchorError("empty batch")
    w = prototypes.vectors
    tau = params.tau
    logits = (h.T @ w) / tau
    row_max = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - row_max)
    z = e.sum(axis=1, keepdims=True)
    lse = row_max[:, 0] + np.log(z[:, 0])
    rows = np.arange(len(idx))
    value = float(np.sum(lse - 2.0 * logits[rows, y]))
    p = e / z
    g = (w @ p.T - 2.0 * w[:, y]) / tau
    return LossReport(value, _scatter(embeddings, idx, g), len(idx) * prototypes.k, len(idx))


def evaluate(
    kind: str,
    embeddings: EmbeddingSet,
    plan: BatchPlan,
    prototypes: PrototypeSet | None = None,
    params: LossParams = LossParams(),
) -> LossReport:
    """Dispatch on the loss name used in configs (``scl``, ``scl_proto``, ``limit``)."""
    if kind == "scl":
        return scl_loss(embeddings, plan, params)
    if prototypes is None:
        raise DomainError(f"loss {kind!r} needs prototypes")
    if kind == "scl_proto":
        return scl_augmented_loss(embeddings, plan, prototypes, params)
    if kind == "limit":
        return limit_loss(embeddings, plan, prototypes, params)
    raise DomainError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def grad_check(
    kind: str | Callable[[EmbeddingSet], LossReport],
    embeddings: EmbeddingSet,
    plan: BatchPlan | None = None,
    prototypes: PrototypeSet | None = None,
    params: LossParams = LossParams(),
    eps: float = 1e-6,
    n_coords: int = 20,
    seed: int = 0,
    analytic: np.ndarray | None = None,
) -> float:
    """Max relative error between the analytic gradient and central differences.

    ``kind`` is a loss name or any callable mapping embeddings to a
    LossReport. ``analytic`` replaces the reported gradient (used to feed
    deliberately wrong gradients in negative-control tests). Relative error
    is ``|a - f| / max(1, |a|, |f|)`` over a seeded subset of batch coordinates.
    """
    if not 1e-8 <= eps <= 1e-4:
        raise DomainError(f"perturbation must lie in [1e-8, 1e-4], got {eps}")
    if callable(kind):
        fn = kind
    else:
        fn = lambda e: evaluate(kind, e, plan, prototypes, params)  # noqa: E731

    grad = fn(embeddings).grad if analytic is None else np.asarray(analytic)
    cols = plan.sample_indices if plan is not None else np.arange(embeddings.n)
    coords = np.array([(r, c) for c in cols for r in range(embeddings.d)])
    rng = np.random.default_rng(seed)
    if len(coords) > n_coords:
        coords = coords[rng.choice(len(coords), size=n_coords, replace=False)]

    probe = embeddings.copy()
    worst = 0.0
    for r, c in coords:
        orig = probe.vectors[r, c]
        probe.vectors[r, c] = orig + eps
        f_plus = fn(probe).value
        probe.vectors[r, c] = orig - eps
        f_minus = fn(probe).value
        probe.vectors[r, c] = orig
        fd = (f_plus - f_minus) / (2.0 * eps)
        a = grad[r, c]
        worst = max(worst, abs(a - fd) / max(1.0, abs(a), abs(fd)))
    return worst


def limit_gap(
    embeddings: EmbeddingSet,
    prototypes: PrototypeSet,
    plan: BatchPlan,
    n_w_values: Sequence[int],
    params: LossParams = LossParams(),
) -> list[tuple[int, float]]:
    """Relative Frobenius gap between augmented and limit gradients for each ``n_w``."""
    ref = limit_loss(embeddings, plan, prototypes, params).grad
    ref_norm = np.linalg.norm(ref)
    out = []
    for n_w in n_w_values:
        swept = BatchPlan(plan.sample_indices, int(n_w))
        g = scl_augmented_loss(embeddings, swept, prototypes, params).grad
        out.append((int(n_w), float(np.linalg.norm(g - ref) / ref_norm)))
    return out
