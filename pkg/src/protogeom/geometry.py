"""Prototype geometries and Gram-matrix comparison.

Prototypes are stored column-wise in a ``d x k`` matrix. Every generator
works in two stages: it first builds a ``r x k`` factor whose Gram matrix
is the requested target (``r`` = rank of the target), then rotates that
factor into ``R^d`` with a seeded random orthonormal frame. Only the Gram
matrix is meaningful; the orientation is fixed by ``seed`` so that runs
are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.linalg import helmert

from .errors import (
    DegenerateError,
    DiagonalError,
    DimensionError,
    DomainError,
    NotPSDError,
    RankError,
)

UNIT_TOL = 1e-12
PSD_TOL = 1e-8
RANK_TOL = 1e-8

GEOMETRY_KINDS = ("etf", "gram_target", "minority_angle", "majority_collapse")


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    """Fixed unit-norm class prototypes, one column per class."""

    vectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.vectors, dtype=np.float64)
        if w.ndim != 2:
            raise DimensionError(f"prototype matrix must be 2-D, got shape {w.shape}")
        d, k = w.shape
        if k < 2 or d < 1:
            raise DimensionError(f"need k >= 2 and d >= 1, got k={k}, d={d}")
        norms = np.linalg.norm(w, axis=0)
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise DomainError("prototype columns must have unit norm")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "vectors", w)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def class_count(self) -> int:
        return self.vectors.shape[1]

    # short aliases used throughout the loss code
    d = dim
    k = class_count

    @cached_property
    def gram(self) -> np.ndarray:
        """Prototype Gram matrix, cached because prototypes never change."""
        g = gram(self.vectors)
        g.setflags(write=False)
        return g


@dataclass(frozen=True)
class GeometrySpec:
    """Names a prototype geometry and carries its parameters.

    ``kind`` is one of ``etf``, ``gram_target``, ``minority_angle`` or
    ``majority_collapse``. ``target`` is only used by ``gram_target``.
    """

    kind: str = "etf"
    minority: tuple[int, ...] = ()
    majority: tuple[int, ...] = ()
    cos_min_min: float = -0.9
    cos_rest: float | None = None
    target: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in GEOMETRY_KINDS:
            raise DomainError(f"unknown geometry kind {self.kind!r}; expected one of {GEOMETRY_KINDS}")
        if self.kind == "gram_target" and self.target is None:
            raise DomainError("gram_target geometry needs a target Gram matrix")
        if self.kind == "majority_collapse" and len(set(self.majority)) < 2:
            raise DomainError("majority_collapse needs at least two majority classes")
        if self.kind == "minority_angle":
            for name in ("cos_min_min", "cos_rest"):
                v = getattr(self, name)
                if v is not None and not -1.0 <= v <= 1.0:
                    raise DomainError(f"{name}={v} outside [-1, 1]")

    def build(self, k: int, d: int, seed: int = 0) -> PrototypeSet:
        if self.kind == "etf":
            return make_etf(k, d, seed=seed)
        if self.kind == "gram_target":
            return make_from_gram(self.target, d, seed=seed)
        if self.kind == "minority_angle":
            cos_rest = -1.0 / (k - 1) if self.cos_rest is None else self.cos_rest
            return make_minority_angle(k, self.minority, self.cos_min_min, cos_rest, d, seed=seed)
        return make_majority_collapse(k, self.majority, d, seed=seed)


def gram(vectors: np.ndarray) -> np.ndarray:
    """Pairwise inner products of the columns of ``vectors``."""
    v = np.asarray(vectors, dtype=np.float64)
    g = v.T @ v
    # exact symmetry regardless of BLAS blocking
    return 0.5 * (g + g.T)


def _random_frame(d: int, r: int, seed: int) -> np.ndarray:
    """``d x r`` matrix with orthonormal columns drawn from a seeded Gaussian."""
    rng = np.random.default_rng(seed)
    q, r_ = np.linalg.qr(rng.standard_normal((d, r)))
    # fix QR sign ambiguity so the frame is a function of the seed only
    return q * np.sign(np.where(np.diag(r_) == 0, 1.0, np.diag(r_)))


def _embed(factor: np.ndarray, d: int, seed: int) -> PrototypeSet:
    r = factor.shape[0]
    if r > d:
        raise DimensionError(f"geometry needs rank {r} but d={d}")
    w = _random_frame(d, r, seed) @ factor
    w /= np.linalg.norm(w, axis=0, keepdims=True)
    return PrototypeSet(w)


def etf_gram(k: int) -> np.ndarray:
    """Analytic simplex-ETF Gram: 1 on the diagonal, -1/(k-1) elsewhere."""
    if k < 2:
        raise DimensionError(f"ETF needs k >= 2, got {k}")
    return (k / (k - 1.0)) * (np.eye(k) - np.full((k, k), 1.0 / k))


def make_etf(k: int, d: int, seed: int = 0) -> PrototypeSet:
    """Simplex equiangular tight frame of ``k`` unit vectors in ``R^d``.

    The centered identity ``I - 11^T/k`` factors as ``H^T H`` with ``H``
    the Helmert sub-matrix (orthonormal rows orthogonal to the ones
    vector), so ``sqrt(k/(k-1)) H`` is a ``(k-1) x k`` ETF factor.
    """
    if k < 2:
        raise DimensionError(f"ETF needs k >= 2, got {k}")
    if d < k - 1:
        raise DimensionError(f"ETF of {k} vectors needs d >= {k - 1}, got d={d}")
    factor = np.sqrt(k / (k - 1.0)) * helmert(k)
    return _embed(factor, d, seed)


def _check_gram(target: np.ndarray) -> np.ndarray:
    g = np.asarray(target, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionError(f"Gram target must be square, got shape {g.shape}")
    if np.max(np.abs(g - g.T)) > PSD_TOL:
        raise DomainError("Gram target is not symmetric")
    if np.max(np.abs(np.diag(g) - 1.0)) > PSD_TOL:
        raise DiagonalError(f"Gram target diagonal must be 1, got {np.diag(g)}")
    return 0.5 * (g + g.T)


def make_from_gram(target: np.ndarray, d: int, seed: int = 0) -> PrototypeSet:
    """Realize a unit-diagonal PSD Gram matrix with prototypes in ``R^d``.

    Invalid targets are rejected, never silently projected onto the PSD cone.
    """
    g = _check_gram(target)
    evals, evecs = np.linalg.eigh(g)
    if evals[0] < -PSD_TOL:
        raise NotPSDError(
            f"Gram target is not positive semidefinite: smallest eigenvalue {evals[0]:.6g}"
        )
    keep = evals > RANK_TOL
    rank = int(keep.sum())
    if rank > d:
        raise RankError(f"Gram target has numerical rank {rank} > d={d}")
    factor = np.sqrt(evals[keep])[:, None] * evecs[:, keep].T
    return _embed(factor, d, seed)


def minority_angle_gram(k: int, minority: Iterable[int], cos_min_min: float, cos_rest: float) -> np.ndarray:
    minority = sorted(set(int(c) for c in minority))
    if any(c < 0 or c >= k for c in minority):
        raise DomainError(f"minority indices {minority} outside [0, {k})")
    g = np.full((k, k), float(cos_rest))
    if len(minority) >= 2:
        if not cos_min_min < cos_rest:
            raise DomainError(
                f"minority pairs need a larger angle: cos_min_min={cos_min_min} must be < cos_rest={cos_rest}"
            )
        g[np.ix_(minority, minority)] = cos_min_min
    np.fill_diagonal(g, 1.0)
    return g


def make_minority_angle(
    k: int,
    minority: Iterable[int],
    cos_min_min: float,
    cos_rest: float,
    d: int,
    seed: int = 0,
) -> PrototypeSet:
    """Two-level geometry: minority-minority pairs at ``cos_min_min``, all other pairs at ``cos_rest``."""
    return make_from_gram(minority_angle_gram(k, minority, cos_min_min, cos_rest), d, seed=seed)


def majority_collapse_gram(k: int, majority: Iterable[int]) -> np.ndarray:
    groups = _collapse_groups(k, majority)
    k_eff = groups.max() + 1
    base = np.ones((1, 1)) if k_eff == 1 else etf_gram(k_eff)
    return base[np.ix_(groups, groups)]


def _collapse_groups(k: int, majority: Iterable[int]) -> np.ndarray:
    majority = sorted(set(int(c) for c in majority))
    if len(majority) < 2:
        raise DomainError("majority collapse needs at least two majority classes")
    if any(c < 0 or c >= k for c in majority):
        raise DomainError(f"majority indices {majority} outside [0, {k})")
    groups = np.empty(k, dtype=np.int64)
    groups[majority] = 0
    rest = [c for c in range(k) if c not in majority]
    groups[rest] = np.arange(1, len(rest) + 1)
    return groups


def make_majority_collapse(k: int, majority: Iterable[int], d: int, seed: int = 0) -> PrototypeSet:
    """All majority classes share one prototype; the distinct directions form an ETF."""
    groups = _collapse_groups(k, majority)
    k_eff = int(groups.max()) + 1
    if d < k_eff - 1:
        raise DimensionError(f"majority collapse needs d >= {k_eff - 1} (k_eff={k_eff}), got d={d}")
    if k_eff == 1:
        factor = np.ones((1, 1))
    else:
        factor = np.sqrt(k_eff / (k_eff - 1.0)) * helmert(k_eff)
    w = _random_frame(d, factor.shape[0], seed) @ factor
    w /= np.linalg.norm(w, axis=0, keepdims=True)
    return PrototypeSet(w[:, groups])


def convergence_delta(g_m: np.ndarray, g_star: np.ndarray) -> float:
    """Frobenius distance between Frobenius-normalized Gram matrices."""
    a = np.asarray(g_m, dtype=np.float64)
    b = np.asarray(g_star, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-15 or nb < 1e-15:
        raise DegenerateError("cannot normalize a (near) zero Gram matrix")
    return float(np.linalg.norm(a / na - b / nb))
