"""Run configuration: flat ``key = value`` files with dotted geometry keys.

Example::

    # STEP-imbalanced run with ETF prototypes
    k = 4
    d = 8
    n_maj = 50
    ratio = 10
    batch_size = 32
    loss = scl_proto
    n_w = 8
    geometry.kind = etf
    epochs = 300
    anneal_epochs = 200, 250

Unknown keys are rejected. ``seed`` is the base seed; ``seed.geometry``,
``seed.init`` and ``seed.batch`` default to ``seed``, ``seed + 1`` and
``seed + 2``. The echo written next to every run lists all resolved
values, so reading it back reproduces the run exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ProtoGeomError
from .geometry import GeometrySpec
from .loss import LOSS_KINDS, LossParams


@dataclass(frozen=True)
class Schedule:
    base_lr: float = 0.5
    anneal_epochs: tuple[int, ...] = ()
    anneal_factor: float = 0.1
    epochs: int = 100

    def __post_init__(self):
        if not self.base_lr > 0:
            raise ConfigError(f"base_lr must be positive, got {self.base_lr}")
        if not 0 < self.anneal_factor <= 1:
            raise ConfigError(f"anneal_factor must lie in (0, 1], got {self.anneal_factor}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        a = self.anneal_epochs
        if any(b <= c for c, b in zip(a, a[1:])):
            raise ConfigError(f"anneal_epochs must be strictly increasing, got {a}")
        if a and a[-1] >= self.epochs:
            raise ConfigError(f"anneal_epochs must all be < epochs={self.epochs}, got {a}")

    def lr(self, epoch: int) -> float:
        n = sum(1 for e in self.anneal_epochs if e <= epoch)
        return self.base_lr * self.anneal_factor**n


@dataclass(frozen=True)
class RunConfig:
    k: int = 4
    d: int = 8
    n_maj: int = 50
    ratio: int = 10
    batch_size: int = 32
    n_w: int = 0
    loss: str = "limit"
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    tau: float = 0.1
    lr: float = 0.5
    anneal_epochs: tuple[int, ...] = ()
    anneal_factor: float = 0.1
    epochs: int = 100
    momentum: float = 0.0
    seed: int = 0
    seed_geometry: int | None = None
    seed_init: int | None = None
    seed_batch: int | None = None
    bind_classes: bool = False
    normalize_means: bool = False
    limitgap_n_w: tuple[int, ...] = (10, 100, 1000, 10000)
    geometry_target_path: str | None = None
    out: str = "run"

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.loss == "scl" and self.n_w != 0:
            raise ConfigError("loss scl runs without prototypes; n_w must be 0")
        if self.loss == "scl_proto" and self.n_w < 1:
            raise ConfigError("loss scl_proto needs n_w >= 1")
        if self.n_w < 0:
            raise ConfigError(f"n_w must be >= 0, got {self.n_w}")
        if self.k < 2 or self.d < 1:
            raise ConfigError(f"need k >= 2 and d >= 1, got k={self.k}, d={self.d}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must lie in [0, 1), got {self.momentum}")
        n_total = self.distribution().total
        if not 1 <= self.batch_size <= n_total:
            raise ConfigError(f"batch_size must be in [1, N={n_total}], got {self.batch_size}")
        if self.bind_classes and self.batch_size < self.k:
            raise ConfigError(f"bind_classes needs batch_size >= k={self.k}")
        self.schedule  # validates
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        for name, off in (("seed_geometry", 0), ("seed_init", 1), ("seed_batch", 2)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, self.seed + off)

    @property
    def schedule(self) -> Schedule:
        return Schedule(self.lr, tuple(self.anneal_epochs), self.anneal_factor, self.epochs)

    @property
    def params(self) -> LossParams:
        return LossParams(self.tau)

    def distribution(self):
        from .data import step_imbalance

        try:
            return step_imbalance(self.k, self.n_maj, self.ratio)
        except ProtoGeomError as exc:
            raise ConfigError(str(exc)) from exc

    def prototypes(self):
        try:
            return self.geometry.build(self.k, self.d, seed=self.seed_geometry)
        except ConfigError:
            raise
        except ProtoGeomError as exc:
            raise ConfigError(f"geometry {self.geometry.kind}: {exc}") from exc

    def replace(self, **changes) -> "RunConfig":
        if "seed" in changes:
            # a new base seed re-derives the per-purpose seeds
            changes.setdefault("seed_geometry", None)
            changes.setdefault("seed_init", None)
            changes.setdefault("seed_batch", None)
        return dataclasses.replace(self, **changes)

    def echo(self) -> str:
        """Serialize every resolved value in the input format."""
        g = self.geometry
        lines = [
            f"k = {self.k}",
            f"d = {self.d}",
            f"n_maj = {self.n_maj}",
            f"ratio = {self.ratio}",
            f"batch_size = {self.batch_size}",
            f"n_w = {self.n_w}",
            f"loss = {self.loss}",
            f"geometry.kind = {g.kind}",
            f"geometry.minority = {_fmt_ints(g.minority)}",
            f"geometry.majority = {_fmt_ints(g.majority)}",
            f"geometry.cos_min_min = {g.cos_min_min!r}",
            f"geometry.cos_rest = {'' if g.cos_rest is None else repr(g.cos_rest)}",
            f"geometry.target = {self.geometry_target_path or ''}",
            f"tau = {self.tau!r}",
            f"lr = {self.lr!r}",
            f"anneal_epochs = {_fmt_ints(self.anneal_epochs)}",
            f"anneal_factor = {self.anneal_factor!r}",
            f"epochs = {self.epochs}",
            f"momentum = {self.momentum!r}",
            f"seed = {self.seed}",
            f"seed.geometry = {self.seed_geometry}",
            f"seed.init = {self.seed_init}",
            f"seed.batch = {self.seed_batch}",
            f"bind_classes = {str(self.bind_classes).lower()}",
            f"normalize_means = {str(self.normalize_means).lower()}",
            f"limitgap.n_w = {_fmt_ints(self.limitgap_n_w)}",
            f"out = {self.out}",
        ]
        return "\n".join(lines) + "\n"


def _fmt_ints(values) -> str:
    return ", ".join(str(int(v)) for v in values)


def _ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(float(t)) for t in text.replace(";", ",").split(","))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if not text.strip() else float(text)


def _opt_int(text: str):
    return None if not text.strip() else int(text)


_SCALARS = {
    "k": ("k", int),
    "d": ("d", int),
    "n_maj": ("n_maj", int),
    "ratio": ("ratio", int),
    "batch_size": ("batch_size", int),
    "n": ("batch_size", int),
    "n_w": ("n_w", int),
    "loss": ("loss", str.strip),
    "tau": ("tau", float),
    "lr": ("lr", float),
    "base_lr": ("lr", float),
    "anneal_epochs": ("anneal_epochs", _ints),
    "anneal_factor": ("anneal_factor", float),
    "epochs": ("epochs", int),
    "momentum": ("momentum", float),
    "seed": ("seed", int),
    "seed.geometry": ("seed_geometry", _opt_int),
    "seed.init": ("seed_init", _opt_int),
    "seed.batch": ("seed_batch", _opt_int),
    "bind_classes": ("bind_classes", _bool),
    "normalize_means": ("normalize_means", _bool),
    "limitgap.n_w": ("limitgap_n_w", _ints),
    "out": ("out", str.strip),
}

_GEOMETRY = {
    "geometry.kind": ("kind", str.strip),
    "geometry.minority": ("minority", _ints),
    "geometry.majority": ("majority", _ints),
    "geometry.cos_min_min": ("cos_min_min", float),
    "geometry.cos_rest": ("cos_rest", _opt_float),
}


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse the flat ``key = value`` format into a validated RunConfig."""
    kwargs: dict = {}
    geo: dict = {}
    target_path = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _SCALARS:
                name, conv = _SCALARS[key]
                kwargs[name] = conv(value)
            elif key in _GEOMETRY:
                name, conv = _GEOMETRY[key]
                geo[name] = conv(value)
            elif key == "geometry.target":
                target_path = value or None
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc

    if target_path is not None:
        from .serialize import read_gram_csv

        p = Path(target_path)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        try:
            geo["target"] = read_gram_csv(p)
        except OSError as exc:
            raise ConfigError(f"cannot read geometry.target {p}: {exc}") from exc
        kwargs["geometry_target_path"] = target_path
    try:
        kwargs["geometry"] = GeometrySpec(**geo)
        cfg = RunConfig(**kwargs)
        cfg.prototypes()
    except ConfigError:
        raise
    except ProtoGeomError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
