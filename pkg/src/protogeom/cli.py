"""Command-line entry point.

Subcommands::

    protogeom run --config run.cfg [--out DIR] [--seed N]
    protogeom gradcheck --loss limit --n 8 --k 3 --d 5
    protogeom geometry --kind etf --k 10 --d 10 --out DIR
    protogeom limitgap --config run.cfg [--out DIR]
    protogeom analyze --config run.cfg --embeddings DIR/embeddings.csv

Exit codes: 0 success, 1 failed check, 2 invalid configuration,
3 numerical abort. ``PROTO_GEOM_THREADS`` caps BLAS threads.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path

import numpy as np

from . import serialize as io
from .analysis import mean_gram, metrics
from .config import RunConfig, load_config
from .data import BatchPlan, EmbeddingSet
from .errors import ConfigError, NumericalError, ProtoGeomError
from .geometry import GeometrySpec, make_etf
from .loss import LOSS_KINDS, LossParams, grad_check, limit_gap

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
GRADCHECK_TOL = 1e-4
LIMITGAP_TOL = 1e-2


def _err(msg: str) -> None:
    print(f"protogeom: {msg}", file=sys.stderr)


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "out", None):
        changes["out"] = args.out
    return cfg.replace(**changes) if changes else cfg


def _write_run_outputs(out: Path, state) -> None:
    io.write_metrics_csv(out / "metrics.csv", state.history)
    g_m = mean_gram(state.embeddings, state.config.normalize_means)
    io.write_gram_csv(out / "final_gram.csv", g_m)
    io.write_pgm(out / "final_gram.pgm", g_m)
    io.write_embeddings_csv(out / "embeddings.csv", state.embeddings)
    io.write_matrix_csv(out / "prototypes.csv", state.prototypes.vectors.T)


def cmd_run(args) -> int:
    from .optim import run

    cfg = _load(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_echo.txt").write_text(cfg.echo())
    try:
        state = run(cfg)
    except NumericalError as exc:
        _err(f"numerical abort: {exc}")
        partial = getattr(exc, "state", None)
        if partial is not None:
            io.write_metrics_csv(out / "metrics.csv", partial.history)
        return EXIT_NUMERIC
    _write_run_outputs(out, state)
    last = state.history[-1]
    print(
        f"epochs={state.epoch} loss={io.fmt(last.loss)} delta={io.fmt(last.delta)} "
        f"alignment={io.fmt(last.alignment)} -> {out}"
    )
    return EXIT_OK


def _random_embeddings(n: int, k: int, d: int, seed: int) -> EmbeddingSet:
    """Random unit vectors with cyclic labels, so every class with two or more members has positives."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((d, n))
    h /= np.linalg.norm(h, axis=0)
    return EmbeddingSet(h, np.arange(n) % k, k)


def cmd_gradcheck(args) -> int:
    if args.loss not in LOSS_KINDS:
        raise ConfigError(f"--loss must be one of {LOSS_KINDS}")
    if args.d < args.k - 1:
        raise ConfigError(f"ETF prototypes need d >= k - 1, got k={args.k}, d={args.d}")
    n_w = args.n_w if args.loss == "scl_proto" else 0
    if args.loss == "scl_proto" and n_w < 1:
        raise ConfigError("scl_proto needs --n-w >= 1")
    emb = _random_embeddings(args.n, args.k, args.d, args.seed)
    protos = make_etf(args.k, args.d, seed=args.seed + 1)
    plan = BatchPlan(np.arange(args.n), n_w)
    params = LossParams(args.tau)
    analytic = None
    if args.corrupt:
        from .loss import evaluate

        analytic = evaluate(args.loss, emb, plan, protos, params).grad
        analytic = analytic + args.corrupt * np.sign(analytic + 1e-300)
    err = grad_check(args.loss, emb, plan, protos, params, eps=args.eps, seed=args.seed, analytic=analytic)
    print(f"max relative error: {err:.3e}")
    return EXIT_OK if err < GRADCHECK_TOL else EXIT_FAIL


def _geometry_from_args(args) -> tuple[GeometrySpec, int, int, int]:
    if args.config:
        cfg = load_config(args.config)
        return cfg.geometry, cfg.k, cfg.d, cfg.seed_geometry
    if args.k is None or args.d is None:
        raise ConfigError("geometry needs --k and --d (or --config)")
    target = io.read_gram_csv(args.target) if args.target else None
    spec = GeometrySpec(
        kind=args.kind,
        minority=tuple(args.minority),
        majority=tuple(args.majority),
        cos_min_min=args.cos_min_min,
        cos_rest=args.cos_rest,
        target=target,
    )
    return spec, args.k, args.d, args.seed


def cmd_geometry(args) -> int:
    spec, k, d, seed = _geometry_from_args(args)
    try:
        protos = spec.build(k, d, seed=seed)
    except ProtoGeomError as exc:
        raise ConfigError(f"{spec.kind} geometry not realizable: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_matrix_csv(out / "prototypes.csv", protos.vectors.T)
    io.write_gram_csv(out / "gram.csv", protos.gram)
    print(f"{spec.kind} k={k} d={d} -> {out}")
    return EXIT_OK


def cmd_limitgap(args) -> int:
    cfg = _load(args)
    sweep = cfg.limitgap_n_w
    if not sweep or any(b <= a for a, b in zip(sweep, sweep[1:])) or sweep[0] < 1:
        raise ConfigError(f"limitgap.n_w must be an increasing list of positive ints, got {sweep}")
    emb = _random_embeddings(cfg.batch_size, cfg.k, cfg.d, cfg.seed_init)
    protos = cfg.prototypes()
    rows = limit_gap(emb, protos, BatchPlan(np.arange(emb.n)), sweep, cfg.params)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["n_w,gap\n"] + [f"{n_w},{io.fmt(gap)}\n" for n_w, gap in rows]
    (out / "limitgap.csv").write_text("".join(lines))
    for n_w, gap in rows:
        print(f"n_w={n_w:<8d} gap={gap:.6e}")
    return EXIT_OK if rows[-1][1] < LIMITGAP_TOL else EXIT_FAIL


def cmd_analyze(args) -> int:
    cfg = _load(args)
    emb = io.read_embeddings_csv(args.embeddings)
    protos = cfg.prototypes()
    rec = metrics(emb, protos, normalize_means=cfg.normalize_means)
    print("delta,alignment,spread")
    print(f"{io.fmt(rec.delta)},{io.fmt(rec.alignment)},{io.fmt(rec.spread)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        g_m = mean_gram(emb, cfg.normalize_means)
        io.write_gram_csv(out / "gram.csv", g_m)
        io.write_pgm(out / "gram.pgm", g_m)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="protogeom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train free embeddings from a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gradcheck", help="compare analytic and finite-difference gradients")
    g.add_argument("--loss", default="limit")
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--d", type=int, default=5)
    g.add_argument("--n-w", type=int, default=3)
    g.add_argument("--tau", type=float, default=0.1)
    g.add_argument("--eps", type=float, default=1e-6)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--corrupt", type=float, default=0.0, help=argparse.SUPPRESS)
    g.set_defaults(func=cmd_gradcheck)

    m = sub.add_parser("geometry", help="write prototypes.csv and gram.csv for a geometry")
    m.add_argument("--config")
    m.add_argument("--kind", default="etf")
    m.add_argument("--k", type=int)
    m.add_argument("--d", type=int)
    m.add_argument("--minority", type=_int_list, default=[])
    m.add_argument("--majority", type=_int_list, default=[])
    m.add_argument("--cos-min-min", type=float, default=-0.9)
    m.add_argument("--cos-rest", type=float)
    m.add_argument("--target", help="Gram CSV for kind gram_target")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", default="geometry")
    m.set_defaults(func=cmd_geometry)

    lg = sub.add_parser("limitgap", help="gradient gap between augmented and limit losses over n_w")
    lg.add_argument("--config", required=True)
    lg.add_argument("--out")
    lg.add_argument("--seed", type=int)
    lg.set_defaults(func=cmd_limitgap)

    a = sub.add_parser("analyze", help="recompute metrics from embeddings.csv")
    a.add_argument("--config", required=True)
    a.add_argument("--embeddings", required=True)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)
    return p


def _thread_limit():
    threads = os.environ.get("PROTO_GEOM_THREADS")
    if not threads:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(threads)))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except NumericalError as exc:
        _err(f"numerical abort: {exc}")
        return EXIT_NUMERIC
    except ProtoGeomError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
