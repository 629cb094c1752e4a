"""Command line driver: ``run``, ``sweep``, ``gen`` and ``bounds``.

Exit status is 0 when every enabled check passed, 1 on a verification
failure and 2 on bad configuration or I/O. Exact rationals are printed
as ``p/q`` strings with a float companion field.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from ._rational import Q, as_fraction, fmt, weight_width
from .bounds import bounds_table, iteration_cap
from .engine import Schedule, message_stats, run_simulation
from .graph import (
    FAMILIES,
    WEIGHT_MODES,
    GeneratorSpec,
    GraphFormatError,
    InvalidGraphError,
    WeightedGraph,
    emit_graph,
    generate,
    max_degree,
    parse_graph,
)
from .oracle import BRUTE_FORCE_MAX_N, verify_run
from .protocol import ProtocolParams, Variant

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    epsilon: Q
    variant: Variant = Variant.LOCAL
    graph_path: Path | None = None
    generator: GeneratorSpec | None = None
    schedule: str = "simultaneous"
    seed: int = 0
    verify: bool = True
    output_format: str = "json"
    order_seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.graph_path is None) == (self.generator is None):
            raise ConfigError("give exactly one graph source: --graph or --family")
        if self.epsilon <= 0:
            raise ConfigError(f"--eps must be positive, got {fmt(self.epsilon)}")

    def load_graph(self) -> WeightedGraph:
        if self.graph_path is not None:
            try:
                return parse_graph(self.graph_path.read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read {self.graph_path}: {exc}") from None
        try:
            return generate(self.generator)  # type: ignore[arg-type]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def parse_schedule(text: str, g: WeightedGraph, seed: int) -> Schedule:
    """``simultaneous``, ``random:MAX`` (seeded offsets in 0..MAX) or ``v=r,v=r``."""
    text = text.strip()
    if text in ("", "simultaneous"):
        return Schedule()
    if text.startswith("random:"):
        try:
            hi = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad schedule {text!r}") from None
        if hi < 0:
            raise ConfigError("random schedule bound must be >= 0")
        rng = random.Random(seed)
        return Schedule({v: rng.randint(0, hi) for v in range(g.n)})
    act = {}
    for part in text.split(","):
        try:
            v, r = part.split("=")
            act[int(v)] = int(r)
        except ValueError:
            raise ConfigError(f"bad schedule entry {part!r}; expected vertex=round") from None
    if any(not 0 <= v < g.n for v in act):
        raise ConfigError("schedule names a vertex outside the graph")
    try:
        return Schedule(act)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def execute(cfg: ExperimentConfig, trace_out: Path | None = None) -> dict:
    """Run one configured experiment and return its report as a dict."""
    g = cfg.load_graph()
    params = ProtocolParams(cfg.epsilon, cfg.variant)
    schedule = parse_schedule(cfg.schedule, g, cfg.seed)
    trace, report = run_simulation(g, params, schedule, order_seed=cfg.order_seed)
    if trace_out is not None:
        trace_out.write_text(trace.to_jsonl(), encoding="utf-8")
    deg = max_degree(g)
    out = {
        "n": g.n,
        "m": g.m,
        "Delta": deg,
        "epsilon": fmt(params.epsilon),
        "epsilon_float": float(params.epsilon),
        "variant": params.variant.value,
        "schedule": cfg.schedule,
        "seed": cfg.seed,
        "predicted_iteration_cap": iteration_cap(deg, params.epsilon) if deg else 0,
        **report.to_dict(),
    }
    if cfg.variant is Variant.CONGEST:
        b = max((weight_width(w) for w in g.weights), default=1)
        stats = message_stats(trace, b, g.n)
        out["bit_budget"] = stats.budget_bits
        out["bits_by_kind"] = stats.by_kind
    if cfg.verify:
        ver = verify_run(g, trace, report, optimum=g.n <= BRUTE_FORCE_MAX_N, simultaneous=schedule.simultaneous)
        out["verification"] = ver.to_dict()
        out["ok"] = ver.ok
    else:
        out["ok"] = True
    return out


# ----------------------------------------------------------------- helpers


def _eps(text: str) -> Q:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"--eps: cannot parse {text!r} as a rational") from None


def _int_list(text: str) -> list[int]:
    """``3``, ``1,4,9`` or ``0-9`` (inclusive)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"bad integer list {text!r}") from None
    return out


def _spec_from_args(args: argparse.Namespace, family: str, n: int, seed: int) -> GeneratorSpec:
    return GeneratorSpec(
        family=family,
        n=n,
        weight_mode=args.weights,
        seed=seed,
        p=args.p,
        d_max=args.d_max,
        left=args.left,
        lo=args.lo,
        hi=args.hi,
        denominator_bound=args.den,
    )


def _meta() -> dict:
    return {
        "tool": "lrvc",
        "version": __version__,
        "generated": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            flat[key] = " ".join(str(x) for x in v)
        else:
            flat[key] = v
    return flat


def _csv(rows: list[dict], columns: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    cols = list(columns) if columns else list(dict.fromkeys(k for r in rows for k in r))
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def cmd_run(args: argparse.Namespace) -> int:
    if args.graph is None and args.family is None:
        raise ConfigError("give exactly one graph source: --graph or --family")
    cfg = ExperimentConfig(
        epsilon=_eps(args.eps),
        variant=Variant(args.variant),
        graph_path=Path(args.graph) if args.graph else None,
        generator=_spec_from_args(args, args.family, args.n, args.seed) if args.family else None,
        schedule=args.schedule,
        seed=args.seed,
        verify=args.verify,
        output_format=args.format,
        order_seed=args.order_seed,
    )
    if cfg.generator is not None and args.n is None:
        raise ConfigError("--family needs --n")
    report = execute(cfg, Path(args.trace_out) if args.trace_out else None)
    if args.format == "csv":
        text = _csv([_flatten(report)])
    else:
        doc = report if args.no_meta else {"meta": _meta(), **report}
        text = json.dumps(doc, indent=2) + "\n"
    _write(text, Path(args.out) if args.out else None)
    return EXIT_OK if report["ok"] else EXIT_FAIL


SWEEP_COLUMNS = (
    "family", "n", "m", "Delta", "eps", "eps_float", "variant", "seed",
    "max_iterations", "predicted_bound", "cover_weight", "cover_weight_float",
    "opt_weight", "opt_weight_float", "ratio", "ratio_float", "max_message_bits",
    "total_messages", "ok", "error",
)


def sweep_rows(args: argparse.Namespace) -> list[dict]:
    grid = [
        (fam, n, eps, var, seed)
        for fam in args.family
        for n in args.n
        for eps in args.eps
        for var in args.variant
        for seed in args.seeds
    ]
    if not grid:
        raise ConfigError("empty parameter grid")
    rows = []
    for fam, n, eps_text, var, seed in grid:
        row: dict = {"family": fam, "n": n, "variant": var, "seed": seed, "eps": eps_text}
        try:
            eps = _eps(eps_text)
            cfg = ExperimentConfig(
                epsilon=eps,
                variant=Variant(var),
                generator=_spec_from_args(args, fam, n, seed),
                seed=seed,
                verify=args.verify,
            )
            rep = execute(cfg)
        except ConfigError as exc:
            row.update(ok=False, error=str(exc))
            rows.append(row)
            continue
        ver = rep.get("verification", {})
        row.update(
            eps=fmt(eps),
            eps_float=float(eps),
            m=rep["m"],
            Delta=rep["Delta"],
            max_iterations=rep["max_iterations"],
            predicted_bound=rep["predicted_iteration_cap"],
            cover_weight=rep["cover_weight"],
            cover_weight_float=rep["cover_weight_float"],
            opt_weight=ver.get("opt_weight", ""),
            opt_weight_float=ver.get("opt_weight_float", ""),
            ratio=ver.get("ratio", ""),
            ratio_float=ver.get("ratio_float", ""),
            max_message_bits=rep["max_message_bits"],
            total_messages=rep["total_messages"],
            ok=rep["ok"],
            error="",
        )
        rows.append(row)
    return rows


def cmd_sweep(args: argparse.Namespace) -> int:
    rows = sweep_rows(args)
    if args.format == "json":
        doc = {"rows": rows} if args.no_meta else {"meta": _meta(), "rows": rows}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = _csv(rows, SWEEP_COLUMNS)
    _write(text, Path(args.out) if args.out else None)
    failed = [r for r in rows if not r["ok"]]
    errored = [r for r in failed if r.get("error")]
    if failed:
        print(f"{len(failed)} of {len(rows)} rows failed ({len(errored)} configuration errors)", file=sys.stderr)
    if errored:
        return EXIT_CONFIG
    return EXIT_FAIL if failed else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    if args.n is None:
        raise ConfigError("--n is required")
    try:
        g = generate(_spec_from_args(args, args.family, args.n, args.seed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _write(emit_graph(g), Path(args.out) if args.out else None)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    ks = _int_list(args.k)
    if any(k < 1 for k in ks):
        raise ConfigError("k values must be >= 1")
    eps = _eps(args.eps)
    log2n = _eps(args.log2n) if args.log2n is not None else None
    log2D = _eps(args.log2Delta) if args.log2Delta is not None else None
    if (log2n is not None and log2n <= 0) or (log2D is not None and log2D <= 0):
        raise ConfigError("log2 values must be positive")
    rows = bounds_table(ks, eps, log2n, log2D)
    doc = {"eps": fmt(eps), "log2n": fmt(log2n) if log2n else None,
           "log2Delta": fmt(log2D) if log2D else None, "rows": rows}
    _write(json.dumps(doc, indent=2) + "\n", Path(args.out) if args.out else None)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_generator_flags(p: argparse.ArgumentParser, multi: bool = False) -> None:
    if multi:
        p.add_argument("--family", action="append", choices=FAMILIES, required=True)
        p.add_argument("--n", type=_int_list, required=True, help="vertex counts, e.g. 3-11 or 4,8")
    else:
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--n", type=int)
    p.add_argument("--weights", choices=WEIGHT_MODES, default="unit")
    p.add_argument("--p", type=float, help="edge probability for erdos_renyi")
    p.add_argument("--d-max", type=int, help="degree cap for random_bounded_degree")
    p.add_argument("--left", type=int, help="first side size for complete_bipartite")
    p.add_argument("--lo", type=int, default=1)
    p.add_argument("--hi", type=int, default=100)
    p.add_argument("--den", type=int, default=8, help="denominator bound for uniform_rational")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lrvc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lrvc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one graph and verify the result")
    run.add_argument("--graph", help="graph file")
    _add_generator_flags(run)
    run.add_argument("--eps", required=True)
    run.add_argument("--variant", choices=[v.value for v in Variant], default="local")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--schedule", default="simultaneous",
                     help="simultaneous | random:MAX | vertex=round,...")
    run.add_argument("--order-seed", type=int, help="shuffle request processing with this seed")
    run.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.add_argument("--out")
    run.add_argument("--trace-out", help="write the message trace as JSON lines")
    run.add_argument("--no-meta", action="store_true", help="omit the metadata header")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run a parameter grid, one row per run")
    _add_generator_flags(sw, multi=True)
    sw.add_argument("--eps", action="append", required=True)
    sw.add_argument("--variant", action="append", choices=[v.value for v in Variant])
    sw.add_argument("--seeds", type=_int_list, default=[0], help="e.g. 0-9")
    sw.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    sw.add_argument("--format", choices=["json", "csv"], default="csv")
    sw.add_argument("--out")
    sw.add_argument("--no-meta", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    gen = sub.add_parser("gen", help="write a generated graph file")
    _add_generator_flags(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    bd = sub.add_parser("bounds", help="lower-bound arithmetic table over a k range")
    bd.add_argument("--k", default="1-5", help="k range, e.g. 1-5")
    bd.add_argument("--eps", default="1/4")
    bd.add_argument("--log2n")
    bd.add_argument("--log2Delta")
    bd.add_argument("--out")
    bd.set_defaults(func=cmd_bounds)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(args, "variant", None) is None and args.command == "sweep":
        args.variant = ["local"]
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError, InvalidGraphError) as exc:
        print(f"lrvc {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lrvc {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
