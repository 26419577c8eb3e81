"""Command-line entry point: validate, decide, report, bench, simulate.

Exit codes: 0 success, 1 no feasible configuration, 2 validation or usage
error, 3 I/O error.  Paths may use the ``bundled:`` prefix to address the
models and scenarios shipped with the package, e.g. ``bundled:iov/s1.ctx.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
import time
import tracemalloc
from functools import cmp_to_key
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .configspace import enumerate_configs
from .decision import DEFAULT_TOLERANCE, ENGINES, Assessment, Ranked, _assess, compare, decide
from .errors import AdaptAuthError, ConfigSpaceEmpty, SemanticError
from .model import ContextState, ModelSpec, validate_model
from .modelio import load_scenario_stream, parse_context, parse_model
from .runtime import DecisionLoop, log_to_csv, log_to_jsonl

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_INVALID = 2
EXIT_IO = 3

BUNDLED = "bundled:"


class UsageError(Exception):
    pass


def resolve(path: str) -> Path:
    if path.startswith(BUNDLED):
        return Path(str(resources.files("adaptauth") / "data" / path[len(BUNDLED):]))
    return Path(path)


def _read(path: str) -> bytes:
    return resolve(path).read_bytes()


def _load_model(path: str) -> ModelSpec:
    return parse_model(_read(path))


def _load_context(path: str, model: ModelSpec) -> ContextState:
    return parse_context(_read(path), model)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# -- validate -------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    data = _read(args.model)
    try:
        model = parse_model(data)
    except SemanticError as exc:
        for diag in exc.diagnostics or [exc]:
            print(diag)
        print(f"{args.model}: {len(exc.diagnostics) or 1} error(s)")
        return EXIT_INVALID
    for diag in validate_model(model):
        print(diag)
    try:
        feasible = len(enumerate_configs(ContextState({f: 0.0 for f in model.factor_ids}), model))
    except ConfigSpaceEmpty:
        feasible = 0
    print(
        f"ok: {model.meta.get('name', args.model)}: {len(model.goals)} goals ({len(model.leaf_ids)} leaves), "
        f"{len(model.factor_ids)} context factors, {len(model.attack_ids)} attacks, "
        f"{len(model.features)} features, {len(model.edges)} edges, {feasible} configurations"
    )
    return EXIT_OK


# -- decide ---------------------------------------------------------------------

DECIDE_HEADER = ("rank", "utility", "security", "usability", "performance", "total_risk", "configuration")


def _root_values(assessment: Assessment, model: ModelSpec) -> tuple[float, float, float]:
    return (
        assessment.root(model, "Security"),
        assessment.root(model, "Usability"),
        assessment.root(model, "Performance"),
    )


def _ranked_json(rank: int, item: Ranked, model: ModelSpec) -> dict[str, Any]:
    a = item.assessment
    sec, usa, perf = _root_values(a, model)
    return {
        "rank": rank,
        "summary": item.config.summary(),
        "config": item.config.to_dict(),
        "utility": a.utility,
        "roots": {"Security": sec, "Usability": usa, "Performance": perf},
        "leaves": {g: a.goal.satisfactions[g] for g in model.leaf_ids},
        "priorities": dict(a.goal.priorities),
        "partial_risks": dict(a.risk.partial_risks),
        "total_risk": a.risk.total_risk,
    }


def cmd_decide(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    ctx = _load_context(args.context, model)
    result = decide(model, ctx, args.engine, args.top, args.tolerance)
    if args.format == "json":
        doc = {
            "engine": result.engine,
            "chosen": result.chosen.to_dict(),
            "stats": {
                "feasible_configs": result.stats.feasible_configs,
                "configs_evaluated": result.stats.configs_evaluated,
                "iterations": result.stats.iterations,
            },
            "ranked": [_ranked_json(i, item, model) for i, item in enumerate(result.ranked, start=1)],
        }
        _emit(json.dumps(doc, indent=2) + "\n", None)
        return EXIT_OK
    rows = []
    for i, (cfg, a) in enumerate(result.ranked, start=1):
        sec, usa, perf = _root_values(a, model)
        rows.append([i, _fmt(a.utility), _fmt(sec), _fmt(usa), _fmt(perf), _fmt(a.risk.total_risk), cfg.summary()])
    if args.format == "csv":
        _emit(_csv(DECIDE_HEADER, rows), None)
    else:
        _emit(_table(DECIDE_HEADER, rows), None)
        s = result.stats
        print(
            f"\n{result.engine}: {s.feasible_configs} feasible, {s.configs_evaluated} evaluated, "
            f"{s.iterations} bisection steps, {s.elapsed * 1000:.1f} ms"
        )
    return EXIT_OK


# -- report ---------------------------------------------------------------------


def _comparison_set(model: ModelSpec, overrides: list[str] | None) -> list[tuple[str, ...]]:
    if overrides:
        raw = [item.split("+") for item in overrides]
    else:
        raw = model.meta.get("comparison")
        if not raw:
            raise UsageError("model declares no comparison set; pass --compare")
    out = []
    creds = set(model.credential_ids)
    for entry in raw:
        ids = tuple(sorted(str(x).strip() for x in entry))
        bad = [x for x in ids if x not in creds]
        if bad or not 1 <= len(ids) <= 2:
            raise UsageError(f"comparison entry {'+'.join(ids)!r} is not one or two credential ids")
        out.append(ids)
    return out


def best_completion(
    model: ModelSpec, ctx: ContextState, credentials: tuple[str, ...]
) -> Ranked | None:
    """Highest-ranked feasible configuration using exactly ``credentials``."""
    try:
        configs = [c for c in enumerate_configs(ctx, model) if c.credentials == credentials]
    except ConfigSpaceEmpty:
        return None
    if not configs:
        return None
    ranked = [Ranked(c, _assess(model, ctx, c)) for c in configs]
    return min(ranked, key=cmp_to_key(lambda a, b: compare(a, b, model)))


def report_rows(
    model: ModelSpec, scenarios: list[tuple[str, ContextState]], comparison: list[tuple[str, ...]]
) -> tuple[list[str], list[list[str]]]:
    roots = [model.root_ids[c] for c in ("Security", "Usability", "Performance")]
    header = ["scenario", "config", "feasible", *model.leaf_ids, *roots, "total_risk", "utility"]
    rows = []
    for name, ctx in scenarios:
        for creds in comparison:
            best = best_completion(model, ctx, creds)
            if best is None:
                rows.append([name, "+".join(creds), "false"] + [""] * (len(header) - 3))
                continue
            sat = best.assessment.goal.satisfactions
            values = [sat[g] for g in model.leaf_ids] + [sat[r] for r in roots]
            values += [best.assessment.risk.total_risk, best.assessment.utility]
            rows.append([name, best.config.summary(), "true", *map(_fmt, values)])
    return header, rows


def cmd_report(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    directory = resolve(args.scenarios)
    if not directory.is_dir():
        raise FileNotFoundError(f"scenario directory not found: {args.scenarios}")
    files = sorted(directory.glob("*.ctx.json"))
    if not files:
        raise UsageError(f"no *.ctx.json scenario files in {args.scenarios}")
    scenarios = [(f.name[: -len(".ctx.json")], parse_context(f.read_bytes(), model)) for f in files]
    header, rows = report_rows(model, scenarios, _comparison_set(model, args.compare))
    _emit(_csv(header, rows), args.output)
    return EXIT_OK


# -- bench ----------------------------------------------------------------------

BENCH_HEADER = (
    "context", "engine", "runs", "feasible", "evaluated", "min_ms", "avg_ms", "max_ms", "peak_kib", "chosen",
)


def bench_one(model: ModelSpec, ctx: ContextState, engine: str, runs: int, tolerance: float) -> dict[str, Any]:
    if runs < 1:
        raise UsageError("runs must be at least 1")
    times = []
    result = None
    for _ in range(runs):
        start = time.perf_counter()
        result = decide(model, ctx, engine, 1, tolerance)
        times.append((time.perf_counter() - start) * 1000.0)
    tracemalloc.start()
    try:
        decide(model, ctx, engine, 1, tolerance)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return {
        "engine": engine,
        "runs": runs,
        "feasible": result.stats.feasible_configs,
        "evaluated": result.stats.configs_evaluated,
        "min_ms": min(times),
        "avg_ms": statistics.fmean(times),
        "max_ms": max(times),
        "peak_kib": peak / 1024.0,
        "chosen": result.chosen.summary(),
    }


def cmd_bench(args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    model = _load_model(args.model)
    engines = ENGINES if args.engine == "all" else (args.engine,)
    records = []
    for path in args.contexts:
        ctx = _load_context(path, model)
        name = Path(path.removeprefix(BUNDLED)).name.removesuffix(".json").removesuffix(".ctx")
        for engine in engines:
            records.append({"context": name, **bench_one(model, ctx, engine, args.runs, args.tolerance)})
    if args.format == "json":
        _emit(json.dumps(records, indent=2) + "\n", None)
        return EXIT_OK
    rows = [
        [r["context"], r["engine"], r["runs"], r["feasible"], r["evaluated"],
         f"{r['min_ms']:.3f}", f"{r['avg_ms']:.3f}", f"{r['max_ms']:.3f}", f"{r['peak_kib']:.1f}", r["chosen"]]
        for r in records
    ]
    _emit((_csv if args.format == "csv" else _table)(BENCH_HEADER, rows), None)
    return EXIT_OK


# -- simulate -------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    stream = load_scenario_stream(resolve(args.stream), model)
    initial = dict(_load_context(args.initial, model)) if args.initial else None
    loop = DecisionLoop(model, args.engine, args.tolerance)
    log = loop.run(loop.initial_state(initial), stream)
    if args.format == "json":
        text = log_to_jsonl(log)
    elif args.format == "csv":
        text = log_to_csv(log)
    else:
        rows = [
            [e.seq, "*" if e.changed else "", e.chosen or f"error: {e.error}",
             "" if e.utility is None else _fmt(e.utility),
             "" if e.total_risk is None else _fmt(e.total_risk),
             " ".join(f"{k}={v:g}" for k, v in e.ctx_delta.items())]
            for e in log
        ]
        text = _table(("seq", "changed", "chosen", "utility", "total_risk", "delta"), rows)
    _emit(text, args.output)
    return EXIT_OK


# -- wiring ---------------------------------------------------------------------


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptauth", description="Context-aware authentication selection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def engine_opts(p: argparse.ArgumentParser, choices: Sequence[str] = ENGINES, default: str = "exhaustive") -> None:
        p.add_argument("--engine", choices=choices, default=default)
        p.add_argument("--tolerance", type=_positive_float, default=DEFAULT_TOLERANCE)

    p = sub.add_parser("validate", help="check a model document")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decide", help="rank configurations for one context")
    p.add_argument("model")
    p.add_argument("context")
    engine_opts(p)
    p.add_argument("--top", type=_positive_int, default=5)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("report", help="per-goal CSV for a comparison set across scenarios")
    p.add_argument("model")
    p.add_argument("scenarios", help="directory holding *.ctx.json files")
    p.add_argument("-o", "--output")
    p.add_argument("--compare", action="append", metavar="CRED[+CRED]",
                   help="comparison configuration; repeatable; defaults to the model's own set")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bench", help="time repeated decisions")
    p.add_argument("model")
    p.add_argument("contexts", nargs="+")
    p.add_argument("--runs", type=int, default=100)
    engine_opts(p, (*ENGINES, "all"), "all")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("simulate", help="replay a JSONL stream of context changes")
    p.add_argument("model")
    p.add_argument("stream")
    p.add_argument("--initial", help="context document applied before the stream")
    engine_opts(p)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except ConfigSpaceEmpty as exc:
        print(f"adaptauth: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except UsageError as exc:
        print(f"adaptauth: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AdaptAuthError as exc:
        print(f"adaptauth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, UnicodeDecodeError) as exc:
        print(f"adaptauth: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"adaptauth: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
