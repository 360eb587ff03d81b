"""Command-line entry point.

Subcommands ``place``, ``analyze``, ``validate`` and ``compare``. Exit codes:
0 success, 1 config or usage error, 2 board exhausted, 3 validation envelope
breach. Every failure prints a single ``error: <kind>: <detail>`` line to
stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from gowsn import analytics, montecarlo
from gowsn.config import RunConfig, load_config
from gowsn.errors import BoardExhausted, GowsnError, InvalidParams, IterationCapExceeded
from gowsn.placement import go_heuristics_place

EXIT_OK, EXIT_CONFIG, EXIT_EXHAUSTED, EXIT_BREACH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".12g")


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_output(path: str | None, text: str) -> None:
    """Write to ``path`` atomically (temp file + rename), or stdout when None."""
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(data) -> str:
    return json.dumps(data, indent=2, allow_nan=True) + "\n"


def _json_compact_values(data: dict) -> str:
    """One top-level key per line; long arrays such as node lists stay on one line."""
    lines = [f"  {json.dumps(k)}: {json.dumps(v, allow_nan=True)}" for k, v in data.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


# -- subcommands ----------------------------------------------------------------


def cmd_place(cfg: RunConfig) -> int:
    field = cfg.field_spec()
    result = go_heuristics_place(field, cfg.board(), cfg.heuristic_set(), cfg.placement_config())
    write_output(cfg.out, _json_compact_values(result.to_dict()))
    if cfg.trace:
        rows = ((t.iteration, t.n, t.lam, t.p, t.row, t.col, t.skipped) for t in result.trace)
        write_output(cfg.trace, csv_text(["iter", "N", "lambda", "p", "row", "col", "skipped"], rows))
    return EXIT_OK


def cmd_analyze(cfg: RunConfig, coverage_out: str | None = None) -> int:
    a = cfg.analyze
    if a.n_min < 1 or a.n_max < a.n_min:
        raise InvalidParams(f"invalid N range [{a.n_min}, {a.n_max}]; need 1 <= n_min <= n_max")
    field = cfg.field_spec()
    analytics.p_r_for_field(field)
    side = field.length_m

    rows = []
    for n in range(a.n_min, a.n_max + 1):
        lam, p = analytics.loop_state(field, n)
        rows.append((n, lam, p, analytics.shaping(n, field.range_m, side)))
    curve = csv_text(["N", "lambda", "p_connect", "shaping"], rows)

    cov_n = a.coverage_n if a.coverage_n is not None else a.n_max
    model = analytics.CoverageModel.build(cov_n, field.range_m, side)
    binom = analytics.binomial_pmf(model)
    cov_rows = ((n, binom[n], analytics.coverage_poisson(n, model.lambda_s)) for n in range(cov_n))
    coverage = csv_text(["n", "binomial", "poisson"], cov_rows)

    if cfg.out is None:
        write_output(None, curve + "\n" + coverage if coverage_out is None else curve)
    else:
        write_output(cfg.out, curve)
        if coverage_out is None:
            out = Path(cfg.out)
            coverage_out = str(out.with_name(out.stem + "_coverage" + (out.suffix or ".csv")))
    if coverage_out is not None:
        write_output(coverage_out, coverage)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, workers: int = 1, reference_offset: float = 0.0) -> int:
    report = montecarlo.run_validation(
        cfg.field_spec(), cfg.mc_config(), cfg.validation_settings(), workers, reference_offset
    )
    write_output(cfg.out, _json(report))
    if not report["passed"]:
        failed = [f"{k}={v['value']:.6g}>{v['envelope']:.6g}" for k, v in report["checks"].items() if not v["pass"]]
        print("error: envelope_breach: " + " ".join(failed), file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    trials = cfg.compare.trials
    if trials < 2:
        raise InvalidParams(f"compare needs trials >= 2, got {trials}")
    report = montecarlo.compare_strategies(
        cfg.field_spec(), cfg.board(), cfg.heuristic_set(), cfg.placement_config(), trials
    )
    rows = ((r.strategy, r.trial, r.no_isolated, r.min_pairwise_m) for r in report.records)
    write_output(cfg.out, csv_text(["strategy", "trial", "no_isolated", "min_pairwise_m"], rows))
    summary = " ".join(
        f"{name}: no_isolated_rate={fmt(s.no_isolated_rate)} mean_min_pairwise_m={fmt(s.mean_min_pairwise_m)}"
        for name, s in report.summary.items()
    )
    print(summary, file=sys.stderr)
    return EXIT_OK


# -- argument handling ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="run config JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--pitch", type=float, help="board pitch in meters (default range/2)")
    common.add_argument("--stopping", choices=["paper-literal", "error-complement"])
    common.add_argument("--threshold", type=float, help="theta for paper-literal, epsilon for error-complement")
    common.add_argument("--metric", choices=["planar", "toroidal"])
    common.add_argument("--fig2-literal", action="store_true", default=None,
                        help="draw from all intersections and skip occupied ones")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--trace", help="trace CSV path (place only)")
    common.add_argument("--print-config", action="store_true", help="print the resolved config and exit")

    parser = _Parser(prog="gowsn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("place", parents=[common], help="run the heuristic placement loop")

    p = sub.add_parser("analyze", parents=[common], help="emit density/connectivity/shaping CSVs")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--coverage-n", type=int, help="N for the coverage distribution CSV (default n-max)")
    p.add_argument("--coverage-out", help="path for the n,binomial,poisson CSV")

    p = sub.add_parser("validate", parents=[common], help="Monte Carlo checks of the closed forms")
    p.add_argument("--trials", type=int, help="override every trial count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reference-offset", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("compare", parents=[common], help="heuristic vs uniform placement")
    p.add_argument("--trials", type=int)
    return parser


def overrides_from_args(args: argparse.Namespace) -> dict:
    o = {}
    if args.seed is not None:
        o["seed"] = args.seed
        o["mc.master_seed"] = args.seed
    if args.pitch is not None:
        o["pitch_m"] = args.pitch
    if args.stopping is not None:
        o["stopping.rule"] = args.stopping.replace("-", "_")
    if args.threshold is not None:
        o["stopping.threshold"] = args.threshold
    if args.metric is not None:
        o["mc.metric" if args.command == "validate" else "metric"] = args.metric
    if args.fig2_literal:
        o["fig2_literal"] = True
    if args.out is not None:
        o["out"] = args.out
    if args.trace is not None:
        o["trace"] = args.trace
    if args.command == "analyze":
        for key in ("n_min", "n_max", "coverage_n"):
            if getattr(args, key) is not None:
                o[f"analyze.{key}"] = getattr(args, key)
    if args.command == "validate" and args.trials is not None:
        o["mc.trials"] = args.trials
        o["validate.two_node_trials"] = args.trials
    if args.command == "compare" and args.trials is not None:
        o["compare.trials"] = args.trials
    return o


def _fail(kind: str, message: str, code: int) -> int:
    print(f"error: {kind}: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config, overrides_from_args(args))
        if args.print_config:
            sys.stdout.write(_json(cfg.dump()))
            return EXIT_OK
        if args.command == "place":
            return cmd_place(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.coverage_out)
        if args.command == "validate":
            return cmd_validate(cfg, args.workers, args.reference_offset)
        return cmd_compare(cfg)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_CONFIG)
    except (BoardExhausted, IterationCapExceeded) as exc:
        return _fail(type(exc).__name__, exc, EXIT_EXHAUSTED)
    except (InvalidParams, GowsnError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_CONFIG)
    except OSError as exc:
        return _fail("io", exc, EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
