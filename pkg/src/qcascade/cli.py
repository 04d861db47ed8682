"""Command-line interface.

Exit codes: 0 on success, 1 on usage errors (bad flags, missing arguments),
2 on data errors (unreadable files, schema violations, impossible requests).
Set ``QCASCADE_LOG_LEVEL`` to ``error``, ``info``, or ``debug`` to control
diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import curves as curves_mod
from . import logio
from .cascade import run_live, run_offline, validate_policy
from .errors import QCascadeError
from .prediction import ConfidenceMethod
from .synth import calibration_report, generate

__all__ = ["main", "entrypoint"]

log = logging.getLogger("qcascade")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

# Reports quote FLOPs in these units, matching how reader costs are usually
# tabulated.
FLOPS_UNIT = 1e11


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise _UsageError(message)


def _configure_logging() -> None:
    raw = os.environ.get("QCASCADE_LOG_LEVEL", "error").strip().lower()
    level = _LOG_LEVELS.get(raw)
    if level is None:
        print(
            f"warning: QCASCADE_LOG_LEVEL={raw!r} is not one of "
            f"{sorted(_LOG_LEVELS)}; using 'error'",
            file=sys.stderr,
        )
        level = logging.ERROR
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    log.setLevel(level)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="qcascade",
        description="Confidence-cascaded reader evaluation over prediction logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check logs and/or a policy file")
    p.add_argument("--logs", nargs="+", default=[], metavar="JSONL")
    p.add_argument("--policy", metavar="JSON")

    p = sub.add_parser("eval", help="run a cascade over logs and report cost/accuracy")
    p.add_argument("--logs", nargs="+", required=True, metavar="JSONL")
    p.add_argument("--policy", required=True, metavar="JSON")
    p.add_argument("--out", metavar="JSONL", help="write per-question outcomes here")

    p = sub.add_parser("sweep", help="sweep thresholds and emit a curve CSV")
    p.add_argument("--logs", nargs="+", required=True, metavar="JSONL")
    p.add_argument("--policy", required=True, metavar="JSON")
    p.add_argument(
        "--grid",
        type=int,
        default=9,
        help="per-stage quantile count for cascades with several thresholds (default 9)",
    )
    p.add_argument(
        "--raw",
        action="store_true",
        help="emit every evaluated point instead of the Pareto frontier",
    )
    p.add_argument("--out", metavar="CSV", help="write the curve here (default stdout)")

    p = sub.add_parser("auc", help="area under a curve CSV, cost-normalized")
    p.add_argument("--curve", required=True, metavar="CSV")
    p.add_argument(
        "--range",
        nargs=2,
        type=float,
        metavar=("LO", "HI"),
        help="cost range to integrate over (default: the curve's span)",
    )

    p = sub.add_parser("intersect", help="cheapest cost reaching a target accuracy")
    p.add_argument("--curve", required=True, metavar="CSV")
    p.add_argument("--target", required=True, type=float, metavar="ACC")

    p = sub.add_parser("baseline", help="escalation baselines over the same logs")
    p.add_argument("--kind", required=True, choices=["random", "heuristic"])
    p.add_argument("--logs", nargs="+", required=True, metavar="JSONL")
    p.add_argument("--policy", required=True, metavar="JSON")
    p.add_argument(
        "--points-per-leg",
        type=int,
        default=11,
        help="random baseline: curve points per escalation leg (default 11)",
    )
    p.add_argument(
        "--sampled",
        action="store_true",
        help="random baseline: sample actual subsets instead of the expectation",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for --sampled (default 0)")
    p.add_argument("--out", metavar="CSV", help="write the curve here (default stdout)")

    p = sub.add_parser("synth", help="generate a synthetic benchmark")
    p.add_argument("--config", required=True, metavar="JSON")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument(
        "--method",
        default="ppa",
        choices=[m.value for m in ConfidenceMethod],
        help="confidence method for the calibration report (default ppa)",
    )

    p = sub.add_parser("live", help="run the cascade against HTTP reader backends")
    p.add_argument("--policy", required=True, metavar="JSON")
    p.add_argument("--questions", required=True, metavar="JSONL")
    p.add_argument(
        "--backend",
        action="append",
        required=True,
        metavar="STAGE=URL",
        help="stage-to-backend mapping; repeat once per stage",
    )
    p.add_argument("--max-new-tokens", type=int, default=32)
    p.add_argument("--timeout", type=float, default=60.0, help="per-request seconds")
    p.add_argument("--out", metavar="JSONL", help="write per-question outcomes here")

    return parser


def _print_summary(outcomes, policy) -> None:
    print(f"questions={len(outcomes)}")
    if outcomes:
        if all(o.correct is not None for o in outcomes):
            print(f"accuracy={curves_mod.accuracy(outcomes):.6f}")
        else:
            print("accuracy=unavailable (records lack gold answers)")
        from .costs import dataset_cost

        mean = dataset_cost(o.cost for o in outcomes)
        print(f"mean_cost_flops={mean!r}")
        print(f"mean_cost_e11={mean / FLOPS_UNIT!r}")
        for i, stage in enumerate(policy.stages):
            n = sum(1 for o in outcomes if o.exit_stage == i)
            print(f"exits[{stage.name}]={n}")


def _cmd_validate(args) -> int:
    total = 0
    if args.logs:
        table = logio.parse_logs(args.logs)
        total = sum(len(v) for v in table.values())
        print(f"logs ok: {total} records across {len(table)} stages")
        for name in sorted(table):
            print(f"  stage={name} records={len(table[name])}")
    if args.policy:
        policy = logio.load_policy(args.policy)
        validate_policy(policy)
        print(
            f"policy ok: {len(policy.stages)} stages, method={policy.method.value}, "
            f"cost mode={policy.cost.mode.value}"
        )
    if not args.logs and not args.policy:
        raise _UsageError("validate needs --logs and/or --policy")
    return 0


def _cmd_eval(args) -> int:
    policy = logio.load_policy(args.policy)
    table = logio.parse_logs(args.logs)
    outcomes = run_offline(table, policy)
    _print_summary(outcomes, policy)
    if args.out:
        logio.write_outcomes(outcomes, args.out)
        print(f"outcomes written to {args.out}")
    return 0


def _emit_curve(curve, out: str | None) -> None:
    if out:
        logio.write_curve_csv(curve, out)
        print(f"curve with {len(curve)} points written to {out}")
    else:
        sys.stdout.write(logio.curve_to_csv(curve))


def _cmd_sweep(args) -> int:
    policy = logio.load_policy(args.policy)
    table = logio.parse_logs(args.logs)
    if len(policy.stages) == 2:
        curve = curves_mod.build_curve_k1(table, policy)
        if not args.raw:
            curve = curves_mod.pareto_frontier(curve)
    else:
        curve = curves_mod.sweep_multi(
            table, policy, grid_size=args.grid, frontier=not args.raw
        )
    _emit_curve(curve, args.out)
    return 0


def _cmd_auc(args) -> int:
    curve = logio.read_curve_csv(args.curve)
    cost_range = tuple(args.range) if args.range else None
    value = curves_mod.auc(curve, cost_range)
    print(f"auc={value!r}")
    print(f"auc_percent={value * 100.0:.4f}")
    return 0


def _cmd_intersect(args) -> int:
    curve = logio.read_curve_csv(args.curve)
    cost = curves_mod.cost_at_accuracy(curve, args.target)
    print(f"cost_flops={cost!r}")
    print(f"cost_e11={cost / FLOPS_UNIT!r}")
    return 0


def _cmd_baseline(args) -> int:
    policy = logio.load_policy(args.policy)
    table = logio.parse_logs(args.logs)
    if args.kind == "heuristic":
        curve = curves_mod.baseline_heuristic(table, policy)
    elif args.sampled:
        curve = curves_mod.baseline_random_sampled(
            table, policy, seed=args.seed, points_per_leg=args.points_per_leg
        )
    else:
        anchors = curves_mod.stage_anchor_points(table, policy)
        curve = curves_mod.baseline_random(anchors, points_per_leg=args.points_per_leg)
    _emit_curve(curve, args.out)
    return 0


def _cmd_synth(args) -> int:
    config = logio.load_synth_config(args.config)
    logs = generate(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(logs):
        path = out_dir / f"{name}.jsonl"
        logio.write_records(
            (logs[name][qid] for qid in sorted(logs[name])), path
        )
        print(f"wrote {len(logs[name])} records to {path}")
    if config.n_questions > 0:
        report = calibration_report(logs, ConfidenceMethod(args.method))
        print(report.to_text())
    else:
        print("no questions generated; skipping calibration report")
    return 0


def _cmd_live(args) -> int:
    policy = logio.load_policy(args.policy)
    questions = logio.load_questions(args.questions)
    backends = {}
    for item in args.backend:
        stage, sep, url = item.partition("=")
        if not sep or not stage or not url:
            raise _UsageError(f"--backend must look like STAGE=URL, got {item!r}")
        backends[stage] = url
    result = run_live(
        backends,
        policy,
        questions,
        max_new_tokens=args.max_new_tokens,
        timeout=args.timeout,
    )
    _print_summary(result.outcomes, policy)
    for f in result.failures:
        print(f"failed qid={f.qid} stage={f.stage_name}: {f.reason}")
    if args.out:
        logio.write_outcomes(result.outcomes, args.out)
        print(f"outcomes written to {args.out}")
    if result.failures and not result.outcomes:
        print("error: every question failed", file=sys.stderr)
        return 2
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "auc": _cmd_auc,
    "intersect": _cmd_intersect,
    "baseline": _cmd_baseline,
    "synth": _cmd_synth,
    "live": _cmd_live,
}


def main(argv=None) -> int:
    """Run the CLI; returns the process exit code."""
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help exits through argparse
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except QCascadeError as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    """Console-script shim."""
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
