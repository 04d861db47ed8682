"""Command-line front end: dump logs or serve the predict endpoint."""

import argparse
import logging
import sys

from .config import AdapterConfig
from .dump import dump_logs, load_questions
from .errors import AdapterError
from .reader import GreedyReader
from .server import serve


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, metavar="DIR", help="model directory")
    p.add_argument("--device", default="cpu", help="torch device (default cpu)")
    p.add_argument("--max-new-tokens", type=int, default=16, metavar="N")
    p.add_argument(
        "--passage-budget",
        type=int,
        default=250,
        metavar="TOKENS",
        help="per-passage token truncation budget",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcascade-adapter",
        description="Run a seq2seq reader over questions: dump stage logs or serve predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump", help="answer every question at every stage, write JSONL logs")
    _add_model_args(p)
    p.add_argument("--questions", required=True, metavar="JSONL")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument(
        "--stages",
        default="0",
        metavar="S0,S1,...",
        help="comma-separated passage budgets, 0 = closed-book (default: 0)",
    )

    p = sub.add_parser("serve", help="answer POST /v1/predict requests")
    _add_model_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    return parser


def _parse_stages(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise AdapterError(f"--stages must be comma-separated integers, got {text!r}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "dump":
            config = AdapterConfig(
                model_path=args.model,
                stages=_parse_stages(args.stages),
                device=args.device,
                max_new_tokens=args.max_new_tokens,
                passage_token_budget=args.passage_budget,
            )
            written = dump_logs(GreedyReader(config), load_questions(args.questions), args.out_dir)
            for stage, path in written.items():
                print(f"wrote {stage}: {path}")
        else:
            config = AdapterConfig(
                model_path=args.model,
                device=args.device,
                max_new_tokens=args.max_new_tokens,
                passage_token_budget=args.passage_budget,
            )
            serve(GreedyReader(config), args.host, args.port)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
