"""Command-line entry point.

Subcommands:

- ``gen``       write a dataset file (plus a plain-text transcript)
- ``eval``      ingest a dataset and grade the 50 questions
- ``baseline``  grade the single-prompt no-memory condition
- ``repl``      interactive session against a fresh database
- ``serve``     run the HTTP service
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..engine import UserInput, run_turn
from ..errors import SqlmemError
from ..fruitshop.generate import (
    GenConfig,
    generate_dataset,
    load_dataset,
    save_dataset,
    save_transcript,
)
from ..memory import init_schema
from ..planner import make_planner
from ..planner.base import PlannerConfig
from ..schema import fruit_shop_schema
from .evaluate import run_baseline, run_eval, save_report

logger = logging.getLogger(__name__)


def _add_planner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--planner", choices=["rule", "llm"], default="rule")
    parser.add_argument("--endpoint", default=None, help="chat-completions URL (llm mode)")
    parser.add_argument("--model", default=None)
    parser.add_argument("--temperature", type=float, default=None, help="default 0")
    parser.add_argument("--config", default=None, help="planner config JSON file")


def _planner_config(args) -> PlannerConfig:
    base = PlannerConfig.from_file(args.config) if args.config else PlannerConfig()
    return base.with_overrides(
        mode=getattr(args, "planner", None),
        endpoint=args.endpoint,
        model=args.model,
        temperature=args.temperature,
    )


def _load_or_generate(args):
    if args.dataset:
        return load_dataset(args.dataset)
    logger.info("no --dataset given; generating seed %d in memory", args.seed)
    return generate_dataset(args.seed, GenConfig())


def cmd_gen(args) -> int:
    config = GenConfig(
        n_records=args.records, n_easy=args.easy, n_hard=args.hard, month=args.month
    )
    dataset = generate_dataset(args.seed, config)
    out = Path(args.out)
    save_dataset(dataset, out)
    transcript = out.with_suffix(out.suffix + ".transcript.txt")
    save_transcript(dataset, transcript)
    print(
        f"wrote {out} ({len(dataset.records)} records, {len(dataset.questions)} questions, "
        f"~{dataset.token_estimate} tokens) and {transcript}"
    )
    return 0


def _emit_report(report, args, default_out: Path | None) -> None:
    if args.report == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.format_table())
    out = Path(args.report_out) if args.report_out else default_out
    if out is not None:
        save_report(report, out)
        print(f"report written to {out}", file=sys.stderr)


def cmd_eval(args) -> int:
    dataset = _load_or_generate(args)
    config = _planner_config(args)
    planner = make_planner(config)
    sink = _trace_printer() if args.show_trace else None
    report = run_eval(dataset, planner, trace_sink=sink)
    default_out = Path(args.dataset + ".report.json") if args.dataset else None
    _emit_report(report, args, default_out)
    return 0


def cmd_baseline(args) -> int:
    dataset = _load_or_generate(args)
    config = _planner_config(args).with_overrides(mode="llm")
    report = run_baseline(dataset, config)
    default_out = Path(args.dataset + ".baseline-report.json") if args.dataset else None
    _emit_report(report, args, default_out)
    return 0


def _trace_printer():
    def sink(trace) -> None:
        doc = trace.to_dict()
        for step in doc["steps"]:
            print(f"  Step{step['index']}: {step['description']}")
            for stmt, result in zip(step["statements"], step["results"]):
                print("    " + stmt.replace("\n", "\n    "))
                print("    " + result.replace("\n", "\n    "))

    return sink


def cmd_repl(args) -> int:
    config = _planner_config(args)
    planner = make_planner(config)
    handle = init_schema(fruit_shop_schema())
    sink = _trace_printer() if args.show_trace else None
    turn = 1
    print("sqlmem repl; :quit to exit")
    try:
        while True:
            try:
                line = input("you> ").strip()
            except EOFError:
                break
            if not line:
                continue
            if line in (":quit", ":q", "exit"):
                break
            if line == ":dump":
                print(handle.dump())
                continue
            trace = run_turn(UserInput(text=line, turn_id=turn), planner, handle)
            turn += 1
            if sink is not None:
                sink(trace)
            print(trace.reply)
    finally:
        handle.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state_dir, planner_config=_planner_config(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqlmem")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a dataset file")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--records", type=int, default=70)
    p_gen.add_argument("--easy", type=int, default=15)
    p_gen.add_argument("--hard", type=int, default=35)
    p_gen.add_argument("--month", default="2023-01")
    p_gen.set_defaults(func=cmd_gen)

    p_eval = sub.add_parser("eval", help="evaluate a planner on a dataset")
    p_eval.add_argument("--dataset", default=None)
    p_eval.add_argument("--seed", type=int, default=42, help="used when --dataset is absent")
    p_eval.add_argument("--report", choices=["table", "json"], default="table")
    p_eval.add_argument("--report-out", default=None)
    p_eval.add_argument("--show-trace", action="store_true")
    _add_planner_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_base = sub.add_parser("baseline", help="single-prompt baseline over an endpoint")
    p_base.add_argument("--dataset", default=None)
    p_base.add_argument("--seed", type=int, default=42)
    p_base.add_argument("--report", choices=["table", "json"], default="table")
    p_base.add_argument("--report-out", default=None)
    _add_planner_flags(p_base)
    p_base.set_defaults(func=cmd_baseline)

    p_repl = sub.add_parser("repl", help="interactive turn loop")
    p_repl.add_argument("--show-trace", action="store_true")
    _add_planner_flags(p_repl)
    p_repl.set_defaults(func=cmd_repl)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--state-dir", default=None, help="persist sessions here")
    _add_planner_flags(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SqlmemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
