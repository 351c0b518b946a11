"""Command-line interface: chat, bench, gen-graph, serve, validate.

Exit codes: 0 on success, 1 on runtime errors, 2 on input/validation errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import crm, dialogue
from .config import load_config
from .crm import Phase
from .dialogue import ConsultationEngine, TemplateTable
from .errors import InvalidSpec, KgLoadError, MedconsultError
from .kg import load_kg
from .resources import fixture_graph_dir
from .simulate import bench, gen_graph


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medconsult",
        description="Knowledge-graph-grounded medical consultation engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    chat = sub.add_parser("chat", help="interactive consultation on stdin/stdout")
    chat.add_argument("--graph", default=None, help="graph directory (default: bundled demo)")
    chat.add_argument("--templates", default=None, help="template table path")
    chat.add_argument("--locale", default="en", choices=["en", "zh"])
    chat.add_argument("--seed", type=int, default=None, help="derive a deterministic session id")
    chat.add_argument("--record", default=None, help="write the medical record JSON here on close")
    chat.add_argument("--transcript", default=None, help="write the transcript JSON here on exit")

    bench_p = sub.add_parser("bench", help="simulated-patient benchmark")
    bench_p.add_argument("--graph", default=None, help="graph directory to benchmark")
    bench_p.add_argument("--diseases", type=int, default=None, help="synthetic: disease count")
    bench_p.add_argument("--symptoms", type=int, default=None, help="synthetic: symptom pool size")
    bench_p.add_argument("--per-disease", type=int, default=None, help="synthetic: symptoms per disease")
    bench_p.add_argument("--distinct", action="store_true", help="synthetic: force distinct symptom sets")
    bench_p.add_argument("--runs", type=int, default=100)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--out", default=None, help="write the JSON report here")

    gen = sub.add_parser("gen-graph", help="generate a synthetic graph directory")
    gen.add_argument("--out", required=True)
    gen.add_argument("--diseases", type=int, required=True)
    gen.add_argument("--symptoms", type=int, required=True)
    gen.add_argument("--per-disease", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--distinct", action="store_true")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", default=None, help="JSON config file")
    serve.add_argument("--graph", default=None)
    serve.add_argument("--templates", default=None)
    serve.add_argument("--locale", default=None)
    serve.add_argument("--store", default=None, help="session store directory")
    serve.add_argument("--listen", default=None, help="host:port")
    serve.add_argument("--webui", default=None, help="static frontend directory")

    validate = sub.add_parser("validate", help="load and validate a graph directory")
    validate.add_argument("--graph", default=None)
    validate.add_argument("--assets", action="store_true", help="check local image assets exist")

    return parser


def _graph_dir(arg: str | None) -> Path:
    return Path(arg) if arg else fixture_graph_dir()


def run_chat(args: argparse.Namespace, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    kg = load_kg(_graph_dir(args.graph))
    templates = TemplateTable.load(args.templates) if args.templates else None
    engine = ConsultationEngine(kg, templates=templates, locale=args.locale)
    session_id = crm.session_id_from_seed(args.seed) if args.seed is not None else None
    state = engine.new_session(session_id)
    transcript: list[dialogue.Utterance] = []

    interactive = stdin.isatty()
    if interactive:
        print("medconsult: describe your symptoms (Ctrl-D to quit)", file=stdout)
    for line in stdin:
        text = line.strip()
        if not text:
            continue
        if not interactive:
            print(f"you> {text}", file=stdout)
        reply = engine.step(state, transcript, text)
        print(f"doctor> {reply.text}", file=stdout)
        for attachment in reply.attachments:
            print(f"  [image] {attachment.drug}: {attachment.image_uri}", file=stdout)
        if state.phase is Phase.CLOSED:
            break

    if args.transcript:
        Path(args.transcript).write_text(
            dialogue.transcript_to_json(transcript), encoding="utf-8"
        )
    if args.record:
        if state.phase is not Phase.CLOSED:
            print("session not closed; no record written", file=sys.stderr)
            return 1
        record = engine.generate_record(state, transcript)
        Path(args.record).write_text(dialogue.record_to_json(record), encoding="utf-8")
    return 0


def run_bench(args: argparse.Namespace) -> int:
    synthetic = [args.diseases, args.symptoms, args.per_disease]
    if args.graph and any(v is not None for v in synthetic):
        raise InvalidSpec("pass either --graph or the synthetic --diseases/--symptoms/--per-disease")
    if args.graph:
        graph_dir = Path(args.graph)
    elif all(v is not None for v in synthetic):
        import tempfile

        tmp = tempfile.mkdtemp(prefix="medconsult-bench-")
        graph_dir = gen_graph(
            tmp, args.diseases, args.symptoms, args.per_disease, args.seed, args.distinct
        )
    else:
        raise InvalidSpec("bench needs --graph or all of --diseases/--symptoms/--per-disease")

    report = bench(graph_dir, args.runs, args.seed)
    print(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    return 0


def run_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else load_config()
    if args.graph:
        config.graph_dir = args.graph
    if args.templates:
        config.templates_path = args.templates
    if args.locale:
        config.locale = args.locale
    if args.store:
        config.store_dir = args.store
    if args.listen:
        config.listen = args.listen
    if args.webui:
        config.webui_dir = args.webui
    from . import service

    service.run(config)
    return 0


def run_validate(args: argparse.Namespace) -> int:
    kg = load_kg(_graph_dir(args.graph), validate_assets=args.assets)
    for kind, count in sorted(kg.stats.items(), key=lambda kv: kv[0].value):
        print(f"{kind.value}: {count}")
    print("ok")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "chat":
            return run_chat(args)
        if args.command == "bench":
            return run_bench(args)
        if args.command == "gen-graph":
            out = gen_graph(
                args.out, args.diseases, args.symptoms, args.per_disease, args.seed, args.distinct
            )
            print(f"wrote synthetic graph to {out}")
            return 0
        if args.command == "serve":
            return run_serve(args)
        if args.command == "validate":
            return run_validate(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (KgLoadError, InvalidSpec) as error:
        print(f"error ({error.code}): {error.message}", file=sys.stderr)
        return 2
    except MedconsultError as error:
        print(f"error ({error.code}): {error.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
