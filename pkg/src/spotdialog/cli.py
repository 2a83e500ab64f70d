"""Command-line entry points: ``engine serve`` and ``engine replay``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import EngineConfig
from .llm_backend import BackendConfig


def _build_config(args: argparse.Namespace) -> EngineConfig:
    config = EngineConfig(llm=BackendConfig.from_env(mode=args.llm_mode))
    overrides = {}
    if args.poi:
        overrides["poi_path"] = Path(args.poi)
    if args.templates:
        overrides["templates_dir"] = Path(args.templates)
    if getattr(args, "early_response", False):
        overrides["early_response"] = True
    return config.with_overrides(**overrides) if overrides else config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--poi", help="path to the POI spot file (TSV)")
    parser.add_argument("--templates", help="directory of realization templates")
    parser.add_argument(
        "--llm-mode",
        choices=("stub", "live"),
        default="stub",
        help="completion backend (default: stub, fully offline)",
    )
    parser.add_argument(
        "--early-response",
        action="store_true",
        help="allow responses triggered by non-final transcription updates",
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="engine",
        description="Incremental sightseeing-dialogue engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the streaming session service")
    _add_common(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8020)
    serve.add_argument("--ui", help="static directory to serve at /ui")

    replay = sub.add_parser("replay", help="replay a timed transcript file")
    _add_common(replay)
    replay.add_argument("transcript", help="transcript file to drive the session")
    replay.add_argument("--out", help="write the decision log here")
    replay.add_argument("--actions-out", help="write the action stream (JSONL) here")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    if args.command == "serve":
        import uvicorn

        from .server import create_app

        app = create_app(
            _build_config(args), ui_dir=Path(args.ui) if args.ui else None
        )
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
        return 0

    from .replay import replay_transcript

    report = replay_transcript(
        args.transcript,
        _build_config(args),
        out_path=args.out,
        actions_out=args.actions_out,
    )
    print(f"events decided: {len(report.decision_lines)}")
    print(f"actions emitted: {len(report.actions)}")
    if report.matched or report.mismatched:
        print(f"annotations matched: {report.matched}, mismatched: {report.mismatched}")
    for line in report.mismatches:
        print(f"  {line}")
    if args.out:
        print(f"decision log written to {args.out}")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
