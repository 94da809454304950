"""mlfix command line: ingest datasets, analyze bundles, render reports,
serve the analysis API.

Exit codes: 0 ok, 2 input error, 3 server rejection, 4 network failure,
5 malformed artifact.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import requests

from .agents import HttpChatProvider, StubProvider, run_pipeline
from .agents.reasoner import PipelineConfig
from .ingest import IngestConfig, IngestError, ingest
from .kb import default_index
from .model import WireError, decode_bundle, decode_diagnosis, encode_diagnosis
from .report import render_report
from .server import ENV_API_KEY, ENV_ENDPOINT, ENV_KB_PATH, ENV_STUB_FIXTURES, ServerConfig, serve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SERVER = 3
EXIT_NETWORK = 4
EXIT_MALFORMED = 5


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlfix", description="Diagnostics for tabular ML workflows")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="run the diagnostic suites and write an artifact bundle")
    p_ingest.add_argument("--train", required=True, help="train split CSV")
    p_ingest.add_argument("--test", required=True, help="test split CSV")
    p_ingest.add_argument("--schema", required=True, help="dataset schema JSON")
    p_ingest.add_argument("--predictions-train", help="train predictions JSON")
    p_ingest.add_argument("--predictions-test", help="test predictions JSON")
    p_ingest.add_argument("--checkpoint", help="checkpoint metadata JSON")
    p_ingest.add_argument("--config", help="check configuration overrides JSON")
    p_ingest.add_argument("--out", required=True, help="output bundle path")

    p_analyze = sub.add_parser("analyze", help="turn a bundle into a diagnosis")
    p_analyze.add_argument("--bundle", required=True, help="bundle JSON path")
    mode = p_analyze.add_mutually_exclusive_group(required=True)
    mode.add_argument("--server", help="analysis server base URL")
    mode.add_argument("--offline", action="store_true", help="run the pipeline in-process")
    p_analyze.add_argument("--timeout", type=float, default=60.0, help="server timeout in seconds")
    p_analyze.add_argument("--out", required=True, help="output diagnosis path")

    p_report = sub.add_parser("report", help="render a diagnosis for humans")
    p_report.add_argument("--diagnosis", required=True, help="diagnosis JSON path")
    p_report.add_argument("--format", choices=("markdown", "plain"), default="markdown")

    p_serve = sub.add_parser("serve", help="run the analysis server")
    p_serve.add_argument("--config", help="server config JSON")
    p_serve.add_argument("--host", help="bind address (overrides config)")
    p_serve.add_argument("--port", type=int, help="bind port (overrides config)")
    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    config = IngestConfig(
        train_path=args.train,
        test_path=args.test,
        schema_path=args.schema,
        predictions_train_path=args.predictions_train,
        predictions_test_path=args.predictions_test,
        checkpoint_path=args.checkpoint,
        check_config_path=args.config,
        output_path=args.out,
    )
    try:
        bundle = ingest(config)
    except IngestError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except WireError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    statuses = [r.status.value for r in bundle.all_results()]
    print(
        f"wrote {args.out}: {len(statuses)} checks "
        f"({statuses.count('fail')} fail, {statuses.count('warn')} warn, "
        f"{statuses.count('pass')} pass, {statuses.count('skipped')} skipped, "
        f"{statuses.count('error')} error)"
    )
    return EXIT_OK


def submit(bundle_path: str, server_url: str, timeout: float, output_path: str) -> int:
    """POST a bundle to the server and write the returned diagnosis verbatim."""
    try:
        raw = Path(bundle_path).read_bytes()
    except OSError as err:
        print(f"error: cannot read bundle: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        decode_bundle(raw)
    except WireError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    url = server_url.rstrip("/") + "/analyze"
    try:
        response = requests.post(
            url, data=raw, headers={"Content-Type": "application/json"}, timeout=timeout
        )
    except requests.Timeout:
        print(f"error: server did not answer within {timeout:g}s", file=sys.stderr)
        return EXIT_NETWORK
    except requests.RequestException as err:
        print(f"error: cannot reach server: {err}", file=sys.stderr)
        return EXIT_NETWORK
    if response.status_code != 200:
        print(f"error: server returned {response.status_code}: {response.text}", file=sys.stderr)
        return EXIT_SERVER
    Path(output_path).write_bytes(response.content)
    print(f"wrote {output_path} (X-Cache: {response.headers.get('X-Cache', 'unknown')})")
    return EXIT_OK


def _analyze_offline(bundle_path: str, output_path: str) -> int:
    try:
        raw = Path(bundle_path).read_bytes()
    except OSError as err:
        print(f"error: cannot read bundle: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        bundle = decode_bundle(raw)
    except WireError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    endpoint = os.environ.get(ENV_ENDPOINT)
    if endpoint:
        provider = HttpChatProvider(endpoint=endpoint, api_key=os.environ.get(ENV_API_KEY))
    else:
        fixtures = os.environ.get(ENV_STUB_FIXTURES)
        provider = StubProvider.from_file(fixtures) if fixtures else StubProvider()
    kb = default_index(os.environ.get(ENV_KB_PATH))
    diagnosis = run_pipeline(bundle, provider, kb, PipelineConfig())
    Path(output_path).write_bytes(encode_diagnosis(diagnosis))
    mode = "degraded rule-based" if diagnosis.degraded else "provider-backed"
    print(f"wrote {output_path} ({mode}, {len(diagnosis.ranked_findings)} findings)")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        raw = Path(args.diagnosis).read_bytes()
    except OSError as err:
        print(f"error: cannot read diagnosis: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        diagnosis = decode_diagnosis(raw)
    except WireError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MALFORMED
    print(render_report(diagnosis, args.format), end="")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    try:
        config = ServerConfig.load(args.config)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    serve(config)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "ingest":
        return _cmd_ingest(args)
    if args.command == "analyze":
        if args.offline:
            return _analyze_offline(args.bundle, args.out)
        return submit(args.bundle, args.server, args.timeout, args.out)
    if args.command == "report":
        return _cmd_report(args)
    if args.command == "serve":
        return _cmd_serve(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
