"""Command-line access: serve mode and one-shot JSON analysis reports.

Reports are emitted through the same canonical serializer as the HTTP
service, so a report written with --out is byte-identical to the matching
endpoint body. Exit codes: 0 success, 1 input error, 2 backend/IO failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import serialize
from .errors import ModelProbeError, RemoteModelError
from .service import ServiceConfig, serve
from .workspace import Workspace

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BACKEND = 2


def _add_dataset_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", required=True, help="CSV or JSONL file to load")
    parser.add_argument(
        "--format", choices=["csv", "jsonl"], help="override format inferred from extension"
    )


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--model",
        action="append",
        default=[],
        metavar="[SLOT=]SPEC_OR_URL",
        help="model weights JSON path or http(s) endpoint; slot defaults to model1",
    )
    parser.add_argument("--model2", metavar="SPEC_OR_URL", help="shorthand for model2=...")


def _add_out_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelprobe")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_dataset_arg(p)
    _add_model_args(p)
    p.add_argument("--port", type=int, default=int(os.environ.get("MODELPROBE_PORT", "8000")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cors", action="store_true", help="allow cross-origin requests")
    p.add_argument("--ui-dir", help="directory of workbench static assets to mount at /ui")

    p = sub.add_parser("stats", help="dataset summary statistics")
    _add_dataset_arg(p)
    p.add_argument("--sort", choices=["non-uniformity", "missing", "alpha"])
    _add_out_arg(p)

    p = sub.add_parser("counterfactual", help="nearest differing-outcome point")
    _add_dataset_arg(p)
    _add_model_args(p)
    p.add_argument("--point", type=int, required=True)
    p.add_argument("--norm", choices=["l1", "l2"], default="l1")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--for-model", default="model1", help="which registered model to explain")
    _add_out_arg(p)

    p = sub.add_parser("pdp", help="partial dependence curve data")
    _add_dataset_arg(p)
    _add_model_args(p)
    p.add_argument("--feature", required=True)
    p.add_argument("--point", type=int)
    p.add_argument("--global", dest="global_", action="store_true")
    p.add_argument("--range", help="lo:hi sweep override")
    p.add_argument("--num-points", type=int, default=10)
    _add_out_arg(p)

    p = sub.add_parser("performance", help="performance table or fairness report")
    _add_dataset_arg(p)
    _add_model_args(p)
    p.add_argument("--label", required=True, help="ground-truth feature")
    p.add_argument("--positive", help="positive class value (binary)")
    p.add_argument("--classes", help="comma-separated class order (multiclass)")
    p.add_argument("--slice-by", help="one feature or f1,f2")
    p.add_argument("--cost-ratio", type=float, default=1.0)
    p.add_argument("--threshold", type=float, help="fixed threshold instead of optimizing")
    p.add_argument(
        "--strategy",
        choices=["single", "group", "demographic-parity", "equal-opportunity", "equal-accuracy"],
        help="run a fairness optimization strategy instead of the plain table",
    )
    p.add_argument("--epsilon", type=float, default=0.01)
    _add_out_arg(p)

    return parser


def _load_workspace(args) -> Workspace:
    ws = Workspace()
    path = Path(args.dataset)
    fmt = args.format or ("jsonl" if path.suffix == ".jsonl" else "csv")
    ws.load_dataset(path.read_bytes(), fmt)
    specs: list[tuple[str, str]] = []
    for raw in getattr(args, "model", []) or []:
        slot, sep, source = raw.partition("=")
        if not sep or slot not in ("model1", "model2"):
            slot, source = "model1", raw
        specs.append((slot, source))
    if getattr(args, "model2", None):
        specs.append(("model2", args.model2))
    for slot, source in specs:
        if source.startswith(("http://", "https://")):
            ws.register_model(slot, source)
        else:
            ws.register_model(slot, json.loads(Path(source).read_text()))
    return ws


def _emit(payload: dict, out: str | None) -> None:
    data = serialize.dump_bytes(payload)
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data + b"\n")
        sys.stdout.buffer.flush()


def _split(raw: str | None) -> list[str] | None:
    if not raw:
        return None
    return [part for part in raw.split(",") if part]


def _parse_range(raw: str | None) -> tuple[float, float] | None:
    if raw is None:
        return None
    lo, _, hi = raw.partition(":")
    return (float(lo), float(hi))


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK

    try:
        if args.command == "serve":
            specs = []
            for raw in args.model or []:
                slot, sep, source = raw.partition("=")
                if not sep or slot not in ("model1", "model2"):
                    slot, source = "model1", raw
                specs.append((slot, source))
            if args.model2:
                specs.append(("model2", args.model2))
            ui_dir = args.ui_dir
            if ui_dir is None and Path("frontend/index.html").is_file():
                ui_dir = "frontend"  # workbench assets next to the checkout
            serve(
                ServiceConfig(
                    host=args.host,
                    port=args.port,
                    cors=args.cors,
                    ui_dir=ui_dir,
                    dataset_path=args.dataset,
                    dataset_format=args.format,
                    models=specs,
                )
            )
            return EXIT_OK

        if args.command == "stats":
            ws = _load_workspace(args)
            _emit(ws.stats(sort=args.sort), args.out)
            return EXIT_OK

        if args.command == "counterfactual":
            ws = _load_workspace(args)
            _emit(
                ws.counterfactual(
                    args.point, args.norm, args.for_model, args.threshold
                ),
                args.out,
            )
            return EXIT_OK

        if args.command == "pdp":
            ws = _load_workspace(args)
            _emit(
                ws.pdp(
                    args.feature,
                    point_id=args.point,
                    global_=args.global_,
                    range_=_parse_range(args.range),
                    num_points=args.num_points,
                ),
                args.out,
            )
            return EXIT_OK

        if args.command == "performance":
            ws = _load_workspace(args)
            if args.strategy:
                payload = ws.fairness(
                    strategy=args.strategy,
                    label=args.label,
                    positive=args.positive,
                    slice_by=_split(args.slice_by),
                    cost_ratio=args.cost_ratio,
                    epsilon=args.epsilon,
                )
            else:
                payload = ws.performance(
                    label=args.label,
                    positive=args.positive,
                    classes=_split(args.classes),
                    slice_by=_split(args.slice_by),
                    cost_ratio=args.cost_ratio,
                    threshold=args.threshold,
                )
            _emit(payload, args.out)
            return EXIT_OK
    except RemoteModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BACKEND
    except (ModelProbeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    parser.error(f"unknown command {args.command!r}")
    return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
