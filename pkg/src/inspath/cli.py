"""Command-line front end: headless pipeline runs, scene rendering to replay
directories, and serving the interactive session API.

Exit codes: 0 ok, 2 config error, 3 input error, 4 empty profile,
5 internal error, 6 port busy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .acquisition import ReplaySource, save_replay
from .config import PipelineConfig, config_from_dict, config_to_dict, load_config
from .errors import (CloudParseError, ConfigError, EmptyProfileError,
                     InsufficientFramesError, InvalidArgumentError, StageError)
from .scenes import NoiseSpec, load_scene

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_EMPTY_PROFILE = 4
EXIT_INTERNAL = 5
EXIT_PORT_BUSY = 6


def _bold(text: str) -> str:
    if os.environ.get("NO_COLOR"):
        return text
    return f"\033[1m{text}\033[0m"


def _classify(exc: Exception) -> int:
    if isinstance(exc, StageError):
        return _classify(exc.cause)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, EmptyProfileError):
        return EXIT_EMPTY_PROFILE
    if isinstance(exc, (InvalidArgumentError, InsufficientFramesError,
                        CloudParseError, FileNotFoundError)):
        return EXIT_INPUT
    return EXIT_INTERNAL


def _print_summary(record) -> None:
    sampling_s = record.timings_ms.get("sample", 0.0) / 1e3
    headers = ["Number of points", "Sampling time [sec]",
               "Object profile points", "Final targets generated"]
    values = [str(record.counts.get("downsample", 0)), f"{sampling_s:.2f}",
              str(record.counts.get("profile", 0)),
              str(record.counts.get("targets_final", 0))]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    print(_bold("  ".join(h.ljust(w) for h, w in zip(headers, widths))))
    print("  ".join(v.ljust(w) for v, w in zip(values, widths)))
    detail = ", ".join(f"{k}={record.counts[k]}" for k in
                       ("merge", "visible", "downsample", "clusters", "object",
                        "profile", "targets_generated", "targets_final")
                       if k in record.counts)
    print(f"stages: {detail}")


def cmd_run(args) -> int:
    from . import pipeline

    config = load_config(args.config) if args.config else PipelineConfig()
    if args.select is not None:
        if args.select == "largest":
            selection = "largest"
        elif args.select == "interactive":
            selection = "interactive"
        else:
            try:
                selection = [int(tok) for tok in args.select.split(",") if tok != ""]
            except ValueError:
                raise ConfigError(f"bad --select value {args.select!r}",
                                  path="cluster_selection") from None
        cfg_dict = config_to_dict(config)
        cfg_dict["cluster_selection"] = selection
        config = config_from_dict(cfg_dict)
    if args.headless and config.cluster_selection == "interactive":
        raise ConfigError("interactive selection cannot run with --headless",
                          path="cluster_selection")

    seed = args.seed
    if args.frames:
        source = ReplaySource(args.frames)
        source_info = {"type": "replay", "path": str(args.frames)}
    else:
        spec = load_scene(args.scene)
        if seed is None:
            seed = spec.seed
        source = spec.source(count=config.s, seed=seed)
        source_info = {"type": "scene", "path": str(args.scene), "frames": config.s}

    record = pipeline.run(source, config, args.out, run_id=args.run_id,
                          seed=seed, source_info=source_info)
    _print_summary(record)
    if record.state == "awaiting_selection":
        print(f"run suspended awaiting cluster selection: {record.run_dir}")
        print(f"serve it with: inspath serve --run {record.run_dir}")
        return EXIT_OK
    print(f"plan: {record.plan_path}")
    return EXIT_OK


def cmd_render(args) -> int:
    from .scenes import SyntheticSource

    spec = load_scene(args.scene)
    noise = spec.noise
    if args.noise:
        doc = json.loads(args.noise)
        mults = doc.get("strobe_multipliers")
        noise = NoiseSpec(
            depth_sigma=float(doc.get("depth_sigma", 0.0)),
            dropout_prob=float(doc.get("dropout_prob", 0.0)),
            strobe_period=doc.get("strobe_period"),
            strobe_multipliers=tuple(mults) if mults is not None else None,
        )
    seed = args.seed if args.seed is not None else spec.seed
    source = SyntheticSource(spec.scene, spec.camera, noise, seed=seed, count=args.frames)
    out = save_replay(args.out, list(source))
    print(f"wrote {args.frames} frames to {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    run_dir = Path(args.run)
    if not (run_dir / "record.json").exists():
        raise InvalidArgumentError(f"{run_dir} is not a run directory (no record.json)")
    ui = args.ui if args.ui else None
    app = create_app(run_dir, ui_dir=ui)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:  # uvicorn exits 1 when the socket bind fails
        if exc.code:
            print(f"error: could not bind port {args.port} (busy?)", file=sys.stderr)
            return EXIT_PORT_BUSY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PORT_BUSY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inspath",
        description="Inspection path planning from depth-camera point clouds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the pipeline and write a plan")
    p_run.add_argument("--config", type=Path, default=None, help="pipeline config JSON")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--frames", type=Path, help="replay directory")
    src.add_argument("--scene", type=Path, help="synthetic scene JSON")
    p_run.add_argument("--out", type=Path, default=Path("runs"), help="output root")
    p_run.add_argument("--select", default=None,
                       help="cluster selection: 'largest', 'interactive' or ids like '0,2'")
    p_run.add_argument("--seed", type=int, default=None, help="render seed override")
    p_run.add_argument("--headless", action="store_true",
                       help="refuse interactive selection")
    p_run.add_argument("--run-id", default=None, help=argparse.SUPPRESS)
    p_run.set_defaults(fn=cmd_run)

    p_render = sub.add_parser("render", help="render a scene to a replay directory")
    p_render.add_argument("--scene", type=Path, required=True)
    p_render.add_argument("--out", type=Path, required=True)
    p_render.add_argument("--frames", type=int, default=5)
    p_render.add_argument("--noise", default=None, help="noise spec JSON string")
    p_render.add_argument("--seed", type=int, default=None)
    p_render.set_defaults(fn=cmd_render)

    p_serve = sub.add_parser("serve", help="serve the session API for a run")
    p_serve.add_argument("--run", type=Path, required=True)
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", type=Path, default=None, help="static viewer directory")
    p_serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - single exit-code funnel
        code = _classify(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
