"""Command-line front end: validate, run, and report on experiment configs.

By default every subcommand executes in-process.  With --server the same
operations are delegated to a froglab HTTP service, keeping this layer a
thin client: configs are still parsed locally first so override flags and
error reporting behave identically in both modes.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, FroglabError
from .experiments import (TOOL_VERSION, emit_report, run_dir_for,
                          run_experiment)
from .groups import MemoryBudget


def _apply_overrides(cfg, args):
    changes = {}
    if getattr(args, "parallelism", None) is not None:
        changes["parallelism"] = args.parallelism
    if getattr(args, "output_dir", None) is not None:
        changes["output_dir"] = str(args.output_dir)
    elems = getattr(args, "budget_elements", None)
    cells = getattr(args, "budget_cells", None)
    if elems is not None or cells is not None:
        changes["budget"] = MemoryBudget(
            elems if elems is not None else cfg.budget.max_elements,
            cells if cells is not None else cfg.budget.max_box_cells)
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _load(args):
    cfg = load_config(args.config)
    return _apply_overrides(cfg, args)


def _print_problems(problems) -> None:
    for loc, msg in problems:
        print(f"{loc}: {msg}", file=sys.stderr)


def _cmd_validate(args) -> int:
    if args.server:
        import httpx
        text = Path(args.config).read_text()
        resp = httpx.post(f"{args.server}/validate",
                          json={"config_text": text}, timeout=60.0)
        resp.raise_for_status()
        data = resp.json()
        if not data["valid"]:
            _print_problems((p["location"], p["message"])
                            for p in data["problems"])
            return 1
        print(f"OK {data['kind']} {data['config_hash'][:12]}")
        return 0
    try:
        cfg = _load(args)
    except ConfigError as exc:
        _print_problems(exc.problems)
        return 1
    print(f"OK {cfg.kind} {cfg.config_hash[:12]}")
    return 0


def _cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        _print_problems(exc.problems)
        return 1
    if args.server:
        import httpx
        resp = httpx.post(f"{args.server}/runs",
                          json={"config_text": cfg.to_text(), "wait": True},
                          timeout=None)
        resp.raise_for_status()
        status = resp.json()
        if status["status"] != "complete":
            print(f"run failed: {status.get('error')}", file=sys.stderr)
            return 1
        rep = httpx.get(f"{args.server}/runs/{status['run_id']}/report",
                        timeout=60.0)
        rep.raise_for_status()
        data = rep.json()
        print(data["text"], end="")
        print(f"run directory: {status['run_dir']}")
        return 0 if data["passed"] else 1
    try:
        run_experiment(cfg)
        report = emit_report(run_dir_for(cfg))
    except FroglabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.text, end="")
    print(f"run directory: {run_dir_for(cfg)}")
    return 0 if report.passed else 1


def _cmd_report(args) -> int:
    try:
        report = emit_report(args.run_dir)
    except (FroglabError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.text, end="")
    return 0 if report.passed else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(default_output_dir=args.output_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="froglab",
        description="Frog-model simulation lab on abelian Cayley graphs.")
    parser.add_argument("--version", action="version",
                        version=f"froglab {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_overrides=True):
        p.add_argument("config", help="experiment config file")
        p.add_argument("--server", metavar="URL", default=None,
                       help="delegate to a froglab service at this base URL")
        if with_overrides:
            p.add_argument("--output-dir", default=None,
                           help="override the config's output directory")
            p.add_argument("--parallelism", type=int, default=None,
                           help="override the config's parallelism degree")
            p.add_argument("--budget-elements", type=int, default=None,
                           help="override the max-elements memory budget")
            p.add_argument("--budget-cells", type=int, default=None,
                           help="override the max-box-cells memory budget")

    p_val = sub.add_parser("validate", help="parse a config, list problems")
    add_common(p_val)
    p_val.set_defaults(func=_cmd_validate)

    p_run = sub.add_parser("run", help="execute an experiment and report")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("report", help="re-evaluate checks on a finished run")
    p_rep.add_argument("run_dir", help="run directory with manifest and results")
    p_rep.set_defaults(func=_cmd_report)

    p_srv = sub.add_parser("serve", help="start the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8700)
    p_srv.add_argument("--output-dir", default=None,
                       help="default output directory for service-run jobs")
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
