"""Command line: ``nadyn run``, ``nadyn zoo list``, ``nadyn zoo dump``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .scenario import ConfigError, load_config, run_scenario, write_report
from .zoo import ZOO, zoo_names, zoo_system

EXIT_OK, EXIT_MUST_FAILED, EXIT_CONFIG = 0, 1, 2


def _parse_params(tokens: list[str]) -> dict[str, int]:
    params = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ConfigError([(tok, "expected key=value")])
        try:
            params[key] = int(value)
        except ValueError:
            raise ConfigError([(key, f"expected an integer, got {value!r}")]) from None
    return params


def schedule_csv(F) -> str:
    """One row per table entry: segment, index, point, image."""
    lines = ["segment,index,point,image"]
    for seg, tables in (("prefix", F.prefix), ("cycle", F.cycle)):
        for i, t in enumerate(tables):
            lines += [f"{seg},{i},{x},{int(y)}" for x, y in enumerate(t.forward)]
    return "\n".join(lines) + "\n"


def _cmd_run(args) -> int:
    run = run_scenario(load_config(args.config), workers=args.workers)
    if args.out:
        path = write_report(run, args.out)
        print(f"wrote {path}")
    else:
        sys.stdout.write(run.report_json())
    for c in run.report["checks"]:
        mark = "" if c["expect"] is None else f" [{c['expect']}: {'ok' if c['expectation_met'] else 'FAILED'}]"
        print(f"{c['id']}: verdict={c['verdict']}{mark}", file=sys.stderr)
    return EXIT_MUST_FAILED if run.failed_must else EXIT_OK


def _cmd_zoo_list(args) -> int:
    for name in zoo_names():
        doc = (ZOO[name].__doc__ or "").strip()
        print(name if not doc else f"{name}: {doc}")
    return EXIT_OK


def _cmd_zoo_dump(args) -> int:
    try:
        F = zoo_system(args.name, **_parse_params(args.params))
    except KeyError as exc:
        raise ConfigError([("params", f"missing parameter {exc}")]) from None
    except ValueError as exc:
        raise ConfigError([("zoo", str(exc))]) from None
    text = schedule_csv(F)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nadyn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a JSON scenario")
    run.add_argument("config")
    run.add_argument("--out", help="directory for report.json, timings.json and CSV files")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    zoo = sub.add_parser("zoo", help="named example systems")
    zsub = zoo.add_subparsers(dest="zoo_command", required=True)
    zl = zsub.add_parser("list")
    zl.set_defaults(func=_cmd_zoo_list)
    zd = zsub.add_parser("dump", help="write a schedule as CSV")
    zd.add_argument("name")
    zd.add_argument("params", nargs="*", help="key=value, e.g. q=5")
    zd.add_argument("--out", help="CSV path ('-' for stdout)")
    zd.set_defaults(func=_cmd_zoo_dump)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        for path, msg in exc.problems:
            print(f"config error at {path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
