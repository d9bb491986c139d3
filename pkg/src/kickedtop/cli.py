"""Command-line entry point: ``kickedtop <subcommand> [--config FILE] [--set section.key=value ...]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as kio
from .config import KINDS, ConfigError, load_config
from .runner import RELATIONS, DEFAULT_COMPARE_TOL, EngineError, compare, run

EXIT_OK, EXIT_VALIDATION, EXIT_ENGINE, EXIT_COMPARE = 0, 1, 2, 3

log = logging.getLogger("kickedtop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickedtop", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI-style experiment file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. --set system.j=200 (repeatable)")
    common.add_argument("--workers", type=int, help="worker processes for grid scans (default: $KICKEDTOP_WORKERS or 1)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    for kind in KINDS:
        sub.add_parser(kind, parents=[common], help=f"run a {kind} experiment")

    cmp = sub.add_parser("compare", help="check a trace pair against a synchronisation table")
    cmp.add_argument("trace_a", type=Path, help="trace of the system near resonance")
    cmp.add_argument("trace_b", type=Path, help="reference trace at beta = delta")
    cmp.add_argument("--relation", choices=RELATIONS, default="identity")
    cmp.add_argument("--j", type=int, required=True, help="spin quantum number (residuals are scaled by j)")
    cmp.add_argument("--tol", type=float, default=DEFAULT_COMPARE_TOL, help="tolerance as a fraction of j")
    cmp.add_argument("--out", help="directory for compare.json")
    return parser


def _run_kind(args) -> int:
    text = args.config.read_text() if args.config else ""
    overrides = list(args.overrides)
    if args.workers is not None:
        overrides.append(f"run.workers={args.workers}")
    if args.out is not None:
        overrides.append(f"output.dir={args.out}")
    if args.format is not None:
        overrides.append(f"output.format={args.format}")
    cfg = load_config(text, overrides, kind=args.command)
    manifest = run(cfg)
    print(json.dumps({"outputs": sorted(manifest.outputs), "derived": manifest.derived}, sort_keys=True))
    if cfg.kind == "verify" and cfg.target == "gauss":
        for l, (re, im) in enumerate(manifest.report["G"]):
            print(f"G_{l} = {re:+.12f} {im:+.12f}i")
    elif manifest.report:
        print(kio.dumps_json(manifest.report), end="")
    return EXIT_OK


def _run_compare(args) -> int:
    a = kio.read_trace(args.trace_a)
    b = kio.read_trace(args.trace_b)
    report = compare(a, b, args.relation, args.j, args.tol)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "compare.json").write_text(kio.dumps_json(report))
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{status} relation={args.relation} max_residual={report['max_residual']:.6g} "
          f"tolerance={report['tolerance']:.6g} failing_steps={report['failing_steps']}")
    return EXIT_OK if report["passed"] else EXIT_COMPARE


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            return _run_compare(args)
        return _run_kind(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EngineError as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
