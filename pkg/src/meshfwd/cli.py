"""Command line: ``meshfwd run | compare | preset``.

Exit codes: 0 ok, 1 usage, 2 scenario validation, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__, kernels
from .metrics import InvariantViolation
from .runner import PROTOCOLS, Simulation, compare, normalize_protocols
from .scenario import PRESETS, ScenarioError, dump_scenario, load_scenario, preset

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("meshfwd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="meshfwd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("--scenario", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--protocol", choices=PROTOCOLS)
    r.add_argument("--out", default="out")

    c = sub.add_parser("compare", help="run several protocols on one scenario")
    c.add_argument("--scenario", required=True)
    c.add_argument("--protocols", required=True, help="comma separated, e.g. gsr,aal2r")
    c.add_argument("--seeds", type=int, default=1)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--out", default="out")

    s = sub.add_parser("preset", help="print or save a built-in scenario")
    s.add_argument("name", choices=PRESETS)
    s.add_argument("--emit", metavar="PATH")
    return p


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    t0 = time.perf_counter()
    report = Simulation(scenario, args.protocol, args.seed).run()
    paths = report.write(args.out)
    log.info("run finished in %.2fs (%s kernels)", time.perf_counter() - t0, kernels.BACKEND)
    pdr = report.pdr
    print(
        f"{report.protocol} seed={report.seed} nodes={len(report.scenario['nodes'])} "
        f"pdr={'NA' if pdr is None else f'{pdr:.4f}'} "
        f"throughput_bps={report.throughput_bps:.1f}"
    )
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    raw = [p.strip() for p in args.protocols.split(",") if p.strip()]
    try:
        protos = normalize_protocols(raw)
    except ValueError as err:
        print(f"meshfwd compare: {err}", file=sys.stderr)
        return EXIT_USAGE
    if len(protos) < 2:
        print("meshfwd compare: need at least two distinct protocols", file=sys.stderr)
        return EXIT_USAGE
    if args.seeds < 1:
        print("meshfwd compare: --seeds must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    result = compare(scenario, protos, args.seeds, jobs=args.jobs)
    for metric, value in result.summary():
        print(f"{metric},{value}")
    for path in result.write(args.out):
        print(path)
    return EXIT_OK


def _cmd_preset(args) -> int:
    text = dump_scenario(preset(args.name))
    if args.emit:
        Path(args.emit).write_text(text)
        print(args.emit)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"run": _cmd_run, "compare": _cmd_compare, "preset": _cmd_preset}[args.command]
    try:
        return handler(args)
    except ScenarioError as err:
        print(f"meshfwd: invalid scenario: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as err:
        print(f"meshfwd: {err}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as err:
        print(f"meshfwd: internal invariant violated: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
