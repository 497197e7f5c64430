"""Command line: ``twophoton run|sweep|simulate|presets``.

Exit status: 0 when every check passes, 1 on a physics-check failure,
2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .circuit_format import CircuitParseError, parse_circuit
from .scenarios import (
    SCENARIOS,
    ScenarioError,
    UnknownScenarioError,
    counts_to_csv,
    distribution_to_csv,
    evaluate_circuit,
    format_number,
    reports_to_csv,
    run_scenario,
    sweep,
)

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _overrides(pairs: list[str]) -> dict[str, float]:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects NAME=VALUE, got {pair!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"--set {key}: {value!r} is not a number") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twophoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset scenario and print its report as CSV")
    run.add_argument("scenario")
    run.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                     help="override a preset parameter (repeatable)")
    run.add_argument("--distribution", action="store_true",
                     help="print the output Fock distribution instead of the report")

    sw = sub.add_parser("sweep", help="run a preset over a parameter grid, one CSV row per point")
    sw.add_argument("scenario")
    sw.add_argument("--param", required=True)
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--steps", type=int, required=True)
    sw.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")

    sim = sub.add_parser("simulate", help="simulate a circuit file")
    sim.add_argument("circuit", type=Path)
    sim.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    sim.add_argument("--counts", action="store_true",
                     help="print the joint detector-count table instead of Fock amplitudes")

    sub.add_parser("presets", help="list bundled scenarios")
    return parser


def _run(args) -> int:
    report = run_scenario(args.scenario, _overrides(args.set))
    if args.distribution:
        sys.stdout.write(distribution_to_csv(report.distribution))
    else:
        sys.stdout.write(reports_to_csv([report]))
    for failure in report.failures():
        print(f"check failed: {args.scenario}: {failure}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_PHYSICS


def _sweep(args) -> int:
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    grid = np.linspace(args.start, args.stop, args.steps)
    reports = sweep(args.scenario, args.param, grid, _overrides(args.set))
    sys.stdout.write(reports_to_csv(reports))
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"check failed: {r.scenario} {args.param}={format_number(r.params[args.param])}: "
              + "; ".join(r.failures()), file=sys.stderr)
    return EXIT_PHYSICS if failed else EXIT_OK


def _simulate(args) -> int:
    try:
        text = args.circuit.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.circuit}: {exc.strerror}") from None
    spec = parse_circuit(text)
    ev = evaluate_circuit(spec.build(_overrides(args.set)))
    if args.counts:
        sys.stdout.write(counts_to_csv(ev.counts))
    else:
        sys.stdout.write(distribution_to_csv(ev.distribution))
    if ev.oracle_deviation > 1e-9:
        print(f"engine and permanent oracle disagree by {ev.oracle_deviation:.3g}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


def _presets(args) -> int:
    for name, sc in SCENARIOS.items():
        params = ", ".join(f"{k}={v}" for k, v in sc.spec().params) or "-"
        print(f"{name:8s} {sc.preset:14s} params: {params:14s} {sc.summary}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": _run, "sweep": _sweep, "simulate": _simulate, "presets": _presets}[args.command]
    label = getattr(args, "circuit", None) or "twophoton"
    try:
        return handler(args)
    except CircuitParseError as exc:
        print(f"{label}:{exc.line}:{exc.column}: {exc.kind}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, UnknownScenarioError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"twophoton: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"twophoton: internal check failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
