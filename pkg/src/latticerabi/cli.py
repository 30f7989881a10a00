"""Command line interface.

Subcommands: bands, evolve, compare, scenario, plot.  Failures print a
machine-readable JSON object on stderr and exit nonzero (2 for usage or
configuration problems, 1 for runtime faults).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConfigurationError, DomainError, LatticeRabiError, UsageError
from .scenarios import (
    BandScan,
    DEFAULT_BREAKDOWN_THRESHOLD,
    Scenario,
    builtin_names,
    builtin_scenarios,
    compare,
    resolve_names,
    run_scenario,
    scenario_from_config,
)
from .series import ObservableSeries
from .svgplot import emit_plots

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticerabi",
        description="Cold-atom quantum Rabi simulation laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bands = sub.add_parser("bands", help="band-structure scan over the Brillouin zone")
    p_bands.add_argument("--v", type=float, default=2.0, help="lattice depth V/E_r")
    p_bands.add_argument("--n-bands", type=int, default=2)
    p_bands.add_argument("--q-resolution", type=int, default=257)
    p_bands.add_argument("--out-dir", default=".")
    p_bands.add_argument("--plot", action="store_true", help="also emit SVG charts")

    p_ev = sub.add_parser("evolve", help="run one model on one configuration")
    p_ev.add_argument("--model", choices=("full", "periodic", "rabi"), required=True)
    group = p_ev.add_argument_group("physical parameters (ratios or direct)")
    group.add_argument("--g-over-w0", type=float)
    group.add_argument("--wq-over-w0", type=float, default=0.0)
    group.add_argument("--v", type=float)
    group.add_argument("--w0", type=float)
    p_ev.add_argument("--qubit", choices=("nb0", "nb1", "plus"), default="nb1")
    p_ev.add_argument("--t-max", type=float, help="window in hbar/E_r")
    p_ev.add_argument("--trap-periods", type=float, help="window in trap periods")
    p_ev.add_argument("--n-records", type=int, default=400)
    p_ev.add_argument("--dt", type=float)
    p_ev.add_argument("--n-points", type=int)
    p_ev.add_argument("--cutoff", type=int, default=600)
    p_ev.add_argument("--name", default="run")
    p_ev.add_argument("--out-dir", default=".")
    p_ev.add_argument("--no-convergence-probe", action="store_true")

    p_cmp = sub.add_parser("compare", help="deviation report between two series CSVs")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")
    p_cmp.add_argument("--threshold", type=float, default=DEFAULT_BREAKDOWN_THRESHOLD)
    p_cmp.add_argument("--out", help="write the report JSON here instead of stdout")

    p_sc = sub.add_parser("scenario", help="run a named or configured scenario")
    p_sc.add_argument("name", nargs="?", help=f"one of: {', '.join(builtin_names())}")
    p_sc.add_argument("--config", help="path to a scenario JSON document")
    p_sc.add_argument("--out-dir", default=".")
    p_sc.add_argument("--dt", type=float)
    p_sc.add_argument("--n-points", type=int)
    p_sc.add_argument("--cutoff", type=int)
    p_sc.add_argument("--t-max", type=float)
    p_sc.add_argument("--no-convergence-probe", action="store_true")
    p_sc.add_argument("--plot", action="store_true")

    p_pl = sub.add_parser("plot", help="SVG line charts from a CSV")
    p_pl.add_argument("csv", nargs="+")
    p_pl.add_argument("--out-dir", default=".")
    return parser


def _cmd_bands(args) -> int:
    scan = BandScan(name="bands", v=args.v, n_bands=args.n_bands,
                    q_resolution=args.q_resolution)
    result = run_scenario(scan, args.out_dir)
    for f in result.files:
        print(f)
    if args.plot:
        for f in emit_plots(result.files[0], args.out_dir):
            print(f)
    return 0


def _cmd_evolve(args) -> int:
    doc = {
        "name": args.name,
        "models": [args.model],
        "qubit": args.qubit,
        "n_records": args.n_records,
        "cutoff": args.cutoff,
    }
    if args.g_over_w0 is not None:
        doc["params"] = {"g_over_w0": args.g_over_w0, "wq_over_w0": args.wq_over_w0}
    elif args.v is not None and args.w0 is not None:
        doc["params"] = {"v": args.v, "w0": args.w0}
    else:
        raise UsageError("provide either --g-over-w0 [--wq-over-w0] or both --v and --w0")
    if args.trap_periods is not None:
        doc["t_max"] = {"trap_periods": args.trap_periods}
    elif args.t_max is not None:
        doc["t_max"] = args.t_max
    else:
        raise UsageError("provide --t-max or --trap-periods")
    if args.dt is not None:
        doc["dt"] = args.dt
    if args.n_points is not None:
        doc["n_points"] = args.n_points
    scenario = scenario_from_config(doc)
    result = run_scenario(scenario, args.out_dir,
                          convergence_probe=not args.no_convergence_probe)
    for f in result.files:
        print(f)
    return 0


def _cmd_compare(args) -> int:
    a = ObservableSeries.from_csv(args.csv_a)
    b = ObservableSeries.from_csv(args.csv_b)
    report = compare(a, b, threshold=args.threshold, pair=(args.csv_a, args.csv_b))
    text = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text + "\n")
        print(args.out)
    else:
        print(text)
    return 0


def _cmd_scenario(args) -> int:
    if (args.name is None) == (args.config is None):
        raise UsageError("provide exactly one of a scenario name or --config PATH")
    if args.config is not None:
        with open(args.config) as fh:
            doc = json.load(fh)
        scenarios = [scenario_from_config(_apply_overrides_doc(doc, args))]
    else:
        reg = builtin_scenarios()
        scenarios = [_apply_overrides(reg[n], args) for n in resolve_names(args.name)]
    failures = 0
    for sc in scenarios:
        try:
            result = run_scenario(sc, args.out_dir,
                                  convergence_probe=not args.no_convergence_probe)
        except LatticeRabiError as exc:
            failures += 1
            _print_error(exc)
            continue
        for f in result.files:
            print(f)
        if args.plot:
            for f in result.files:
                if f.endswith(".csv"):
                    for svg in emit_plots(f, args.out_dir):
                        print(svg)
    return 1 if failures else 0


def _apply_overrides_doc(doc: dict, args) -> dict:
    doc = dict(doc)
    if args.dt is not None:
        doc["dt"] = args.dt
    if args.n_points is not None:
        doc["n_points"] = args.n_points
    if args.cutoff is not None:
        doc["cutoff"] = args.cutoff
    if args.t_max is not None:
        doc["t_max"] = args.t_max
    return doc


def _apply_overrides(scenario, args):
    if isinstance(scenario, BandScan):
        return scenario
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.n_points is not None:
        changes["n_points"] = args.n_points
    if args.cutoff is not None:
        changes["cutoff"] = args.cutoff
    if args.t_max is not None:
        changes["t_max"] = args.t_max
    if not changes:
        return scenario
    from dataclasses import replace

    return replace(scenario, **changes)


def _cmd_plot(args) -> int:
    for csv in args.csv:
        for f in emit_plots(csv, args.out_dir):
            print(f)
    return 0


def _print_error(exc: Exception) -> None:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "bands": _cmd_bands,
        "evolve": _cmd_evolve,
        "compare": _cmd_compare,
        "scenario": _cmd_scenario,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except (UsageError, ConfigurationError, DomainError) as exc:
        _print_error(exc)
        return 2
    except LatticeRabiError as exc:
        _print_error(exc)
        return 1
    except OSError as exc:
        _print_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
