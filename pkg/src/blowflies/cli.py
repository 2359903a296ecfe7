"""Command-line interface.

    blowflies equilibria  [--sweep h|tau] ...
    blowflies stability   ...
    blowflies simulate    [--taus 4,4.7,11,11.8] [--history sinusoid|constant|threshold] ...
    blowflies hopf-probe  [--epsilon 0.2,0.3] ...
    blowflies report

Parameters come from ``--preset`` (default depends on the command), then
from a flat ``key = value`` file given with ``--config``, then from flags;
later sources win. Exit codes: 0 success, 1 check failure, 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .commands import RunConfig, cmd_equilibria, cmd_hopf_probe, cmd_simulate, cmd_stability, default_workers
from .errors import BlowfliesError, ConvergenceError, FoldSingularityError
from .presets import PRESETS
from .report import cmd_report

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

PARAM_KEYS = ("p", "mu", "a", "gamma", "h", "tau")

DEFAULT_PRESET = {
    "equilibria": "two-equilibria",
    "stability": "switching-reconciled",
    "simulate": "switching-reconciled",
    "hopf-probe": "switching-reconciled",
    "report": "switching-reconciled",
}


def float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("model parameters")
    for key in PARAM_KEYS:
        g.add_argument(f"--{key}", type=float, default=None)
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None)
    parser.add_argument("--config", type=Path, default=None, help="flat key = value file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="size of the process pool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowflies",
        description="Equilibria, stability switches, simulations and Hopf probes for the harvested "
        "stage-structured blowflies equation.",
        epilog="Parameters: preset < --config file < flags. "
        "Exit codes: 0 success, 1 check failure, 2 invalid input, 3 numerical failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", help="growth curves and equilibrium branches")
    _common(p)
    p.add_argument("--sweep", choices=("h", "tau"), default=None)
    p.add_argument("--sweep-max", dest="sweep_max", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--m-points", dest="m_points", type=int, default=None)
    p.add_argument("--m-max", dest="m_max", type=float, default=None)

    p = sub.add_parser("stability", help="I(tau), S_n curves, Hopf set and stability windows")
    _common(p)
    p.add_argument("--n-cap", dest="n_cap", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--points", type=int, default=None)

    p = sub.add_parser("simulate", help="integrate and classify trajectories")
    _common(p)
    p.add_argument("--taus", type=float_list, default=None, help="comma-separated delays")
    p.add_argument("--history", choices=("sinusoid", "constant", "threshold"), default=None)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--t-end-delays", dest="t_end_delays", type=float, default=None)
    p.add_argument("--steps-per-delay", dest="steps_per_delay", type=int, default=None)
    p.add_argument("--csv-stride", dest="csv_stride", type=int, default=None)

    p = sub.add_parser("hopf-probe", help="direction and orbit stability at the first and last Hopf delay")
    _common(p)
    p.add_argument("--epsilon", type=float_list, default=None, help="one value, or one per probed Hopf delay")
    p.add_argument("--steps-per-delay", dest="steps_per_delay", type=int, default=None)
    p.add_argument("--n-cap", dest="n_cap", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)

    p = sub.add_parser("report", help="full reproduction manifest")
    _common(p)
    return parser


def read_config(path: Path) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    entries: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key.replace("-", "_")] = value
    return entries


def _converters(parser: argparse.ArgumentParser, command: str) -> Dict[str, object]:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return {a.dest: (a.type or str) for a in sub.choices[command]._actions if a.dest != "help"}


def resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    """Merge preset, config file and flags into a :class:`RunConfig`."""
    values = vars(args).copy()
    command = values.pop("command")
    file_values: Dict[str, object] = {}
    if values.get("config") is not None:
        converters = _converters(parser, command)
        for key, raw in read_config(values["config"]).items():
            if key not in converters or key in ("config",):
                raise ValueError(f"unknown config key {key!r} for command {command!r}")
            file_values[key] = converters[key](raw)
    for key, value in file_values.items():
        if values.get(key) is None:
            values[key] = value

    preset = values.pop("preset") or DEFAULT_PRESET[command]
    base = PRESETS[preset]
    overrides = {k: float(values.pop(k)) for k in PARAM_KEYS if values.get(k) is not None}
    for k in PARAM_KEYS:
        values.pop(k, None)
    params = base.replace(**overrides)

    out = values.pop("out") or Path("out") / command
    workers = values.pop("workers")
    if workers is None:
        workers = default_workers()
    values.pop("config", None)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return RunConfig(params=params, out=Path(out), workers=int(workers), options=values)


COMMANDS = {
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "simulate": cmd_simulate,
    "hopf-probe": cmd_hopf_probe,
    "report": cmd_report,
}


def _print_summary(command: str, summary: dict) -> None:
    d = summary.get("derived", {})
    if command == "report":
        for c in summary["checks"]:
            print(f"[{c['status']:>9}] {c['preset']:<21} {c['name']}: computed {c['computed']} expected {c['expected']}")
        print("counts:", summary["counts"])
        return
    if command in ("stability", "hopf-probe"):
        print(f"tau_bar = {d.get('tau_bar')}")
        print(f"I-interval = {d.get('script_i')}")
        print("J =", [(round(hp["tau_star"], 6), hp["crossing"]) for hp in d.get("J") or []])
    results = summary.get("results", {})
    if command == "stability":
        print("verdict:", results["verdict"])
    elif command == "equilibria":
        print("equilibria:", results.get("equilibria"))
    elif command == "simulate":
        for r in results["runs"]:
            print(f"tau = {r['tau']:g}: {r['kind']} (limit={r['limit']}, amplitude={r['amplitude']}, period={r['period']})")
    elif command == "hopf-probe":
        for r in results["probes"]:
            print(
                f"tau* = {r['tau_star']:.6g}: {r['direction']}, orbit stable={r['periodic_orbit_stable']}, "
                f"sqrt ratio={r['sqrt_ratio']} ({r['status']})"
            )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve(args, parser)
        summary = COMMANDS[args.command](config)
    except (ConvergenceError, FoldSingularityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BlowfliesError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _print_summary(args.command, summary)
    print(f"wrote {config.out}")
    if args.command == "report":
        return summary["exit_code"]
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
