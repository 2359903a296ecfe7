"""File-emitting commands behind the command-line interface.

Each ``cmd_*`` takes a :class:`RunConfig`, writes CSV (authoritative),
SVG (convenience) and a ``summary.json`` into ``config.out`` and returns
the summary dict. Summaries share the top-level layout
``{command, params, derived, checks, results}``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from ._output import write_csv, write_json, write_text
from ._svg import line_chart
from .dde import (
    STEPS_PER_DELAY,
    T_END_DELAYS,
    History,
    HopfProbeResult,
    equilibrium_residual,
    hopf_probe,
    integrate,
    negativity_threshold,
)
from .errors import BlowfliesError, InconclusiveProbeError, NoEquilibriumError
from .model import ModelParams, equilibria, h_star, m_star, tau_bar
from .spectral import GRID_POINTS, N_CAP, HopfPoint, StabilityChart, i_of_tau, s_n, stability_chart


@dataclass
class RunConfig:
    params: ModelParams
    out: Path
    workers: int = 1
    options: Dict[str, Any] = field(default_factory=dict)

    def opt(self, key: str, default: Any) -> Any:
        value = self.options.get(key)
        return default if value is None else value


def default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))


def pmap(fn: Callable, items: Sequence, workers: int) -> list:
    """Order-preserving map over a bounded process pool (serial when ``workers <= 1``)."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _grid_size(value: int, name: str) -> int:
    value = int(value)
    if value < 2:
        raise ValueError(f"{name} must be at least 2, got {value}")
    return value


def hopf_record(hp: HopfPoint) -> dict:
    return {
        "tau_star": hp.tau_star,
        "omega_star": hp.omega_star,
        "n": hp.branch_n,
        "crossing": hp.crossing,
        "slope": hp.slope,
    }


def derived_summary(params: ModelParams, chart: Optional[StabilityChart] = None) -> dict:
    """Derived quantities shared by every summary; ``None`` where undefined."""
    P = params
    out: Dict[str, Any] = {
        "tau_limit": P.tau_limit if P.p > P.gamma else None,
        "h_star": None,
        "tau_bar": None,
        "script_i": None,
        "J": None,
        "windows": None,
    }
    if P.h1_satisfied():
        out["h_star"] = h_star(P)
    if chart is None:
        try:
            out["tau_bar"] = tau_bar(P)
        except BlowfliesError:
            pass
        return out
    out["tau_bar"] = chart.tau_bar
    out["script_i"] = None if chart.script_i is None else [chart.script_i.lo, chart.script_i.hi]
    out["J"] = [hopf_record(hp) for hp in chart.hopf_points]
    out["windows"] = [
        {"lo": w.lo, "hi": w.hi, "verdict": w.verdict, "unstable_pairs": w.unstable_pairs} for w in chart.windows
    ]
    return out


def chart_verdict(chart: StabilityChart) -> str:
    if chart.always_stable:
        return "stable for all tau < tau_bar"
    parts = [f"{w.verdict} on ({w.lo:.6g}, {w.hi:.6g})" for w in chart.windows]
    return "; ".join(parts)


def _summary(command: str, params: ModelParams, derived: dict, results: Any, checks: Optional[list] = None) -> dict:
    return {
        "command": command,
        "version": __version__,
        "params": params.as_dict(),
        "derived": derived,
        "checks": checks or [],
        "results": results,
    }


# -- equilibria ---------------------------------------------------------------


def equilibrium_row(params: ModelParams, axis: str, value: float) -> list:
    P = params.replace(h=value) if axis == "h" else params.with_tau(value)
    if not P.h1_satisfied():
        return [value, False, None, None, None, None]
    eq = equilibria(P)
    return [value, eq.exists, eq.m_low, eq.m_high, eq.m_bar, eq.h_star]


def cmd_equilibria(config: RunConfig) -> dict:
    """Growth-curve samples plus both equilibrium branches over an ``h`` or ``tau`` sweep."""
    P = config.params
    axis = config.opt("sweep", "h")
    if axis not in ("h", "tau"):
        raise ValueError(f"sweep must be 'h' or 'tau', got {axis!r}")
    points = _grid_size(config.opt("points", 241), "points")
    m_points = _grid_size(config.opt("m_points", 401), "m_points")

    sweep_max = config.options.get("sweep_max")
    if sweep_max is None:
        if axis == "h":
            sweep_max = 1.2 * h_star(P) if P.h1_satisfied() else 1.0
        else:
            try:
                sweep_max = tau_bar(P)
            except BlowfliesError:
                sweep_max = P.tau_limit
    sweep_max = float(sweep_max)
    if not sweep_max > 0:
        raise ValueError(f"sweep_max must be positive, got {sweep_max}")

    m_max = config.options.get("m_max")
    if m_max is None:
        m_max = 2.0 * (math.log(P.p / P.gamma) - P.mu * P.tau) / P.a if P.h1_satisfied() else 5.0 / P.a
    ms = np.linspace(0.0, float(m_max), m_points)
    g1 = P.p * P.survival * ms * np.exp(-P.a * ms)
    g2 = P.gamma * ms + P.h

    values = np.linspace(0.0, sweep_max, points)
    rows = pmap(partial(equilibrium_row, P, axis), [float(v) for v in values], config.workers)

    out = config.out
    files = [
        write_csv(out / "g_curves.csv", ["M", "g1", "g2", "g"], zip(ms, g1, g2, g1 - g2), P),
        write_csv(
            out / f"equilibria_{axis}.csv",
            [f"{axis}", "exists", "m_low", "m_high", "m_bar", "h_star"],
            rows,
            P,
            {"sweep": axis, "points": points, "fold_tol": 1e-8},
        ),
    ]
    write_text(
        out / "g_curves.svg",
        line_chart(
            [("birth g1(M)", ms, g1), ("loss g2(M)", ms, g2)],
            title=f"growth curves, h = {P.h:g}, tau = {P.tau:g}",
            xlabel="M",
            ylabel="rate",
        ),
    )
    nan = float("nan")
    col = lambda i: [nan if r[i] is None else r[i] for r in rows]  # noqa: E731
    write_text(
        out / f"equilibria_{axis}.svg",
        line_chart(
            [("M+ (upper)", col(0), col(3)), ("M0 (lower)", col(0), col(2))],
            title=f"equilibria versus {axis}",
            xlabel=axis,
            ylabel="M",
        ),
    )

    existing = [r for r in rows if r[1]]
    results = {
        "sweep": axis,
        "sweep_max": sweep_max,
        "points": points,
        "existing_points": len(existing),
        "files": [f.name for f in files] + ["g_curves.svg", f"equilibria_{axis}.svg"],
    }
    if P.h1_satisfied():
        eq = equilibria(P)
        results["equilibria"] = {"m_bar": eq.m_bar, "h_star": eq.h_star, "m_low": eq.m_low, "m_high": eq.m_high, "count": eq.count}
    summary = _summary("equilibria", P, derived_summary(P), results)
    write_json(out / "summary.json", summary)
    return summary


# -- stability ----------------------------------------------------------------


def cmd_stability(config: RunConfig) -> dict:
    """I(tau), the S_n family, the Hopf set and the stability windows."""
    P = config.params
    n_cap = int(config.opt("n_cap", N_CAP))
    grid = _grid_size(config.opt("grid", GRID_POINTS), "grid")
    points = _grid_size(config.opt("points", 400), "points")
    chart = stability_chart(P, n_cap=n_cap, grid_points=grid)
    tb = chart.tau_bar
    out = config.out
    solver = {"grid": grid, "n_cap": n_cap, "points": points}

    i_taus = np.linspace(0.0, tb, points + 1)[:-1]
    i_vals = [i_of_tau(float(t), P) for t in i_taus]
    write_csv(out / "i_curve.csv", ["tau", "I"], zip(i_taus, i_vals), P, solver)
    write_text(
        out / "i_curve.svg",
        line_chart([("I(tau)", i_taus, i_vals)], title="I(tau)", xlabel="tau", ylabel="I", hline=0.0),
    )

    s_columns: List[str] = []
    if chart.script_i is not None:
        lo, hi = chart.script_i
        s_taus = np.linspace(lo, hi, points + 1)[:-1]
        n_top = max([hp.branch_n for hp in chart.hopf_points], default=0) + 1
        s_vals = [[s_n(float(t), n, P) for t in s_taus] for n in range(n_top + 1)]
        s_columns = [f"S_{n}" for n in range(n_top + 1)]
        write_csv(out / "s_curves.csv", ["tau"] + s_columns, zip(s_taus, *s_vals), P, solver)
        floor = max(min(min(v) for v in s_vals), -2.0 * hi)
        write_text(
            out / "s_curves.svg",
            line_chart(
                [(name, s_taus, v) for name, v in zip(s_columns, s_vals)],
                title="switching functions S_n on the I-interval",
                xlabel="tau",
                ylabel="S_n",
                ylim=(floor, max(max(v) for v in s_vals)),
                hline=0.0,
                vlines=[hp.tau_star for hp in chart.hopf_points],
            ),
        )
    write_csv(
        out / "hopf_points.csv",
        ["index", "n", "tau_star", "omega_star", "crossing", "dS_dtau"],
        [[j, hp.branch_n, hp.tau_star, hp.omega_star, hp.crossing, hp.slope] for j, hp in enumerate(chart.hopf_points)],
        P,
        solver,
    )
    write_csv(
        out / "windows.csv",
        ["lo", "hi", "verdict", "unstable_pairs"],
        [[w.lo, w.hi, w.verdict, w.unstable_pairs] for w in chart.windows],
        P,
        solver,
    )
    results = {
        "verdict": chart_verdict(chart),
        "script_i_empty": chart.script_i is None,
        "s_columns": s_columns,
    }
    if chart.script_i is None:
        results["note"] = "I(tau) <= 0 for every tau: no purely imaginary roots"
    summary = _summary("stability", P, derived_summary(P, chart), results)
    write_json(out / "summary.json", summary)
    return summary


# -- simulate -----------------------------------------------------------------


def build_history(kind: str, params: ModelParams, c0: float, c1: float) -> History:
    if kind == "sinusoid":
        return History.sinusoid(c0, c1)
    if kind == "constant":
        return History.constant(c0)
    if kind == "threshold":
        return History.constant(negativity_threshold(params))
    raise ValueError(f"unknown history {kind!r}; use sinusoid, constant or threshold")


def simulate_one(params: ModelParams, history: str, c0: float, c1: float, t_end_delays: float, steps: int, stride: int) -> dict:
    hist = build_history(history, params, c0, c1)
    traj = integrate(params, hist, t_end_delays * params.tau, steps)
    c = traj.classification
    try:
        target = m_star(params) if params.h1_satisfied() else None
    except NoEquilibriumError:
        target = None
    return {
        "tau": params.tau,
        "history": {"kind": hist.kind, "c0": hist.c0, "c1": hist.c1},
        "kind": c.kind,
        "limit": c.limit,
        "amplitude": c.amplitude,
        "period": c.period,
        "first_negative_time": c.first_time,
        "m_star": target,
        "equilibrium_residual": equilibrium_residual(params, c.limit) if c.limit is not None else None,
        "diverged": traj.diverged,
        "t_end": float(traj.times[-1]),
        "times": traj.times[::stride].tolist(),
        "values": traj.values[::stride].tolist(),
    }


def cmd_simulate(config: RunConfig) -> dict:
    """Integrate the delay equation for one or several delays and classify each run."""
    P = config.params
    taus = config.opt("taus", None) or [P.tau]
    history = config.opt("history", "sinusoid")
    c0 = float(config.opt("c0", 10.0))
    c1 = float(config.opt("c1", 1.0 if history == "sinusoid" else 0.0))
    t_end_delays = float(config.opt("t_end_delays", T_END_DELAYS))
    steps = int(config.opt("steps_per_delay", STEPS_PER_DELAY))
    stride = max(1, int(config.opt("csv_stride", 8)))
    for t in taus:
        if not t > 0:
            raise ValueError(f"every simulated tau must be positive, got {t!r}")
    if steps < 64:
        raise ValueError(f"steps_per_delay must be >= 64, got {steps}")

    job = partial(simulate_one, history=history, c0=c0, c1=c1, t_end_delays=t_end_delays, steps=steps, stride=stride)
    runs = pmap(job, [P.with_tau(float(t)) for t in taus], config.workers)
    solver = {
        "method": "method-of-steps RK4 + cubic Hermite",
        "steps_per_delay": steps,
        "t_end_delays": t_end_delays,
        "history": history,
        "c0": c0,
        "c1": c1,
        "csv_stride": stride,
    }
    out = config.out
    for run in runs:
        tag = f"{run['tau']:g}"
        write_csv(out / f"trajectory_tau_{tag}.csv", ["t", "M"], zip(run["times"], run["values"]), P.with_tau(run["tau"]), solver)
        series = [("M(t)", run["times"], run["values"])]
        write_text(
            out / f"trajectory_tau_{tag}.svg",
            line_chart(series, title=f"tau = {tag}: {run['kind']}", xlabel="t", ylabel="M", hline=run["m_star"]),
        )
    results = {"solver": solver, "runs": [{k: v for k, v in r.items() if k not in ("times", "values")} for r in runs]}
    summary = _summary("simulate", P, derived_summary(P), results)
    write_json(out / "summary.json", summary)
    return summary


# -- hopf probe ---------------------------------------------------------------


def probe_one(params: ModelParams, hp: HopfPoint, epsilon: float, steps: int) -> dict:
    try:
        result: HopfProbeResult = hopf_probe(params, hp, epsilon, steps_per_delay=steps)
        status = "ok"
    except InconclusiveProbeError as exc:
        result = exc.result
        status = "inconclusive"
    return {
        "tau_star": result.tau_star,
        "crossing": result.crossing,
        "epsilon": result.epsilon,
        "direction": result.direction,
        "periodic_orbit_stable": result.periodic_orbit_stable,
        "amplitude_eps": result.amplitude_eps,
        "amplitude_2eps": result.amplitude_2eps,
        "sqrt_ratio": result.sqrt_ratio,
        "sqrt_law_ok": result.sqrt_law_ok,
        "t_end": result.t_end,
        "classifications": {k: v.kind for k, v in result.classifications.items()},
        "status": status,
    }


def cmd_hopf_probe(config: RunConfig) -> dict:
    """Simulate both sides of the first and last Hopf delay."""
    P = config.params
    steps = int(config.opt("steps_per_delay", STEPS_PER_DELAY))
    eps_list = list(config.opt("epsilon", [0.2, 0.3]))
    chart = stability_chart(P, n_cap=int(config.opt("n_cap", N_CAP)), grid_points=int(config.opt("grid", GRID_POINTS)))
    J = chart.hopf_points
    if not J:
        raise ValueError("no Hopf points for these parameters; nothing to probe")
    targets = [J[0]] if len(J) == 1 else [J[0], J[-1]]
    if len(eps_list) == 1:
        eps_list = eps_list * len(targets)
    for hp, eps in zip(targets, eps_list):
        if not eps > 0 or hp.tau_star - 2 * eps <= 0 or hp.tau_star + 2 * eps >= chart.tau_bar:
            raise ValueError(
                f"epsilon = {eps!r} too large at tau* = {hp.tau_star:.6g}: "
                f"tau* +- 2 epsilon must stay inside (0, {chart.tau_bar:.6g})"
            )

    jobs = [partial(probe_one, P, hp, eps, steps) for hp, eps in zip(targets, eps_list)]
    rows = pmap(_call, jobs, config.workers)
    for row, label in zip(rows, ("first", "last")):
        row["which"] = label
    header = [
        "which", "tau_star", "crossing", "epsilon", "direction", "periodic_orbit_stable",
        "amplitude_eps", "amplitude_2eps", "sqrt_ratio", "sqrt_law_ok", "t_end", "status",
    ]
    write_csv(
        config.out / "hopf_probe.csv",
        header,
        [[r[k] for k in header] for r in rows],
        P,
        {"steps_per_delay": steps, "perturbation": 0.01},
    )
    results = {"probes": rows, "inconclusive": sum(r["status"] != "ok" for r in rows)}
    summary = _summary("hopf-probe", P, derived_summary(P, chart), results)
    write_json(config.out / "summary.json", summary)
    return summary


def _call(fn: Callable[[], Any]) -> Any:
    return fn()
