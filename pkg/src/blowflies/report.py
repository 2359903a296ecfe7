"""Reproduction manifest: run every command on the named parameter sets and
compare the results with the published reference values."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, List, Optional

from ._output import write_json
from .commands import RunConfig, cmd_equilibria, cmd_hopf_probe, cmd_simulate, cmd_stability
from .model import equilibria
from .presets import (
    EQUILIBRIUM_COUNTS,
    PANEL_HISTORY,
    PANELS,
    PROBE_EPSILONS,
    PUBLISHED,
    PUBLISHED_FOLD_TOL,
    SWITCHING,
    SWITCHING_RECONCILED,
    TWO_EQUILIBRIA,
)

RECONCILE_NOTE = (
    "not reproducible with the printed h = 0.1 (a h = 0.02); reproduced with a h = 0.2, "
    "see the switching-reconciled checks"
)


@dataclass
class Check:
    name: str
    preset: str
    source: str  # "published" or "derived"
    expected: Any
    computed: Any
    tolerance: Optional[float]
    status: str  # "pass", "fail" or "deviation"
    note: str = ""


def _close(computed: Optional[float], expected: float, tol: float) -> bool:
    return computed is not None and math.isfinite(computed) and abs(computed - expected) <= tol


def _value_check(name: str, preset: str, expected: float, tol: float, computed: Optional[float], note: str = "") -> Check:
    ok = _close(computed, expected, tol)
    return Check(name, preset, "published", expected, computed, tol, "pass" if ok else "fail", "" if ok else note)


def _switching_checks(preset: str, stab: dict, sims: dict, probes: Optional[dict]) -> List[Check]:
    d = stab["derived"]
    note = RECONCILE_NOTE if preset == "switching" else ""
    checks = [
        Check(
            "tau_limit = ln(p/gamma)/mu",
            preset,
            "published",
            PUBLISHED["tau_limit"][0],
            d["tau_limit"],
            PUBLISHED["tau_limit"][1],
            "deviation",
            "printed 24.0532 is inconsistent with the printed p, gamma, mu; the computed value is reported",
        ),
        _value_check("tau_bar", preset, *PUBLISHED["tau_bar"], d["tau_bar"], note),
        _value_check(
            "I-interval right end", preset, *PUBLISHED["script_i_end"], d["script_i"][1] if d["script_i"] else None, note
        ),
    ]
    taus, tol = PUBLISHED["hopf_taus"]
    J = d["J"] or []
    got = [hp["tau_star"] for hp in J]
    ok = len(got) == len(taus) and all(abs(g - e) <= tol for g, e in zip(got, taus))
    ok = ok and tuple(hp["crossing"] for hp in J) == PUBLISHED["hopf_crossings"]
    checks.append(
        Check(
            "Hopf set J with crossings",
            preset,
            "published",
            {"tau": list(taus), "crossing": list(PUBLISHED["hopf_crossings"])},
            {"tau": got, "crossing": [hp["crossing"] for hp in J]},
            tol,
            "pass" if ok else "fail",
            "" if ok else note,
        )
    )
    for run, (tau, expected) in zip(sims["results"]["runs"], PANELS):
        ok = run["kind"] == expected
        if ok and expected == "converged":
            ok = run["m_star"] is not None and abs(run["limit"] - run["m_star"]) < 1e-3
        checks.append(
            Check(f"simulation at tau = {tau:g}", preset, "published", expected, run["kind"], None,
                  "pass" if ok else "fail", "" if ok else note)
        )
    if probes is None:
        checks.append(Check("Hopf directions", preset, "published", ["forward", "backward"], None, None, "fail",
                            "no Hopf points to probe; " + note))
    else:
        rows = probes["results"]["probes"]
        got = [(r["direction"], r["periodic_orbit_stable"]) for r in rows]
        ok = got == [("forward", True), ("backward", True)]
        checks.append(Check("Hopf directions and orbit stability", preset, "published",
                            [["forward", True], ["backward", True]], [list(g) for g in got], None,
                            "pass" if ok else "fail", "" if ok else note))
        first = rows[0]
        checks.append(Check("square-root amplitude law at the first Hopf delay", preset, "derived",
                            math.sqrt(2.0), first["sqrt_ratio"], 1.8,
                            "pass" if first["sqrt_law_ok"] else "fail"))
    return checks


def cmd_report(config: RunConfig) -> dict:
    """Run all commands on the named sets and write ``manifest.json``.

    ``config.params`` is not used; the named sets are fixed. Returns the
    manifest; ``manifest["exit_code"]`` is 1 when any published-value check
    fails.
    """
    out = config.out
    workers = config.workers
    checks: List[Check] = []
    params = {}
    derived = {}

    base = TWO_EQUILIBRIA
    eq_summary = cmd_equilibria(RunConfig(base, out / "two-equilibria" / "equilibria", workers, {"sweep_max": 1.2}))
    params["two-equilibria"] = base.as_dict()
    derived["two-equilibria"] = eq_summary["derived"]
    hs = eq_summary["derived"]["h_star"]
    checks.append(_value_check("critical harvest h_star", "two-equilibria", *PUBLISHED["h_star"], hs))
    for h, expected in EQUILIBRIUM_COUNTS:
        count = equilibria(base.replace(h=h), fold_tol=PUBLISHED_FOLD_TOL).count
        checks.append(Check(f"equilibrium count at h = {h:g}", "two-equilibria", "published", expected, count,
                            PUBLISHED_FOLD_TOL, "pass" if count == expected else "fail"))

    for name, P in (("switching", SWITCHING), ("switching-reconciled", SWITCHING_RECONCILED)):
        root = out / name
        params[name] = P.as_dict()
        cmd_equilibria(RunConfig(P, root / "equilibria", workers, {"sweep": "tau"}))
        stab = cmd_stability(RunConfig(P, root / "stability", workers))
        derived[name] = stab["derived"]
        sims = cmd_simulate(
            RunConfig(P, root / "simulate", workers,
                      {"taus": [t for t, _ in PANELS], "history": "sinusoid",
                       "c0": PANEL_HISTORY[0], "c1": PANEL_HISTORY[1]})
        )
        probes = None
        if stab["derived"]["J"]:
            probes = cmd_hopf_probe(RunConfig(P, root / "hopf-probe", workers, {"epsilon": list(PROBE_EPSILONS)}))
        checks.extend(_switching_checks(name, stab, sims, probes))

    failed = [c for c in checks if c.source == "published" and c.status == "fail"]
    manifest = {
        "command": "report",
        "params": params,
        "derived": derived,
        "checks": [asdict(c) for c in checks],
        "counts": {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "deviation")},
        "exit_code": 1 if failed else 0,
    }
    write_json(out / "manifest.json", manifest)
    return manifest
