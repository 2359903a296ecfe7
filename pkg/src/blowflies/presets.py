"""Named parameter sets and the published reference values they are checked against."""

from __future__ import annotations

from .model import ModelParams

#: Two equilibria for h < h_star ~ 1.03, one at the fold, none above.
TWO_EQUILIBRIA = ModelParams(p=2.0, mu=0.1, a=0.1, gamma=1.0, h=0.8, tau=1.0)

#: Delay-induced switching set, exactly as printed.
SWITCHING = ModelParams(p=15.0, mu=0.2, a=0.2, gamma=0.1, h=0.1, tau=4.0)

#: The switching set with h = 1.0. Only the product a*h matters for the
#: switching analysis, so this is the same as a = 2, h = 0.1; it is the
#: reading under which the published tau_bar, I-interval and Hopf delays
#: are reproduced (the printed set has no Hopf points at all).
SWITCHING_RECONCILED = SWITCHING.replace(h=1.0)

#: Harvest-free set with a Hopf pair, for the h = 0 direction check.
HARVEST_FREE = ModelParams(p=15.0, mu=0.2, a=0.2, gamma=0.2, h=0.0, tau=4.0)

PRESETS = {
    "two-equilibria": TWO_EQUILIBRIA,
    "switching": SWITCHING,
    "switching-reconciled": SWITCHING_RECONCILED,
    "harvest-free": HARVEST_FREE,
}

#: Published values with the tolerances used to compare against them.
PUBLISHED = {
    "h_star": (1.030116, 1e-4),
    "tau_limit": (24.0532, 1e-3),
    "tau_bar": (14.81, 0.05),
    "script_i_end": (13.5696, 0.01),
    "hopf_taus": ((4.53, 11.391), 0.02),
    "hopf_crossings": (1, -1),
}

#: Harvest levels with 2, 1 and 0 positive equilibria for TWO_EQUILIBRIA.
EQUILIBRIUM_COUNTS = ((0.8, 2), (1.030116, 1), (1.2, 0))

#: Delays of the four simulated panels and their expected verdicts.
PANELS = ((4.0, "converged"), (4.7, "periodic"), (11.0, "periodic"), (11.8, "converged"))

#: History c0 + c1 cos(2 pi t / tau) used for the panels.
PANEL_HISTORY = (10.0, 1.0)

#: The published value is quoted to 6 decimals, so "one equilibrium" at
#: h = 1.030116 is judged with half a unit in the last place.
PUBLISHED_FOLD_TOL = 5e-7

#: Probe offsets at the first and last Hopf delay.
PROBE_EPSILONS = (0.2, 0.3)
