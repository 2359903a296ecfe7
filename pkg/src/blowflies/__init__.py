"""Equilibria, stability switches and Hopf bifurcations of Nicholson's
blowflies equation with maturation delay and constant harvest."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BlowfliesError,
    ConvergenceError,
    DomainError,
    FoldSingularityError,
    InconclusiveProbeError,
    InfeasibleParametersError,
    NoEquilibriumError,
    NoWindowError,
)
from .special import lambert_w0  # noqa: E402
from .model import (  # noqa: E402
    EquilibriumSet,
    ModelParams,
    dmstar_dtau,
    equilibria,
    fold_point_m_bar,
    growth_g,
    h_star,
    m_star,
    tau_bar,
)
from .spectral import (  # noqa: E402
    HopfPoint,
    Interval,
    StabilityChart,
    char_delta,
    eigenvalue_track,
    hopf_points,
    i_of_tau,
    interval_script_i,
    omega_of_tau,
    s_n,
    stability_chart,
    theta_of_tau,
    unstable_root_m0,
)
from .dde import (  # noqa: E402
    Classification,
    History,
    HopfProbeResult,
    Trajectory,
    classify,
    first_interval_closed_form,
    hopf_probe,
    integrate,
    negativity_threshold,
)
