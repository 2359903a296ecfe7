"""Linear stability of the equilibria and delay-induced stability switches.

Linearising about an equilibrium ``M`` gives the characteristic function

    Delta(lambda) = lambda + gamma - exp(-lambda tau) p exp(-mu tau) exp(-a M) (1 - a M)

whose coefficients depend on ``tau`` both explicitly and through
``M = M(tau)``. Purely imaginary roots ``i omega`` of the upper
equilibrium exist only where

    I(tau) = p exp(-mu tau) (a M - 1) exp(-a M) - gamma > 0,

and for such ``tau`` they occur exactly at the zeros of

    S_n(tau) = tau - (theta(tau) + 2 n pi) / omega(tau),   n = 0, 1, ...

The sign of ``dS_n/dtau`` at a zero gives the direction in which the root
pair crosses the imaginary axis.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ._roots import bisect
from .errors import ConvergenceError, DomainError, NoEquilibriumError
from .model import ModelParams, equilibria, m_star, tau_bar

#: Number of grid points used to bracket zeros of S_n.
GRID_POINTS = 2000
#: Default largest branch index n that is searched.
N_CAP = 32
#: |dS_n/dtau| below this at a zero is reported as a tangential (degenerate) crossing.
TANGENCY_TOL = 1e-6


class Interval(NamedTuple):
    """Half-open interval ``[lo, hi)``."""

    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __contains__(self, t: object) -> bool:
        return self.lo <= t < self.hi  # type: ignore[operator]


@dataclass(frozen=True)
class HopfPoint:
    """A zero of ``S_n``: critical delay, crossing frequency and direction.

    ``crossing`` is +1 when the root pair moves into the right half-plane
    as ``tau`` increases through ``tau_star`` and -1 when it leaves it.
    """

    tau_star: float
    omega_star: float
    branch_n: int
    crossing: int
    slope: float = 0.0


@dataclass(frozen=True)
class Window:
    lo: float
    hi: float
    verdict: str
    unstable_pairs: int = 0


@dataclass(frozen=True)
class StabilityChart:
    """Stability windows of the upper equilibrium over ``(0, tau_bar)``."""

    tau_bar: float
    script_i: Optional[Interval]
    hopf_points: List[HopfPoint] = field(default_factory=list)
    windows: List[Window] = field(default_factory=list)

    def verdict_at(self, tau: float) -> str:
        for w in self.windows:
            if w.lo <= tau < w.hi:
                return w.verdict
        raise DomainError(f"tau = {tau!r} outside (0, {self.tau_bar!r})")

    @property
    def always_stable(self) -> bool:
        return all(w.verdict == "stable" for w in self.windows)


def _feedback(M: float, params: ModelParams) -> float:
    # delayed-feedback coefficient p e^{-mu tau} e^{-a M} (1 - a M)
    return params.p * params.survival * math.exp(-params.a * M) * (1.0 - params.a * M)


def char_delta(lam: complex, M: float, params: ModelParams) -> complex:
    """Characteristic function ``Delta(lambda)`` at equilibrium ``M``."""
    return lam + params.gamma - cmath.exp(-lam * params.tau) * _feedback(M, params)


def unstable_root_m0(params: ModelParams) -> float:
    """Positive real root of ``Delta`` at the lower equilibrium.

    ``Delta`` is real on the real axis with ``Delta(0) < 0`` and
    ``Delta(gamma + p e^{-mu tau}) > 0``, so bisection on that bracket
    finds a root, which proves the lower equilibrium unstable.

    Raises
    ------
    NoEquilibriumError
        If the lower equilibrium does not exist (``h >= h_star``).
    """
    eq = equilibria(params)
    if eq.m_low is None or eq.near_fold:
        raise NoEquilibriumError(f"no lower equilibrium for h = {params.h!r} (h_star = {eq.h_star!r})")
    K = _feedback(eq.m_low, params)
    tau = params.tau
    gamma = params.gamma

    def delta(lam: float) -> float:
        return lam + gamma - math.exp(-lam * tau) * K

    upper = gamma + params.p * params.survival
    lam = bisect(delta, 0.0, upper, xtol=0.0)
    # bisection leaves one ulp of slack; a Newton step recovers the last digits
    d = 1.0 + tau * K * math.exp(-lam * tau)
    refined = lam - delta(lam) / d
    if abs(delta(refined)) < abs(delta(lam)):
        lam = refined
    return lam


def i_of_tau(tau: float, params: ModelParams) -> float:
    """``I(tau) = p e^{-mu tau} (a M+ - 1) e^{-a M+} - gamma`` with ``M+ = M+(tau)``."""
    P = params.with_tau(tau)
    M = m_star(P)
    return -_feedback(M, P) - P.gamma


def interval_script_i(params: ModelParams) -> Optional[Interval]:
    """The delays ``[0, tau_max)`` on which ``I > 0``, or ``None`` if empty.

    ``I`` decreases in ``tau``, so the right endpoint is the unique zero of
    ``I`` on ``[0, tau_bar)``, found by bisection.
    """
    tb = tau_bar(params)
    if tb <= 0.0 or i_of_tau(0.0, params) <= 0.0:
        return None
    hi = tb * (1.0 - 1e-9)
    if i_of_tau(hi, params) > 0.0:
        return Interval(0.0, tb)
    return Interval(0.0, bisect(lambda t: i_of_tau(t, params), 0.0, hi, xtol=1e-13 * tb))


def _switch_quantities(tau: float, params: ModelParams) -> Tuple[float, float]:
    """``(omega, theta)`` at ``tau``; raises ``DomainError`` where ``I(tau) <= 0``."""
    P = params.with_tau(tau)
    try:
        M = m_star(P)
    except NoEquilibriumError as exc:
        raise DomainError(str(exc)) from exc
    B = -_feedback(M, P)
    if B - P.gamma <= 0.0:
        raise DomainError(f"I({tau!r}) = {B - P.gamma!r} <= 0: no crossing frequency")
    omega = math.sqrt((B - P.gamma) * (B + P.gamma))
    theta = math.atan2(omega / B, -P.gamma / B)
    return omega, theta


def omega_of_tau(tau: float, params: ModelParams) -> float:
    """Positive zero of ``F(omega) = omega^2 + gamma^2 - B^2``, ``B = I(tau) + gamma``."""
    return _switch_quantities(tau, params)[0]


def theta_of_tau(tau: float, params: ModelParams) -> float:
    """Phase ``theta`` in ``(pi/2, pi)`` with ``cos = gamma/B'`` and ``sin = -omega/B'``."""
    return _switch_quantities(tau, params)[1]


def s_n(tau: float, n: int, params: ModelParams) -> float:
    """Switching function ``S_n(tau) = tau - (theta + 2 n pi) / omega``."""
    if n < 0:
        raise ValueError(f"branch index must be non-negative, got {n!r}")
    omega, theta = _switch_quantities(tau, params)
    return tau - (theta + 2.0 * n * math.pi) / omega


def _sample_grid(interval: Interval, points: int) -> np.ndarray:
    # the right end of the interval is excluded (omega -> 0 there)
    return np.linspace(interval.lo, interval.hi, points + 1)[:-1]


def hopf_points(
    params: ModelParams,
    n_cap: int = N_CAP,
    grid_points: int = GRID_POINTS,
    script_i: Optional[Interval] = None,
) -> List[HopfPoint]:
    """All zeros of ``S_0, S_1, ...`` on the interval where ``I > 0``.

    Each ``S_n`` is sampled on ``grid_points`` uniform points, sign changes
    are bisected to ``1e-12``, and the crossing direction is the sign of
    a central difference of ``S_n`` with step ``1e-6 * |I-interval|``.
    The scan stops at the first ``n`` whose samples are all negative
    (``S_n > S_{n+1}`` pointwise), or at ``n_cap``.

    Returns
    -------
    list of HopfPoint
        Sorted by ``tau_star``; empty when the interval is empty.

    Warns
    -----
    RuntimeWarning
        When ``|dS_n/dtau| < 1e-6`` at a zero (tangential crossing).
    """
    if script_i is None:
        script_i = interval_script_i(params)
    if script_i is None or script_i.length <= 0.0:
        return []
    taus = _sample_grid(script_i, grid_points)
    quantities = np.array([_switch_quantities(t, params) for t in taus])
    omega, theta = quantities[:, 0], quantities[:, 1]
    fd_step = 1e-6 * script_i.length

    found: List[HopfPoint] = []
    for n in range(n_cap + 1):
        values = taus - (theta + 2.0 * n * math.pi) / omega
        if np.all(values < 0.0):
            break
        s = lambda t, n=n: s_n(t, n, params)  # noqa: E731
        for i in np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:])):
            root = bisect(s, float(taus[i]), float(taus[i + 1]), xtol=1e-12 * max(1.0, float(taus[i + 1])))
            lo = max(script_i.lo, root - fd_step)
            hi = min(root + fd_step, script_i.hi * (1.0 - 1e-12))
            slope = (s(hi) - s(lo)) / (hi - lo)
            if abs(slope) < TANGENCY_TOL:
                warnings.warn(
                    f"S_{n} has a near-tangential zero at tau = {root:.10g} (dS/dtau = {slope:.3g})",
                    RuntimeWarning,
                    stacklevel=2,
                )
            found.append(
                HopfPoint(
                    tau_star=root,
                    omega_star=omega_of_tau(root, params),
                    branch_n=n,
                    crossing=1 if slope > 0 else -1,
                    slope=slope,
                )
            )
    found.sort(key=lambda hp: hp.tau_star)
    return found


def stability_chart(params: ModelParams, n_cap: int = N_CAP, grid_points: int = GRID_POINTS) -> StabilityChart:
    """Partition ``(0, tau_bar)`` into stable and unstable windows.

    The equilibrium is stable at ``tau = 0``; every Hopf point adds its
    ``crossing`` to the number of root pairs in the right half-plane, and a
    window is stable exactly when that count is zero.
    """
    tb = tau_bar(params)
    script_i = interval_script_i(params)
    points = hopf_points(params, n_cap=n_cap, grid_points=grid_points, script_i=script_i)

    windows: List[Window] = []
    lo, pairs = 0.0, 0
    for hp in points:
        windows.append(Window(lo, hp.tau_star, "stable" if pairs <= 0 else "unstable", max(pairs, 0)))
        lo = hp.tau_star
        pairs += hp.crossing
    windows.append(Window(lo, tb, "stable" if pairs <= 0 else "unstable", max(pairs, 0)))
    return StabilityChart(tau_bar=tb, script_i=script_i, hopf_points=points, windows=windows)


def _newton_root(lam: complex, params: ModelParams, M: float, tol: float = 1e-13, maxiter: int = 50) -> complex:
    K = _feedback(M, params)
    tau = params.tau
    for _ in range(maxiter):
        e = cmath.exp(-lam * tau)
        f = lam + params.gamma - e * K
        step = f / (1.0 + tau * K * e)
        lam -= step
        if abs(step) <= tol * max(1.0, abs(lam)):
            return lam
    raise ConvergenceError(f"complex Newton did not converge at tau = {tau!r} (last iterate {lam!r})")


def eigenvalue_track(
    params: ModelParams,
    hopf: HopfPoint,
    offsets: Sequence[float],
    max_step: float = 0.01,
) -> List[Tuple[float, complex]]:
    """Follow the critical root of ``Delta`` away from ``i omega*``.

    Starting from ``lambda = i omega*`` at ``tau*``, the root is continued
    in ``tau`` by complex Newton iteration in sub-steps of at most
    ``max_step`` until ``tau* + offset`` is reached, separately for each
    offset.

    Returns
    -------
    list of (tau, lambda)
        One entry per offset, in the order given.

    Raises
    ------
    ConvergenceError
        Names the offset at which Newton iteration failed.
    """
    track: List[Tuple[float, complex]] = []
    seed_params = params.with_tau(hopf.tau_star)
    seed = _newton_root(complex(0.0, hopf.omega_star), seed_params, m_star(seed_params))
    for offset in offsets:
        target = hopf.tau_star + offset
        n_sub = max(1, int(math.ceil(abs(offset) / max_step)))
        lam = seed
        try:
            for k in range(1, n_sub + 1):
                P = params.with_tau(hopf.tau_star + offset * k / n_sub)
                lam = _newton_root(lam, P, m_star(P))
        except (ConvergenceError, NoEquilibriumError) as exc:
            raise ConvergenceError(f"eigenvalue continuation failed at offset {offset!r}: {exc}") from exc
        track.append((target, lam))
    return track
