"""Method-of-steps integration of the harvested blowflies equation.

On every delay interval ``[k tau, (k+1) tau]`` the delayed birth term is a
known function of time (the previous interval's dense output, or the
history on the first interval), so the equation reduces to the linear ODE

    M'(t) = b(t) - gamma M(t) - h.

It is advanced with classical RK4 at a fixed step ``tau / steps_per_delay``
so that the lagged abscissae ``t - tau`` fall on grid points and step
midpoints; midpoint values come from the per-step cubic Hermite
interpolant. Because the RK4 update is affine in ``M``, a whole interval
is one first-order linear recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks, lfilter

from .errors import InconclusiveProbeError, NoEquilibriumError
from .model import ModelParams, growth_g, m_star, tau_bar
from .spectral import HopfPoint, eigenvalue_track

STEPS_PER_DELAY = 256
T_END_DELAYS = 400
TRANSIENT_FRACTION = 0.6
TOL_CONVERGE = 1e-3
TOL_OSCILLATE = 0.05
PERIOD_SPREAD = 0.02
AMPLITUDE_DRIFT = 0.1
MIN_DELAYS = 40


@dataclass(frozen=True)
class History:
    """Initial function on ``[-tau, 0]``.

    Use the constructors :meth:`constant`, :meth:`sinusoid` (``c0 + c1
    cos(2 pi t / tau)``) and :meth:`tabulated`.
    """

    kind: str
    c0: float = 0.0
    c1: float = 0.0
    times: Optional[tuple] = None
    values: Optional[tuple] = None

    @classmethod
    def constant(cls, c0: float) -> "History":
        return cls("constant", c0=float(c0))

    @classmethod
    def sinusoid(cls, c0: float, c1: float) -> "History":
        return cls("sinusoid", c0=float(c0), c1=float(c1))

    @classmethod
    def tabulated(cls, times, values) -> "History":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("tabulated history needs two equal-length 1-D arrays with at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("tabulated history times must be strictly increasing")
        return cls("tabulated", times=tuple(t), values=tuple(v))

    def __call__(self, t, tau: float):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.c0)
        if self.kind == "sinusoid":
            return self.c0 + self.c1 * np.cos(2.0 * np.pi * t / tau)
        if self.kind == "tabulated":
            ts = np.asarray(self.times)
            if ts[0] > -tau + 1e-12 * tau or ts[-1] < -1e-12 * tau:
                raise ValueError(f"tabulated history must cover [-{tau}, 0], got [{ts[0]}, {ts[-1]}]")
            vs = np.asarray(self.values)
            if ts.size >= 4:
                return CubicSpline(ts, vs)(t)
            return np.interp(t, ts, vs)
        raise ValueError(f"unknown history kind {self.kind!r}")


@dataclass(frozen=True)
class Classification:
    """Asymptotic verdict for a trajectory.

    ``kind`` is one of ``converged``, ``periodic``, ``negative`` or
    ``undetermined``; the other fields are filled in as relevant.
    """

    kind: str
    limit: Optional[float] = None
    amplitude: Optional[float] = None
    period: Optional[float] = None
    first_time: Optional[float] = None


@dataclass
class Trajectory:
    """Grid solution with per-step cubic Hermite dense output."""

    params: ModelParams
    times: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    steps_per_delay: int
    classification: Classification = field(default_factory=lambda: Classification("undetermined"))
    diverged: bool = False

    @property
    def dt(self) -> float:
        return self.params.tau / self.steps_per_delay

    def __call__(self, t):
        """Evaluate the dense output at ``t`` (scalar or array) in ``[0, t_end]``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.times[-1] * (1 + 1e-12)):
            raise ValueError(f"dense output covers [0, {self.times[-1]}]")
        dt = self.dt
        k = np.clip(np.floor(t / dt).astype(int), 0, self.times.size - 2)
        s = (t - self.times[k]) / dt
        return _hermite(self.values[k], self.values[k + 1], self.derivs[k], self.derivs[k + 1], s, dt)


def _hermite(y0, y1, f0, f1, s, dt):
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * dt * f0 + h01 * y1 + h11 * dt * f1


def _rk4_interval(y0: float, b0, bm, b1, gamma: float, h: float, dt: float) -> np.ndarray:
    """RK4 for ``y' = b(t) - gamma y - h`` over consecutive steps; returns ``y_1 .. y_n``."""
    # RK4 is affine in y: y_{j+1} = r y_j + d_j
    z = gamma * dt
    r = 1.0 - z + z * z / 2.0 - z**3 / 6.0 + z**4 / 24.0
    k1 = b0 - h
    k2 = bm - h - gamma * (dt / 2.0) * k1
    k3 = bm - h - gamma * (dt / 2.0) * k2
    k4 = b1 - h - gamma * dt * k3
    d = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out, _ = lfilter([1.0], [1.0, -r], d, zi=[r * y0])
    return out


def integrate(
    params: ModelParams,
    history: History,
    t_end: float,
    steps_per_delay: int = STEPS_PER_DELAY,
    classify_result: bool = True,
) -> Trajectory:
    """Solve the delay equation on ``[0, t_end]`` by the method of steps.

    Parameters
    ----------
    params : ModelParams
        ``params.tau`` must be positive.
    history : History
        Initial function on ``[-tau, 0]``.
    t_end : float
        Final time; rounded up to a whole number of steps.
    steps_per_delay : int
        RK4 steps per delay interval, at least 64.
    classify_result : bool
        Attach :func:`classify` output (against the upper equilibrium, when
        it exists) if the run spans at least 40 delays.

    Notes
    -----
    Integration continues through negative values. If the solution
    overflows (it runs off to minus infinity once the delayed value is
    negative and harvest is present), the trajectory is cut at the last
    finite sample and flagged ``diverged``.
    """
    P = params
    if steps_per_delay < 64:
        raise ValueError(f"steps_per_delay must be >= 64, got {steps_per_delay!r}")
    if not P.tau > 0:
        raise ValueError("tau must be positive; the delay-free equation is not handled here")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")

    N = int(steps_per_delay)
    tau = P.tau
    dt = tau / N
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    n_intervals = int(math.ceil(n_steps / N))
    c = P.p * P.survival
    a, gamma, h = P.a, P.gamma, P.h

    def birth(m):
        return c * m * np.exp(-a * m)

    grid = np.arange(N + 1) * dt
    values = np.empty(n_intervals * N + 1)
    derivs = np.empty_like(values)
    diverged = False
    last = n_intervals * N

    # delayed birth term on the current interval: grid points and step midpoints
    b_grid = birth(history(grid - tau, tau))
    b_mid = birth(history(grid[:-1] + dt / 2.0 - tau, tau))
    values[0] = float(history(np.array(0.0), tau))

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_intervals):
            i0 = k * N
            seg = _rk4_interval(values[i0], b_grid[:-1], b_mid, b_grid[1:], gamma, h, dt)
            values[i0 + 1 : i0 + N + 1] = seg
            derivs[i0 : i0 + N + 1] = b_grid - gamma * values[i0 : i0 + N + 1] - h
            y = values[i0 : i0 + N + 1]
            f = derivs[i0 : i0 + N + 1]
            if not np.all(np.isfinite(y)) or not np.all(np.isfinite(f)):
                bad = np.flatnonzero(~(np.isfinite(y) & np.isfinite(f)))[0]
                last = i0 + max(bad - 1, 0)
                diverged = True
                break
            mid = 0.5 * (y[:-1] + y[1:]) + dt * (f[:-1] - f[1:]) / 8.0
            b_grid = birth(y)
            b_mid = birth(mid)

    if not diverged:
        last = n_steps
    times = np.arange(last + 1) * dt
    traj = Trajectory(P, times, values[: last + 1].copy(), derivs[: last + 1].copy(), N, diverged=diverged)
    if diverged and last < 1:
        traj.classification = Classification("negative", first_time=0.0)
        return traj
    if classify_result:
        try:
            ref = m_star(P) if P.h1_satisfied() else None
        except NoEquilibriumError:
            ref = None
        if traj.times[-1] >= MIN_DELAYS * tau * (1 - 1e-12) or np.any(traj.values < 0):
            traj.classification = classify(traj, ref)
    return traj


def first_interval_closed_form(params: ModelParams, phi0: float, t: float) -> float:
    """Exact solution on ``[0, tau]`` for the constant history ``phi0``.

    ``e^{-gamma t} [phi0 + (p e^{-mu tau} phi0 e^{-a phi0} - h)(e^{gamma t} - 1)/gamma]``
    """
    P = params
    if not (0.0 <= t <= P.tau):
        raise ValueError(f"t must lie in [0, tau] = [0, {P.tau}], got {t!r}")
    forcing = P.p * P.survival * phi0 * math.exp(-P.a * phi0) - P.h
    return math.exp(-P.gamma * t) * (phi0 + forcing * math.expm1(P.gamma * t) / P.gamma)


def negativity_threshold(params: ModelParams) -> float:
    """Largest constant history that is guaranteed to make ``M(tau) < 0``.

    ``h (e^{gamma tau} - 1) / (gamma + p (e^{gamma tau} - 1))``; it comes from
    bounding the birth term by ``p phi0``.
    """
    P = params
    em1 = math.expm1(P.gamma * P.tau)
    return P.h * em1 / (P.gamma + P.p * em1)


def _peak_to_peak(x: np.ndarray) -> float:
    return float(x.max() - x.min()) if x.size else 0.0


def classify(
    traj: Trajectory,
    m_star: Optional[float],
    transient_fraction: float = TRANSIENT_FRACTION,
    tol_converge: float = TOL_CONVERGE,
    tol_oscillate: float = TOL_OSCILLATE,
    period_spread: float = PERIOD_SPREAD,
    amplitude_drift: float = AMPLITUDE_DRIFT,
) -> Classification:
    """Classify the long-time behaviour of ``traj``.

    In order: any negative sample gives ``negative`` (with the first
    such time); otherwise, on the tail left after discarding
    ``transient_fraction`` of the run, a maximum deviation from ``m_star``
    (or from the last value, if ``m_star`` is None) below ``tol_converge``
    gives ``converged``; a peak-to-peak swing above ``tol_oscillate`` with
    peak spacings within ``period_spread`` of their mean and a swing that
    changes by less than ``amplitude_drift`` between the two halves of the
    tail gives ``periodic``. Anything else is ``undetermined``.

    Raises
    ------
    ValueError
        If a non-negative trajectory spans fewer than 40 delays.
    """
    values = traj.values
    negative = np.flatnonzero(values < 0)
    if negative.size:
        return Classification("negative", first_time=float(traj.times[negative[0]]))
    if traj.times[-1] < MIN_DELAYS * traj.params.tau * (1 - 1e-12):
        raise ValueError(f"trajectory spans {traj.times[-1] / traj.params.tau:.1f} delays; need >= {MIN_DELAYS}")

    start = int(transient_fraction * values.size)
    tail = values[start:]
    ref = m_star if m_star is not None else float(tail[-1])
    if np.max(np.abs(tail - ref)) < tol_converge:
        return Classification("converged", limit=float(tail[-1]), amplitude=_peak_to_peak(tail) / 2.0)

    swing = _peak_to_peak(tail)
    if swing > tol_oscillate:
        peaks, _ = find_peaks(tail, prominence=tol_oscillate / 2.0)
        if peaks.size >= 4:
            spacing = np.diff(traj.times[start + peaks])
            mean = float(spacing.mean())
            half = tail.size // 2
            drift = abs(_peak_to_peak(tail[half:]) - _peak_to_peak(tail[:half])) / swing
            if np.max(np.abs(spacing - mean)) <= period_spread * mean and drift <= amplitude_drift:
                return Classification("periodic", amplitude=swing / 2.0, period=mean)
    return Classification("undetermined", amplitude=swing / 2.0)


@dataclass(frozen=True)
class HopfProbeResult:
    """Outcome of simulating both sides of a Hopf point."""

    tau_star: float
    crossing: int
    epsilon: float
    direction: str
    periodic_orbit_stable: bool
    classifications: dict
    amplitude_eps: Optional[float] = None
    amplitude_2eps: Optional[float] = None
    sqrt_ratio: Optional[float] = None
    sqrt_law_ok: bool = False
    t_end: float = 0.0


def _quarter_amplitudes(traj: Trajectory) -> tuple:
    n = traj.values.size
    q = n // 4
    return _peak_to_peak(traj.values[2 * q : 3 * q]) / 2.0, _peak_to_peak(traj.values[3 * q :]) / 2.0


def hopf_probe(
    params: ModelParams,
    hopf: HopfPoint,
    epsilon: float,
    steps_per_delay: int = STEPS_PER_DELAY,
    perturbation: float = 1e-2,
    horizon_factor: float = 30.0,
) -> HopfProbeResult:
    """Decide direction and orbit stability of a Hopf point by simulation.

    Runs from the constant history ``M+(tau) (1 + perturbation)`` at
    ``tau* - epsilon`` and ``tau* + epsilon`` (plus ``tau* +- 2 epsilon`` on
    the oscillating side for the square-root amplitude law). The horizon
    is ``max(400 tau, horizon_factor / |Re lambda|)``, where ``lambda`` is
    the critical characteristic root at ``tau* +- epsilon``, so that the
    linear transient has died out in the classified tail.

    The bifurcation is ``forward`` if only the ``+epsilon`` run oscillates
    and ``backward`` if only the ``-epsilon`` run does. The orbit counts as
    stable when the last-quarter amplitude is within 5% of the
    preceding quarter; the square-root law holds when
    ``A(2 eps) / A(eps)`` is within a factor 1.8 of ``sqrt(2)``.

    Raises
    ------
    ValueError
        If ``tau* - 2 epsilon <= 0`` or ``tau* + 2 epsilon >= tau_bar``.
    InconclusiveProbeError
        If both sides classify identically; the partial result is attached
        as ``.result``.
    """
    P = params
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    tb = tau_bar(P)
    lo, hi = hopf.tau_star - 2 * epsilon, hopf.tau_star + 2 * epsilon
    if lo <= 0.0 or hi >= tb:
        raise ValueError(
            f"tau* +- 2 epsilon = [{lo:.6g}, {hi:.6g}] must stay inside (0, tau_bar = {tb:.6g})"
        )

    roots = eigenvalue_track(P, hopf, [-epsilon, epsilon])
    rate = min(abs(lam.real) for _, lam in roots)
    t_scale = horizon_factor / rate if rate > 0 else math.inf

    def run(tau: float) -> Trajectory:
        Q = P.with_tau(tau)
        t_end = max(T_END_DELAYS * tau, t_scale)
        return integrate(Q, History.constant(m_star(Q) * (1.0 + perturbation)), t_end, steps_per_delay)

    minus = run(hopf.tau_star - epsilon)
    plus = run(hopf.tau_star + epsilon)
    classes = {"-eps": minus.classification, "+eps": plus.classification}
    osc_minus = minus.classification.kind == "periodic"
    osc_plus = plus.classification.kind == "periodic"
    t_end = float(max(minus.times[-1], plus.times[-1]))

    if osc_plus == osc_minus:
        result = HopfProbeResult(hopf.tau_star, hopf.crossing, epsilon, "inconclusive", False, classes, t_end=t_end)
        err = InconclusiveProbeError(
            f"both sides of tau* = {hopf.tau_star:.6g} classify as "
            f"{minus.classification.kind!r}/{plus.classification.kind!r}"
        )
        err.result = result
        raise err

    side = 1 if osc_plus else -1
    near = plus if osc_plus else minus
    far = run(hopf.tau_star + 2 * side * epsilon)
    classes["2eps"] = far.classification
    prev_q, last_q = _quarter_amplitudes(near)
    stable = prev_q > 0 and abs(last_q - prev_q) <= 0.05 * prev_q
    a1 = near.classification.amplitude
    a2 = far.classification.amplitude if far.classification.kind == "periodic" else None
    ratio = a2 / a1 if (a1 and a2) else None
    sqrt_ok = ratio is not None and math.sqrt(2.0) / 1.8 <= ratio <= math.sqrt(2.0) * 1.8
    return HopfProbeResult(
        tau_star=hopf.tau_star,
        crossing=hopf.crossing,
        epsilon=epsilon,
        direction="forward" if osc_plus else "backward",
        periodic_orbit_stable=bool(stable),
        classifications=classes,
        amplitude_eps=a1,
        amplitude_2eps=a2,
        sqrt_ratio=ratio,
        sqrt_law_ok=bool(sqrt_ok),
        t_end=t_end,
    )


def equilibrium_residual(params: ModelParams, value: float) -> float:
    """``|g(value)|``: how far a limit value is from being an equilibrium."""
    return abs(growth_g(value, params))
