"""Algebraic structure of the harvested stage-structured blowflies equation.

The mature population obeys

    M'(t) = p M(t - tau) exp(-a M(t - tau)) exp(-mu tau) - gamma M(t) - h

and its equilibria are the zeros of the growth function

    g(M) = p exp(-mu tau) M exp(-a M) - gamma M - h.

``g`` is concave-then-convex with a single interior maximum (the fold
point ``m_bar``); the harvest at which that maximum touches zero is the
critical harvest ``h_star``. Below it there are two positive equilibria
``m_low < m_bar < m_high``, above it none.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

from ._roots import bisect, bisect_newton
from .errors import InfeasibleParametersError, NoEquilibriumError, NoWindowError, FoldSingularityError
from .special import lambert_w0

#: Default half-width of the fold: ``|h - h_star|`` below this counts as a double root.
FOLD_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(p, mu, a, gamma, h, tau)`` of the harvested equation.

    Attributes
    ----------
    p : float
        Birth-rate scale (1/time).
    mu : float
        Death rate of immatures (1/time).
    a : float
        Inverse of the population size with maximal reproduction.
    gamma : float
        Death rate of matures (1/time).
    h : float
        Constant harvest rate (population/time).
    tau : float
        Maturation delay (time).
    """

    p: float
    mu: float
    a: float
    gamma: float
    h: float = 0.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p", "mu", "a", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("h", "tau"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative and finite, got {value!r}")

    @property
    def tau_limit(self) -> float:
        """``ln(p/gamma)/mu``, the largest delay compatible with any equilibrium."""
        if self.p <= self.gamma:
            return 0.0
        return math.log(self.p / self.gamma) / self.mu

    @property
    def survival(self) -> float:
        """Fraction ``exp(-mu tau)`` of immatures that reach maturity."""
        return math.exp(-self.mu * self.tau)

    def h1_satisfied(self) -> bool:
        """True iff ``p > gamma`` and ``tau < ln(p/gamma)/mu``."""
        return self.p > self.gamma and self.tau < self.tau_limit

    def replace(self, **changes: float) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def with_tau(self, tau: float) -> "ModelParams":
        return dataclasses.replace(self, tau=tau)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class EquilibriumSet:
    """Fold point, critical harvest and the (optional) pair of equilibria.

    ``m_low`` and ``m_high`` are both ``None`` when ``h > h_star``; they are
    both equal to ``m_bar`` when ``h`` sits on the fold (``near_fold``).
    """

    m_bar: float
    h_star: float
    m_low: Optional[float]
    m_high: Optional[float]
    near_fold: bool = False

    @property
    def count(self) -> int:
        """Number of distinct positive equilibria (0, 1 or 2)."""
        if self.m_high is None:
            return 0
        if self.near_fold:
            return 1
        return 2 if self.m_low > 0 else 1

    @property
    def exists(self) -> bool:
        return self.m_high is not None


def _check_h1(params: ModelParams) -> None:
    if not params.h1_satisfied():
        raise InfeasibleParametersError(
            f"need p > gamma and tau < ln(p/gamma)/mu = {params.tau_limit:.6g}; got {params}"
        )


def growth_g(M: float, params: ModelParams) -> float:
    """Growth function ``g(M) = p e^{-mu tau} M e^{-a M} - gamma M - h``."""
    P = params
    return P.p * math.exp(-P.mu * P.tau) * M * math.exp(-P.a * M) - P.gamma * M - P.h


def growth_dg(M: float, params: ModelParams) -> float:
    """``dg/dM = p e^{-mu tau} e^{-a M} (1 - a M) - gamma``."""
    P = params
    return P.p * math.exp(-P.mu * P.tau) * math.exp(-P.a * M) * (1.0 - P.a * M) - P.gamma


def _m_bar(p: float, mu: float, a: float, gamma: float, tau: float) -> float:
    return (1.0 - lambert_w0(gamma / p * math.exp(1.0 + mu * tau))) / a


def _h_star(p: float, mu: float, a: float, gamma: float, tau: float) -> float:
    m = _m_bar(p, mu, a, gamma, tau)
    return p * math.exp(-mu * tau) * m * math.exp(-a * m) - gamma * m


def fold_point_m_bar(params: ModelParams) -> float:
    """Unique maximiser of ``g``: ``(1 - W0((gamma/p) e^{1 + mu tau})) / a``.

    Raises
    ------
    InfeasibleParametersError
        If ``p <= gamma`` or ``tau >= ln(p/gamma)/mu``.
    """
    _check_h1(params)
    P = params
    return _m_bar(P.p, P.mu, P.a, P.gamma, P.tau)


def h_star(params: ModelParams) -> float:
    """Critical harvest ``g(m_bar) + h``; ``params.h`` is ignored."""
    _check_h1(params)
    P = params
    return _h_star(P.p, P.mu, P.a, P.gamma, P.tau)


def _upper_bracket(params: ModelParams) -> float:
    # M e^{-aM} <= 1/(a e) bounds the birth term, hence g(M_up) <= -gamma
    P = params
    return (P.p * P.survival / (P.a * math.e) - P.h) / P.gamma + 1.0


def _ftol(params: ModelParams, m_bar: float) -> float:
    return 1e-12 * max(1.0, params.gamma * m_bar)


def equilibria(params: ModelParams, fold_tol: float = FOLD_TOL) -> EquilibriumSet:
    """Locate the fold point and both positive equilibria.

    ``m_low`` is bracketed on ``(0, m_bar]`` and ``m_high`` on
    ``[m_bar, M_up)``; each is bisected to ``1e-6`` and Newton-polished to
    ``|g| <= 1e-12 * max(1, gamma * m_bar)``. With ``h == 0`` the closed
    forms ``m_low = 0`` and ``m_high = (ln(p/gamma) - mu tau)/a`` are used.

    Parameters
    ----------
    params : ModelParams
    fold_tol : float
        ``|h - h_star| < fold_tol`` is treated as the fold: a single
        equilibrium at ``m_bar`` and ``near_fold=True``.

    Returns
    -------
    EquilibriumSet
        With ``m_low = m_high = None`` when ``h > h_star``.
    """
    _check_h1(params)
    P = params
    m_bar = _m_bar(P.p, P.mu, P.a, P.gamma, P.tau)
    hs = _h_star(P.p, P.mu, P.a, P.gamma, P.tau)

    if abs(P.h - hs) < fold_tol:
        return EquilibriumSet(m_bar, hs, m_bar, m_bar, near_fold=True)
    if P.h > hs:
        return EquilibriumSet(m_bar, hs, None, None)
    if P.h == 0.0:
        return EquilibriumSet(m_bar, hs, 0.0, (math.log(P.p / P.gamma) - P.mu * P.tau) / P.a)

    g = lambda M: growth_g(M, P)  # noqa: E731
    dg = lambda M: growth_dg(M, P)  # noqa: E731
    ftol = _ftol(P, m_bar)
    m_low = bisect_newton(g, dg, 0.0, m_bar, ftol)
    m_high = bisect_newton(g, dg, m_bar, _upper_bracket(P), ftol)
    return EquilibriumSet(m_bar, hs, m_low, m_high)


def m_star(params: ModelParams, fold_tol: float = FOLD_TOL) -> float:
    """The upper equilibrium ``m_high`` alone (cheaper than :func:`equilibria`).

    Raises
    ------
    NoEquilibriumError
        If ``h > h_star``.
    """
    _check_h1(params)
    P = params
    if P.h == 0.0:
        return (math.log(P.p / P.gamma) - P.mu * P.tau) / P.a
    m_bar = _m_bar(P.p, P.mu, P.a, P.gamma, P.tau)
    g_max = growth_g(m_bar, P)
    if abs(g_max) < fold_tol:
        return m_bar
    if g_max < 0:
        raise NoEquilibriumError(f"h = {P.h!r} exceeds the critical harvest at tau = {P.tau!r}")
    return bisect_newton(
        lambda M: growth_g(M, P),
        lambda M: growth_dg(M, P),
        m_bar,
        _upper_bracket(P),
        _ftol(P, m_bar),
    )


def dmstar_dtau(params: ModelParams) -> float:
    """Sensitivity ``d m_high / d tau`` from the implicit function theorem.

    Equals ``-(dg/dtau) / (dg/dM)`` at ``m_high`` with
    ``dg/dtau = -mu p e^{-mu tau} M e^{-a M}``; always negative.

    Raises
    ------
    NoEquilibriumError
        If ``h > h_star``.
    FoldSingularityError
        If ``|g'(m_high)| < 1e-10``.
    """
    P = params
    M = m_star(P)
    dg_dM = growth_dg(M, P)
    if abs(dg_dM) < 1e-10:
        raise FoldSingularityError(f"g'(M+) = {dg_dM:.3g}: equilibria are merging at tau = {P.tau!r}")
    dg_dtau = -P.mu * P.p * P.survival * M * math.exp(-P.a * M)
    return -dg_dtau / dg_dM


def tau_bar(params: ModelParams) -> float:
    """Supremum of the delays for which the upper equilibrium exists.

    Solves ``h_star(tau) = h`` on ``[0, ln(p/gamma)/mu]`` by bisection
    (``h_star`` decreases strictly in ``tau``); ``params.tau`` is ignored.

    Raises
    ------
    InfeasibleParametersError
        If ``p <= gamma``.
    NoWindowError
        If ``h > h_star(0)``.
    """
    P = params
    if P.p <= P.gamma:
        raise InfeasibleParametersError(f"need p > gamma, got p={P.p!r}, gamma={P.gamma!r}")
    limit = P.tau_limit
    if P.h == 0.0:
        return limit
    h0 = _h_star(P.p, P.mu, P.a, P.gamma, 0.0)
    if abs(P.h - h0) <= 1e-12 * max(1.0, h0):
        return 0.0
    if P.h > h0:
        raise NoWindowError(f"h = {P.h!r} exceeds h_star(0) = {h0!r}; no delay admits an equilibrium")
    return bisect(lambda t: _h_star(P.p, P.mu, P.a, P.gamma, t) - P.h, 0.0, limit, xtol=1e-13 * limit)
