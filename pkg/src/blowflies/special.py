"""Real principal branch of the Lambert W function."""

from __future__ import annotations

import math

from .errors import DomainError

#: Branch point of W0: W0(-1/e) = -1.
BRANCH_POINT = -math.exp(-1.0)

_BRANCH_SLACK = 1e-12
_MAX_ITER = 64


def _branch_series(q: float) -> float:
    # expansion of W0 in q = sqrt(2(e*x + 1)) about the branch point
    return -1.0 + q * (1.0 + q * (-1.0 / 3.0 + q * (11.0 / 72.0 + q * (-43.0 / 540.0 + q * 769.0 / 17280.0))))


def _initial_guess(x: float) -> float:
    if x < -0.25:
        return _branch_series(math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0))))
    if x <= 3.0:
        return math.log1p(x)
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x: float) -> float:
    """Principal branch ``W0(x)`` for real ``x >= -1/e``.

    Solves ``w * exp(w) = x`` with Halley's iteration. The seed is
    ``log1p(x)`` on moderate arguments, the asymptotic ``ln x - ln ln x``
    for large ones and the branch-point series below ``-1/4``.

    Parameters
    ----------
    x : float
        Argument. Values up to ``1e-12`` below ``-1/e`` are clamped to the
        branch point.

    Returns
    -------
    float
        ``w >= -1`` with ``|w exp(w) - x| <= 1e-13 * max(1, |x|)``.

    Raises
    ------
    DomainError
        If ``x < -1/e - 1e-12`` or ``x`` is not finite.
    """
    x = float(x)
    if math.isnan(x) or x == math.inf:
        raise DomainError(f"lambert_w0 needs a finite argument, got {x!r}")
    if x < BRANCH_POINT - _BRANCH_SLACK:
        raise DomainError(f"lambert_w0 is real only for x >= -1/e, got {x!r}")
    if x <= BRANCH_POINT:
        return -1.0
    if x == 0.0:
        return 0.0

    q2 = 2.0 * (math.e * x + 1.0)
    if q2 < 1e-12:
        # Halley's denominators vanish here; the series is exact to O(q^6)
        return _branch_series(math.sqrt(q2))

    w = _initial_guess(x)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_next = w - step
        if w_next <= -1.0:
            # never step past the branch point
            w_next = 0.5 * (w - 1.0)
        if abs(w_next - w) <= 4.0 * math.ulp(max(1.0, abs(w_next))):
            w = w_next
            break
        w = w_next
    return w
