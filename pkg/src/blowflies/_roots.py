"""Bracketed scalar root finding: plain bisection and a safeguarded Newton polish."""

from __future__ import annotations

import math
from typing import Callable

from .errors import ConvergenceError

Scalar = Callable[[float], float]


def bisect(f: Scalar, lo: float, hi: float, xtol: float = 1e-12, maxiter: int = 200) -> float:
    """Bisection on a sign-change bracket ``[lo, hi]``.

    Stops once the bracket is narrower than ``xtol`` (or hits an exact
    zero) and returns the endpoint with the smaller ``|f|``.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}")
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return lo if abs(flo) <= abs(fhi) else hi


def bisect_newton(
    f: Scalar,
    df: Scalar,
    lo: float,
    hi: float,
    ftol: float,
    coarse_xtol: float = 1e-6,
    maxiter: int = 100,
) -> float:
    """Bisect to ``coarse_xtol`` (relative), then polish with Newton steps.

    Newton iterates that leave the current bracket are replaced by a
    bisection step, so the bracket keeps shrinking. Returns as soon as
    ``|f| <= ftol`` or the bracket collapses to adjacent floats.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}")
    rising = fhi > 0

    def shrink(x: float, fx: float) -> None:
        nonlocal lo, hi
        if (fx > 0) == rising:
            hi = x
        else:
            lo = x

    while hi - lo > coarse_xtol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        shrink(mid, fmid)

    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) <= ftol:
            return x
        shrink(x, fx)
        d = df(x)
        x_new = x - fx / d if d != 0.0 and math.isfinite(d) else math.nan
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo <= 2.0 * math.ulp(max(abs(lo), abs(hi))):
            return x
        x = x_new
    raise ConvergenceError(f"Newton polish did not reach |f| <= {ftol:g} on [{lo!r}, {hi!r}]")
