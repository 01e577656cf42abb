"""One-dimensional standard Gaussian primitives.

``phi`` is the cumulative distribution function, ``phi_inv`` its inverse and
``density`` the probability density. ``phi_interval`` gives the mass of an
interval without the cancellation that ``phi(u) - phi(l)`` suffers in the
upper tail.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc as _erfc

from .errors import DomainError, InvalidArgumentError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
INV_SQRT2PI = 1.0 / SQRT2PI

# phi_inv starts from this bracket and only widens it for extreme tails.
_BRACKET = 9.0
_WIDE_BRACKET = 40.0


def phi(s):
    """Standard normal CDF, for a scalar or an array.

    Evaluated as ``erfc(-s / sqrt(2)) / 2``; the complementary error function
    keeps full relative accuracy in the lower tail, so the absolute error is
    at the level of double rounding for every finite ``s``.
    """
    if np.ndim(s) == 0:
        x = float(s)
        if not math.isfinite(x):
            raise InvalidArgumentError(f"phi needs a finite argument, got {s!r}")
        return 0.5 * float(_erfc(-x / SQRT2))
    x = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("phi needs finite arguments")
    return 0.5 * _erfc(-x / SQRT2)


def phi_ext(s):
    """Like :func:`phi` but accepts ``-inf``/``+inf`` (used for interval ends)."""
    x = np.asarray(s, dtype=float)
    out = 0.5 * _erfc(-x / SQRT2)
    return float(out) if out.ndim == 0 else out


def density(s):
    """Standard normal density ``exp(-s^2/2) / sqrt(2 pi)``."""
    if np.ndim(s) == 0:
        x = float(s)
        return INV_SQRT2PI * math.exp(-0.5 * x * x)
    x = np.asarray(s, dtype=float)
    return INV_SQRT2PI * np.exp(-0.5 * x * x)


def phi_interval(lo, hi):
    """Gaussian mass of ``[lo, hi]`` (elementwise), ``lo <= hi``.

    Intervals entirely above zero are measured with upper-tail complements,
    so cells far out in either tail keep relative accuracy. Infinite ends
    are allowed.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper = 0.5 * (_erfc(lo / SQRT2) - _erfc(hi / SQRT2))
    lower = 0.5 * (_erfc(-hi / SQRT2) - _erfc(-lo / SQRT2))
    out = np.where(lo >= 0.0, upper, lower)
    return float(out) if out.ndim == 0 else out


def phi_inv(p: float) -> float:
    """Inverse of :func:`phi` on the open interval (0, 1).

    Bracketed Newton iteration with bisection fallback, starting from the
    bracket [-9, 9]. The iteration runs on the smaller of ``p`` and
    ``1 - p`` (exact in floating point for ``p >= 1/2``) so the lower tail
    keeps full relative precision.
    """
    try:
        q = float(p)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"phi_inv needs a probability, got {p!r}") from exc
    if not (0.0 < q < 1.0):
        raise DomainError(f"phi_inv needs 0 < p < 1, got {p!r}")
    if q == 0.5:
        return 0.0
    if q > 0.5:
        return -_lower_phi_inv(1.0 - q)
    return _lower_phi_inv(q)


def _lower_phi_inv(q: float) -> float:
    # solves phi(s) = q for q < 1/2, so s < 0
    lo, hi = -_BRACKET, 0.0
    if phi(lo) > q:
        lo = -_WIDE_BRACKET
    # asymptotic start; Newton takes it the rest of the way
    t = math.sqrt(-2.0 * math.log(q))
    s = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
          / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t ** 3))
    if not lo < s < hi:
        s = 0.5 * (lo + hi)
    for _ in range(200):
        f = phi(s) - q
        if f > 0.0:
            hi = s
        elif f < 0.0:
            lo = s
        else:
            return s
        d = density(s)
        step = f / d if d > 0.0 else math.inf
        nxt = s - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - s) <= 2e-16 * max(1.0, abs(s)) or hi - lo <= 2e-16 * max(1.0, abs(s)):
            s = nxt
            break
        s = nxt
    return s
