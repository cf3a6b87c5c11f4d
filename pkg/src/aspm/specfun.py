"""Special functions and quadrature used by the BER analytics.

erf/erfc and the modified Bessel function are thin, domain-checked wrappers
over :mod:`scipy.special`; integration goes through QUADPACK with an explicit
cutoff rule for semi-infinite ranges.  The Marcum Q-function is evaluated from
its integral definition rather than a series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _special

__all__ = [
    "QuadratureError",
    "QuadratureSpec",
    "erf",
    "erfc",
    "bessel_i0",
    "scaled_i0",
    "integrate",
    "marcum_q1",
    "effective_upper_bound",
]


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature does not reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value!r}, error estimate={error_estimate!r})")
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and bounds for :func:`integrate`.

    ``upper=None`` means "effectively infinite": the range is cut at the first
    point past which ``envelope`` (or, lacking one, the integrand itself)
    stays below ``abs_tol * 1e-3``.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 200
    lower: float = 0.0
    upper: Optional[float] = None
    envelope: Optional[Callable[[float], float]] = None
    breakpoints: tuple = ()

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not math.isfinite(self.lower):
            raise ValueError("lower bound must be finite")
        if self.upper is not None and not self.upper > self.lower:
            raise ValueError("upper bound must exceed lower bound")

    def with_bounds(self, lower: float, upper: Optional[float] = None, **kw) -> "QuadratureSpec":
        return replace(self, lower=lower, upper=upper, **kw)


def erf(x):
    return _special.erf(x)


def erfc(x):
    return _special.erfc(x)


def _check_nonnegative(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be >= 0, got {x!r}")
    return arr


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero, for x >= 0."""
    _check_nonnegative(x)
    return _special.i0(x)


def scaled_i0(x):
    """``exp(-x) * I0(x)``; finite for arbitrarily large x."""
    _check_nonnegative(x)
    return _special.i0e(x)


def effective_upper_bound(bound: Callable[[float], float], lower: float, threshold: float,
                          start: float = 1.0, max_upper: float = 1e8) -> float:
    """Smallest doubling step ``U`` past ``lower`` with ``bound(U) < threshold``.

    ``bound`` must be a nonincreasing envelope of the integrand's magnitude
    beyond its peak; when it is the integrand itself the last probe window is
    also checked so that a single unlucky zero does not stop the search.
    """
    width = max(start, 1.0)
    upper = lower + width
    while upper < max_upper:
        probe = np.linspace(lower + width / 2, upper, 9)
        if max(abs(float(bound(p))) for p in probe) < threshold:
            return upper
        width *= 2.0
        upper = lower + width
    raise QuadratureError("could not find an effective upper bound", float("nan"), float("inf"))


def integrate(f: Callable[[float], float], spec: QuadratureSpec = QuadratureSpec()):
    """Integrate ``f`` over ``[spec.lower, spec.upper]``.

    Returns ``(value, error_estimate)``.  Raises :class:`QuadratureError` if the
    subdivision budget is exhausted before the tolerance is met.
    """
    upper = spec.upper
    if upper is None:
        upper = effective_upper_bound(spec.envelope or f, spec.lower, spec.abs_tol * 1e-3)
    points = [p for p in spec.breakpoints if spec.lower < p < upper] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(
            f, spec.lower, upper,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, points=points, full_output=1,
        )
    value, err = float(out[0]), float(out[1])
    # quad appends a diagnostic message when ier > 0; roundoff-limited results
    # whose estimate still meets the tolerance are accepted
    if len(out) > 3 or not math.isfinite(value):
        tol = max(spec.abs_tol, spec.rel_tol * abs(value))
        if not (math.isfinite(value) and err <= 10 * tol):
            raise QuadratureError("quadrature did not converge", value, err)
    return value, err


_MARCUM_SPEC = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-13, max_subdivisions=400)


def marcum_q1(a: float, b: float, spec: QuadratureSpec = _MARCUM_SPEC) -> float:
    """First-order Marcum Q-function by quadrature of its integral definition.

    Q1(a, b) = integral from b to inf of x exp(-(x^2 + a^2)/2) I0(a x) dx.
    """
    if a < 0 or b < 0:
        raise ValueError("marcum_q1 requires a, b >= 0")
    if math.isinf(b):
        return 0.0

    def integrand(x):
        # exp(-(x^2+a^2)/2) I0(ax) = exp(-(x-a)^2/2) * i0e(ax)
        return x * math.exp(-0.5 * (x - a) ** 2) * _special.i0e(a * x)

    def envelope(x):
        return x * math.exp(-0.5 * (x - a) ** 2) if x > a else 1.0 + a

    upper = effective_upper_bound(envelope, max(a, b), spec.abs_tol * 1e-3)
    local = spec.with_bounds(b, upper, breakpoints=(a,))
    value, _ = integrate(integrand, local)
    return min(max(value, 0.0), 1.0)
