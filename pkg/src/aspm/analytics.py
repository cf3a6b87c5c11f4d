"""Closed-form and quadrature BER of M-ary ASPM in AWGN.

All error probabilities are functions of the matched-filter peak SNR
``lam`` (the noncentrality parameter), related to the other operating-point
descriptions by

    lam = Np * snr = 2 * ebn0 * log2(M),        mu = sqrt(lam / 2).

Integrals are taken on [0, U] with U = lam + 40 + 10 sqrt(lam + 1); every
integrand is a product of Gaussian/exponential tails and bounded factors.
Results are clamped to [1e-300, 0.5].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import special

from .specfun import QuadratureSpec, erfc, integrate

__all__ = [
    "OperatingPoint",
    "convert",
    "spreading_factor",
    "db_to_linear",
    "linear_to_db",
    "ser_noncoherent",
    "ber_noncoherent",
    "arrival_time_probability",
    "arrival_time_miss_probability",
    "ser_coherent",
    "ber_coherent",
    "ber_coherent_unipolar",
    "ber_binary",
    "analytic_ber",
    "verify_appendix_identity",
    "SUM_MAX_M",
]

SUM_MAX_M = 30
P_MIN, P_MAX = 1e-300, 0.5
_SQRT_PI = math.sqrt(math.pi)
_QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-13, max_subdivisions=500)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _log2(M: int) -> int:
    if M < 2 or (M & (M - 1)):
        raise ValueError(f"M must be a power of two >= 2, got {M}")
    return M.bit_length() - 1


def spreading_factor(M: int, Np: int) -> float:
    """B / f_b = Np / (2 log2 M)."""
    return Np / (2 * _log2(M))


@dataclass(frozen=True)
class OperatingPoint:
    """One operating point in every representation.

    ``snr`` (and ``snr_db``) is ``None`` when ``Np`` is not known.
    """

    M: int
    Np: Optional[int]
    lam: float
    ebn0: float
    snr: Optional[float]

    @property
    def mu(self) -> float:
        return math.sqrt(self.lam / 2.0)

    @property
    def ebn0_db(self) -> float:
        return linear_to_db(self.ebn0)

    @property
    def snr_db(self) -> Optional[float]:
        return None if self.snr is None else linear_to_db(self.snr)


def convert(M: int, Np: Optional[int] = None, *, lam=None, snr=None, snr_db=None,
            ebn0=None, ebn0_db=None) -> OperatingPoint:
    """Build an :class:`OperatingPoint` from exactly one SNR description."""
    given = {k: v for k, v in dict(lam=lam, snr=snr, snr_db=snr_db, ebn0=ebn0, ebn0_db=ebn0_db).items()
             if v is not None}
    if len(given) != 1:
        raise ValueError(f"specify exactly one of lam, snr, snr_db, ebn0, ebn0_db (got {sorted(given)})")
    k = _log2(M)
    (name, value), = given.items()
    value = float(value)
    if name in ("snr", "snr_db") and Np is None:
        raise ValueError("an SNR operating point needs Np")
    if name == "lam":
        L = value
    elif name == "snr":
        L = Np * value
    elif name == "snr_db":
        L = Np * db_to_linear(value)
    elif name == "ebn0":
        L = 2.0 * value * k
    else:
        L = 2.0 * db_to_linear(value) * k
    if L < 0 or math.isnan(L):
        raise ValueError("operating point must be nonnegative")
    return OperatingPoint(M, Np, L, L / (2.0 * k), None if Np is None else L / Np)


def _lam(point) -> float:
    lam = point.lam if isinstance(point, OperatingPoint) else float(point)
    if lam < 0 or math.isnan(lam):
        raise ValueError("lam must be >= 0")
    return lam


def _clamp(p: float) -> float:
    return min(max(p, P_MIN), P_MAX)


def _upper(lam: float) -> float:
    return lam + 40.0 + 10.0 * math.sqrt(lam + 1.0)


# --------------------------------------------------------------------------
# noncoherent


def _ser_noncoherent_sum(lam: float, M: int) -> float:
    terms = [(-1) ** k * math.comb(M, k) * math.exp(-(k - 1) / (2.0 * k) * lam) for k in range(2, M + 1)]
    return math.fsum(terms) / M


def _ser_noncoherent_integral(lam: float, M: int) -> float:
    # P_s = int f(x) [1 - F(x)] dx with f the noncentral chi-square(2, lam)
    # density of the true-position statistic and F(x) = (1 - e^{-x/2})^(M-1)
    # the CDF of the largest of the M - 1 central ones
    sq = math.sqrt(lam)

    def integrand(x):
        if x <= 0.0:
            tail = 1.0
        else:
            tail = -math.expm1((M - 1) * math.log1p(-math.exp(-0.5 * x)))
        r = math.sqrt(lam * x)
        log_f = -0.5 * (sq - math.sqrt(x)) ** 2 + math.log(special.i0e(r)) + math.log(0.5)
        return math.exp(log_f) * tail

    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.rel_tol, _QUAD.max_subdivisions, 0.0, _upper(lam),
                          breakpoints=(lam, 2.0 * math.log(M)))
    value, _ = integrate(integrand, spec)
    return value


def ser_noncoherent(point, M: int, method: str = "auto") -> float:
    """Symbol error probability of noncoherent M-ary ASPM.

    ``method`` is ``"sum"`` (alternating binomial sum), ``"integral"``, or
    ``"auto"`` (sum for M <= 30, integral above, where the sum cancels
    catastrophically).
    """
    lam = _lam(point)
    _log2(M)
    if method == "auto":
        method = "sum" if M <= SUM_MAX_M else "integral"
    if method == "sum":
        return _ser_noncoherent_sum(lam, M)
    if method == "integral":
        return _ser_noncoherent_integral(lam, M)
    raise ValueError(f"unknown method {method!r}")


def ber_noncoherent(point, M: int, method: str = "auto") -> float:
    """Bit error probability of noncoherent M-ary ASPM, P_b = M/(2(M-1)) P_s."""
    return _clamp(M / (2.0 * (M - 1)) * ser_noncoherent(point, M, method))


# --------------------------------------------------------------------------
# coherent


def _folded_pdf(x: float, mu: float) -> float:
    return (math.exp(-(x + mu) ** 2) + math.exp(-(x - mu) ** 2)) / _SQRT_PI


def _check_even(M: int):
    _log2(M)


def arrival_time_probability(mu: float, M: int) -> float:
    """P(|X_1| > max_i |X_i|), i = 2..M/2, by direct quadrature.

    X_1 ~ N(mu, 1/2), X_i ~ N(0, 1/2).  Equals 2/M at mu = 0.
    """
    _check_even(M)
    if mu < 0:
        raise ValueError("mu must be >= 0")
    K = M // 2 - 1

    def integrand(x):
        return special.erf(x) ** K * _folded_pdf(x, mu)

    spec = QuadratureSpec(1e-15, 1e-13, 500, 0.0, _upper(2.0 * mu * mu), breakpoints=(mu,))
    value, _ = integrate(integrand, spec)
    return value


def arrival_time_miss_probability(mu: float, M: int) -> float:
    """1 - arrival_time_probability, integrated directly so small values keep
    their relative accuracy."""
    _check_even(M)
    if mu < 0:
        raise ValueError("mu must be >= 0")
    K = M // 2 - 1
    if K == 0:
        return 0.0

    def integrand(x):
        if x <= 0.0:
            miss = 1.0
        else:
            miss = -math.expm1(K * math.log1p(-float(erfc(x))))
        return miss * _folded_pdf(x, mu)

    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.rel_tol, _QUAD.max_subdivisions, 0.0,
                          _upper(2.0 * mu * mu), breakpoints=(mu, 0.5 * math.log(M) ** 0.5 + 1.0))
    value, _ = integrate(integrand, spec)
    return value


def ser_coherent(point, M: int) -> float:
    """Symbol error probability of bipolar coherent M-ary ASPM.

    1 - P(correct polarity) P(correct arrival time), assembled from the two
    small complementary probabilities.
    """
    mu = math.sqrt(_lam(point) / 2.0)
    _check_even(M)
    pol_err = 0.5 * float(erfc(mu))
    miss = arrival_time_miss_probability(mu, M)
    return pol_err + miss - pol_err * miss


def ber_coherent(point, M: int) -> float:
    """Bit error probability of bipolar coherent M-ary ASPM."""
    return _clamp(M / (2.0 * (M - 1)) * ser_coherent(point, M))


def ber_coherent_unipolar(point, M: int) -> float:
    """Bit error probability of unipolar coherent M-ary ASPM (M positions)."""
    mu = math.sqrt(_lam(point) / 2.0)
    _log2(M)

    def integrand(x):
        # erf(x+mu) + erf(x-mu) written as a difference of tails
        fy2 = float(erfc(mu - x)) - float(erfc(mu + x))
        return 2.0 / _SQRT_PI * math.exp(-x * x) * special.erf(x) ** (M - 2) * fy2

    spec = QuadratureSpec(_QUAD.abs_tol, _QUAD.rel_tol, _QUAD.max_subdivisions, 0.0,
                          _upper(2.0 * mu * mu), breakpoints=(mu,))
    value, _ = integrate(integrand, spec)
    return _clamp(M / 4.0 * value)


def ber_binary(point, mode: str = "coherent", Np: Optional[int] = None) -> float:
    """Binary ASPM: 1/2 erfc(sqrt(lam/2)) coherent, 1/2 exp(-lam/4) noncoherent.

    ``point`` is ``lam`` (= Np * snr), or an :class:`OperatingPoint`.
    """
    lam = _lam(point)
    if mode == "coherent":
        return _clamp(0.5 * float(erfc(math.sqrt(lam / 2.0))))
    if mode == "noncoherent":
        return _clamp(0.5 * math.exp(-lam / 4.0))
    raise ValueError(f"unknown mode {mode!r}")


def analytic_ber(config, point) -> float:
    """Closed-form BER matching a :class:`~aspm.coding.LinkConfig`."""
    from .coding import Detection, Signaling

    if config.detection is Detection.NONCOHERENT:
        return ber_noncoherent(point, config.M)
    if config.signaling is Signaling.BIPOLAR:
        return ber_coherent(point, config.M)
    return ber_coherent_unipolar(point, config.M)


def verify_appendix_identity(lam: float, k: int):
    """Check the integration-by-parts step of the noncoherent derivation.

    lhs = int_0^inf exp(-k x / 2) d/dx Q1(sqrt(lam), sqrt(x)) dx with the
    derivative -1/2 exp(-(lam + x)/2) I0(sqrt(lam x)); rhs is its closed form
    -exp(-k lam / (2 (k + 1))) / (k + 1).  Returns (lhs, rhs, |lhs - rhs|).
    """
    if lam < 0 or k < 1 or int(k) != k:
        raise ValueError("need lam >= 0 and integer k >= 1")
    sq = math.sqrt(lam)

    def integrand(x):
        r = math.sqrt(lam * x)
        return -0.5 * math.exp(-0.5 * k * x - 0.5 * (sq - math.sqrt(x)) ** 2) * special.i0e(r)

    spec = QuadratureSpec(1e-15, 1e-13, 500, 0.0, _upper(lam), breakpoints=(lam / (k + 1) ** 2,))
    lhs, _ = integrate(integrand, spec)
    rhs = -math.exp(-k * lam / (2.0 * (k + 1))) / (k + 1)
    return lhs, rhs, abs(lhs - rhs)


