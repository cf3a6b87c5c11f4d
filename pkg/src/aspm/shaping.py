"""Constant-envelope single-sideband pulse shaping filters.

The filter pair (g_hat, h_hat) is the real and imaginary part of one complex
chirp ``s[k] = A exp(i Phi[k])``, 0 <= k < L.  The chirp is designed so that

* its spectrum sits on nonnegative frequencies, making h_hat a discrete
  Hilbert partner of g_hat, and
* the real part of its autocorrelation, ``w = (g_hat*g + h_hat*h)/2``, is a
  raised-cosine pulse with unity roll-off sampled at the Nyquist rate,
  i.e. ``w = (..., 0, 1/2, 1, 1/2, 0, ...)``.

Design starts from a stationary-phase chirp whose instantaneous frequency
dwells at each frequency in proportion to the target power spectrum. It is
refined by alternating projections between the constant-envelope set and the
target magnitude spectrum, then by a quasi-Newton polish of the phase on a
4-norm ACF error. A last constrained stage minimizes the energy leaking to
negative frequencies subject to a per-lag bound on the ACF error.

The target one-sided spectrum is largest at DC, so the rectangular time
support of a constant-envelope chirp always spills some energy across zero
frequency; that leakage is measured on a finely zero-padded DFT.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import optimize, signal

__all__ = [
    "DesignError",
    "PsfPair",
    "AcfDiagnostics",
    "raised_cosine_acf",
    "design_psf",
    "acf_diagnostics",
    "acf_error",
    "compute_papr",
    "hilbert_pair_error",
    "envelope_ripple",
    "time_bandwidth_product",
    "save_psf",
    "load_psf",
    "default_psf",
]

ACF_TOLERANCE = 2e-2
# fraction of the ACF tolerance the constrained stage may use
ACF_MARGIN = 0.9
SSB_PAD = 16


class DesignError(RuntimeError):
    def __init__(self, message: str, acf_error: float):
        super().__init__(f"{message}: achieved ACF error {acf_error:.4g}")
        self.acf_error = acf_error


@dataclass
class PsfPair:
    """Transmit filter taps ``taps_g`` and their Hilbert partner ``taps_h``.

    The matched (receive) filters are the time reversals ``g``, ``h``.  Taps
    are normalized so that ``w[0] = 1``.
    """

    taps_g: np.ndarray
    taps_h: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.taps_g = np.asarray(self.taps_g, dtype=float)
        self.taps_h = np.asarray(self.taps_h, dtype=float)
        if self.taps_g.ndim != 1 or self.taps_g.shape != self.taps_h.shape:
            raise ValueError("taps_g and taps_h must be 1-D and of equal length")
        if not (np.all(np.isfinite(self.taps_g)) and np.all(np.isfinite(self.taps_h))):
            raise ValueError("filter taps must be finite")

    @property
    def length(self) -> int:
        return self.taps_g.size

    @property
    def g(self) -> np.ndarray:
        return self.taps_g[::-1]

    @property
    def h(self) -> np.ndarray:
        return self.taps_h[::-1]

    @property
    def analytic(self) -> np.ndarray:
        return self.taps_g + 1j * self.taps_h

    @property
    def peak_acf(self) -> float:
        """w[0], the zero-lag value of the real ACF."""
        return 0.5 * float(self.taps_g @ self.taps_g + self.taps_h @ self.taps_h)


@dataclass
class AcfDiagnostics:
    """Matched-filter responses of a PSF pair on lags ``-(L-1)..L-1``.

    ``w`` is the coherent response, ``c = (h_hat*g - g_hat*h)/2`` the cross
    term, and ``v2 = w**2 + c**2`` the noncoherent (envelope) response.
    """

    lags: np.ndarray
    w: np.ndarray
    c: np.ndarray
    v2: np.ndarray
    papr_designed_db: float = float("nan")
    papr_shaped_db: float = float("nan")

    def at(self, lag: int) -> int:
        """Array index of ``lag``."""
        return int(lag) + (self.lags.size - 1) // 2


def raised_cosine_acf(lags) -> np.ndarray:
    """Unity roll-off raised-cosine pulse sampled at twice its symbol rate.

    Evaluated from the continuous-time expression at t = k T / 2; the
    removable singularity at |t| = T/2 takes its limit value pi/4 sinc(1/2).
    """
    t = np.asarray(lags, dtype=float) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sinc(t) * np.cos(np.pi * t) / (1.0 - (2.0 * t) ** 2)
    singular = np.isclose(np.abs(2.0 * t), 1.0)
    out[singular] = np.pi / 4 * np.sinc(0.5)
    return out


def _target_acf(L: int) -> np.ndarray:
    return raised_cosine_acf(np.arange(L))


def _complex_acf(s: np.ndarray) -> np.ndarray:
    """r[k] = sum_n s[n+k] conj(s[n]) for k = -(L-1)..L-1."""
    return signal.correlate(s, s, mode="full", method="direct")


def acf_error(psf: PsfPair) -> float:
    """max_k |w[k] - RC[k]| over all lags, with w normalized to w[0] = 1."""
    r = _complex_acf(psf.analytic)
    L = psf.length
    w = r.real[L - 1:] / r.real[L - 1]
    return float(np.max(np.abs(w - _target_acf(L))))


def _stationary_phase_chirp(L: int) -> np.ndarray:
    # target one-sided power spectrum 1 + cos(2 pi f) on [0, 1/2]; the time
    # spent near frequency f is proportional to it, so the instantaneous
    # frequency inverts its normalized cumulative distribution
    def cdf(f):
        return 2.0 * (f + np.sin(2.0 * np.pi * f) / (2.0 * np.pi))

    t = (np.arange(L) + 0.5) / L
    nu = np.array([optimize.brentq(lambda f, ti=ti: cdf(f) - ti, 0.0, 0.5) for ti in t])
    return np.exp(1j * 2.0 * np.pi * np.cumsum(nu))


def _alternating_projections(s: np.ndarray, iters: int, pad: int = 8) -> np.ndarray:
    L = s.size
    N = pad * L
    fr = np.fft.fftfreq(N)
    mag = np.sqrt(np.where(fr >= 0, 1.0 + np.cos(2.0 * np.pi * fr), 0.0))
    for _ in range(iters):
        S = np.fft.fft(s, N)
        S = mag * np.exp(1j * np.angle(S))
        x = np.fft.ifft(S)[:L]
        s = np.exp(1j * np.angle(x))
    return s


def _polish(phase: np.ndarray, iters: int, neg_weight: float, order: int = 4) -> np.ndarray:
    L = phase.size
    amp = math.sqrt(2.0 / L)
    target = np.zeros(2 * L - 1)
    target[L - 2:L + 1] = (1.0, 2.0, 1.0)  # 2 * RC samples; real part of r is 2w
    neg = np.zeros(L)
    neg[L // 2 + 1:] = 1.0

    def objective(phi):
        s = amp * np.exp(1j * phi)
        r = np.convolve(s, np.conj(s[::-1]))
        e = r.real - target
        X = np.fft.fft(s)
        value = np.sum(e ** order) + neg_weight * np.sum(neg * np.abs(X) ** 2) / L
        de = order * e ** (order - 1)
        grad_s = np.convolve(s, de[::-1])[L - 1:2 * L - 1] + neg_weight * np.fft.ifft(neg * X)
        return value, 2.0 * np.imag(grad_s * np.conj(s))

    res = optimize.minimize(
        objective, phase, jac=True, method="L-BFGS-B",
        options={"maxiter": iters, "ftol": 1e-16, "gtol": 1e-14, "maxcor": 30},
    )
    return res.x


def _constrained(phase: np.ndarray, bound: float, iters: int, pad: int = 8) -> np.ndarray:
    """Minimize negative-frequency energy s.t. |w[k] - RC[k]| <= bound, k >= 1."""
    L = phase.size
    amp2 = 2.0 / L
    N = pad * L
    rc = _target_acf(L)[1:]
    neg = np.zeros(N)
    neg[N // 2 + 1:] = 1.0
    m = np.arange(L)
    lag = np.arange(1, L)[:, None]
    fwd = m[None, :] + lag < L
    bwd = m[None, :] - lag >= 0
    j_fwd = np.where(fwd, m[None, :] + lag, 0)
    j_bwd = np.where(bwd, m[None, :] - lag, 0)

    def w(phi):
        s = np.exp(1j * phi)
        return 0.5 * amp2 * np.convolve(s, np.conj(s[::-1]))[L:].real

    def w_jac(phi):
        # dw[k]/dphi[m] = amp2/2 (sin(phi[m+k] - phi[m]) - sin(phi[m] - phi[m-k]))
        a = np.where(fwd, np.sin(phi[j_fwd] - phi[None, :]), 0.0)
        b = np.where(bwd, np.sin(phi[None, :] - phi[j_bwd]), 0.0)
        return 0.5 * amp2 * (a - b)

    def objective(phi):
        s = math.sqrt(amp2) * np.exp(1j * phi)
        X = np.fft.fft(s, N)
        value = np.sum(neg * np.abs(X) ** 2) / N
        grad = 2.0 * np.imag(np.conj(s) * np.fft.ifft(neg * X)[:L])
        return 1e3 * value, 1e3 * grad

    # squared form: one constraint per lag, scaled to O(1)
    scale = 1.0 / bound ** 2
    cons = {"type": "ineq",
            "fun": lambda p: scale * (bound ** 2 - (w(p) - rc) ** 2),
            "jac": lambda p: -2.0 * scale * (w(p) - rc)[:, None] * w_jac(p)}
    res = optimize.minimize(objective, phase, jac=True, method="SLSQP", constraints=[cons],
                            options={"maxiter": iters, "ftol": 1e-12})
    return res.x


def design_psf(length: int = 256, refine_iters: int = 200, method: str = "constrained",
               polish_iters: int = 3000, neg_weight: float = 0.03,
               tolerance: float = ACF_TOLERANCE, constrained_iters: int = 500) -> PsfPair:
    """Design a constant-envelope SSB shaping filter pair of ``length`` taps.

    Parameters
    ----------
    length : int
        Number of taps, even and >= 32.
    refine_iters : int
        Alternating-projection iterations after the stationary-phase start.
    method : {"stationary-phase", "projection", "polish", "constrained"}
        How far to run the design pipeline.
    polish_iters : int
        Iteration cap for the quasi-Newton phase polish.
    neg_weight : float
        Weight of negative-frequency energy in the polish objective.
    tolerance : float
        Maximum allowed |w[k] - RC[k]|; exceeded tolerance raises
        :class:`DesignError`. The constrained stage works to 90% of it.
    constrained_iters : int
        Iteration cap for the constrained sideband-leakage minimization.

    The result is deterministic for fixed arguments.
    """
    if length < 32 or length % 2:
        raise ValueError(f"PSF length must be even and >= 32, got {length}")
    if method not in ("stationary-phase", "projection", "polish", "constrained"):
        raise ValueError(f"unknown design method {method!r}")
    s = _stationary_phase_chirp(length)
    if method != "stationary-phase":
        s = _alternating_projections(s, refine_iters)
    phase = np.angle(s)
    if method in ("polish", "constrained"):
        phase = _polish(phase, polish_iters, neg_weight)
    if method == "constrained":
        phase = _constrained(phase, ACF_MARGIN * tolerance, constrained_iters)
    chirp = math.sqrt(2.0 / length) * np.exp(1j * phase)
    psf = PsfPair(chirp.real, chirp.imag)
    err = acf_error(psf)
    psf.metadata = {
        "method": method,
        "iters": int(refine_iters),
        "polish_iters": int(polish_iters) if method in ("polish", "constrained") else 0,
        "constrained_iters": int(constrained_iters) if method == "constrained" else 0,
        "acf_error": err,
        "ssb_error": hilbert_pair_error(psf),
        "envelope_ripple": envelope_ripple(psf),
    }
    if err > tolerance:
        raise DesignError("PSF design missed the ACF tolerance", err)
    return psf


def acf_diagnostics(psf: PsfPair, papr_config=None, n_symbols: int = 64, seed: int = 0) -> AcfDiagnostics:
    """Coherent/noncoherent responses plus PAPR of a reference shaped train.

    The reference train uses ``papr_config`` (default: 16-ary unipolar,
    Np = 128, n = 4) with ``n_symbols`` random symbols.
    """
    from .coding import LinkConfig, bits_to_symbols, symbols_to_train
    from .link import shape

    r = _complex_acf(psf.analytic)
    L = psf.length
    w = 0.5 * r.real
    c = 0.5 * r.imag
    diag = AcfDiagnostics(np.arange(-(L - 1), L), w, c, w ** 2 + c ** 2)
    if papr_config is None:
        papr_config = LinkConfig(16, 128, 4, "unipolar", "noncoherent", psf_length=L, allow_overlap=True)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, n_symbols * papr_config.bits_per_symbol)
    train = symbols_to_train(bits_to_symbols(bits, papr_config), papr_config)
    x_g, _ = shape(train, psf)
    diag.papr_designed_db = compute_papr(train.dense())
    diag.papr_shaped_db = compute_papr(x_g)
    return diag


def compute_papr(x) -> float:
    """Peak-to-average power ratio in dB (|x|^2 for complex input)."""
    p = np.abs(np.asarray(x)) ** 2
    mean = p.mean() if p.size else 0.0
    if not mean > 0:
        raise ValueError("PAPR undefined for a zero-energy signal")
    return float(10.0 * np.log10(p.max() / mean))


def hilbert_pair_error(psf_or_g, taps_h=None) -> float:
    """Fraction of the energy of g_hat + i h_hat at negative frequencies.

    Measured on a 16x zero-padded DFT so leakage between the L-point bins is
    seen; frequencies in [0, 1/2] count as nonnegative.
    """
    if taps_h is None:
        z = psf_or_g.analytic
    else:
        z = np.asarray(psf_or_g, dtype=float) + 1j * np.asarray(taps_h, dtype=float)
    N = SSB_PAD * z.size
    X = np.abs(np.fft.fft(z, N)) ** 2
    total = X.sum()
    if not total > 0:
        raise ValueError("zero-energy filter pair")
    return float(X[N // 2 + 1:].sum() / total)


def envelope_ripple(psf: PsfPair) -> float:
    """max |env - mean(env)| / mean(env) of |g_hat + i h_hat| on the support."""
    env = np.abs(psf.analytic)
    return float(np.max(np.abs(env - env.mean())) / env.mean())


def _occupied_width(p: np.ndarray, fraction: float) -> int:
    """Shortest run of consecutive bins holding ``fraction`` of sum(p)."""
    cs = np.concatenate([[0.0], np.cumsum(p)])
    need = fraction * cs[-1]
    best = p.size
    j = 0
    for i in range(p.size):
        j = max(j, i + 1)
        while j <= p.size and cs[j] - cs[i] < need:
            j += 1
        if j > p.size:
            break
        best = min(best, j - i)
    return best


def time_bandwidth_product(x, fraction: float = 0.95, nfft: int | None = None) -> float:
    """Occupied duration (samples) times occupied bandwidth (cycles/sample).

    Both extents are the shortest contiguous intervals holding ``fraction``
    of the energy, the bandwidth taken on the zero-padded DFT.
    """
    x = np.asarray(x)
    nfft = nfft or max(4096, 8 * x.size)
    duration = _occupied_width(np.abs(x) ** 2, fraction)
    spec = np.abs(np.fft.fftshift(np.fft.fft(x, nfft))) ** 2
    bandwidth = _occupied_width(spec, fraction) / nfft
    return float(duration * bandwidth)


def save_psf(psf: PsfPair, path) -> None:
    doc = {
        "length": psf.length,
        "taps_g": [float(v) for v in psf.taps_g],
        "taps_h": [float(v) for v in psf.taps_h],
        "design_metadata": psf.metadata,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _psf_from_doc(doc: dict) -> PsfPair:
    try:
        taps_g, taps_h, length = doc["taps_g"], doc["taps_h"], int(doc["length"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed PSF document: {exc}") from exc
    if len(taps_g) != length or len(taps_h) != length:
        raise ValueError("PSF tap count does not match declared length")
    return PsfPair(taps_g, taps_h, dict(doc.get("design_metadata", {})))


def load_psf(path) -> PsfPair:
    return _psf_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


@lru_cache(maxsize=None)
def _shipped_doc() -> str:
    return resources.files("aspm").joinpath("data/psf_l256.json").read_text(encoding="utf-8")


def default_psf() -> PsfPair:
    """The shipped L = 256 design (a fresh copy on every call)."""
    return _psf_from_doc(json.loads(_shipped_doc()))
