"""Complex-baseband transmit chain, AWGN channel and matched-filter receivers.

The passband chain (quadrature modulation on a carrier, mixing with a local
oscillator, lowpass, A/D) is replaced by its exact baseband equivalent:

* coherent:    x_rx = a [x_g cos(pi/4 + phi) + x_h sin(pi/4 + phi)] + n
* noncoherent: I + iQ = a (x_g + i x_h) exp(-i phi) / sqrt(2) + n_I + i n_Q

with every noise component i.i.d. N(0, sigma^2).  Constant mixer gains are
absorbed into ``a`` and ``sigma``; only their ratio matters, through the
matched-filter output peak-power-to-noise ratio ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .coding import DesignedTrain, Detection, LinkConfig
from .shaping import PsfPair

__all__ = [
    "ChannelSpec",
    "ReceiverOutput",
    "Calibration",
    "shape",
    "channel_coherent",
    "channel_noncoherent",
    "receive_coherent",
    "receive_noncoherent",
    "noncoherent_components",
    "calibrate_noise",
    "measure_lambda",
]


@dataclass(frozen=True)
class ChannelSpec:
    """AWGN channel: per-component noise std ``sigma``, carrier phase ``phase``
    (radians) and amplitude ``gain``.  With ``random_phase`` the phase is drawn
    uniformly on [0, 2 pi) once per call."""

    sigma: float = 0.0
    phase: float = 0.0
    gain: float = 1.0
    random_phase: bool = False

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not self.gain > 0:
            raise ValueError("gain must be > 0")


@dataclass
class ReceiverOutput:
    """Matched-filter output ``y`` (``y_c`` or ``y_nc**2``) and the composite
    delay between a transmitted pulse index and its output peak."""

    y: np.ndarray
    delay: int
    kind: Detection


@dataclass(frozen=True)
class Calibration:
    sigma: float
    lam: float
    peak_amplitude: float
    noise_variance: float
    empirical_lam: float | None = None


def shape(train: DesignedTrain, psf: PsfPair):
    """Filter a designed train with g_hat and h_hat by summing shifted taps.

    Returns ``(x_g, x_h)`` of length ``train.length``.
    """
    L = psf.length
    x_g = np.zeros(train.length)
    x_h = np.zeros(train.length)
    if train.n_pulses:
        if train.indices.max() + L > train.length:
            raise ValueError("pulse tail extends past the end of the train")
        idx = (train.indices[:, None] + np.arange(L)).ravel()
        np.add.at(x_g, idx, np.outer(train.amplitudes, psf.taps_g).ravel())
        np.add.at(x_h, idx, np.outer(train.amplitudes, psf.taps_h).ravel())
    return x_g, x_h


def _check_lengths(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError("signal components must have equal length")


def _phase(chan: ChannelSpec, rng) -> float:
    if chan.random_phase:
        return float(rng.uniform(0.0, 2.0 * math.pi))
    return chan.phase


def channel_coherent(x_g, x_h, chan: ChannelSpec, rng=None) -> np.ndarray:
    _check_lengths(x_g, x_h)
    rng = rng if rng is not None else np.random.default_rng()
    phi = _phase(chan, rng)
    x = chan.gain * (math.cos(math.pi / 4 + phi) * np.asarray(x_g) + math.sin(math.pi / 4 + phi) * np.asarray(x_h))
    if chan.sigma > 0:
        x = x + chan.sigma * rng.standard_normal(x.size)
    return x


def channel_noncoherent(x_g, x_h, chan: ChannelSpec, rng=None):
    _check_lengths(x_g, x_h)
    rng = rng if rng is not None else np.random.default_rng()
    phi = _phase(chan, rng)
    z = chan.gain * (np.asarray(x_g) + 1j * np.asarray(x_h)) * np.exp(-1j * phi) / math.sqrt(2.0)
    I, Q = z.real.copy(), z.imag.copy()
    if chan.sigma > 0:
        noise = chan.sigma * rng.standard_normal((2, I.size))
        I += noise[0]
        Q += noise[1]
    return I, Q


def receive_coherent(x_rx, psf: PsfPair) -> ReceiverOutput:
    """y_c = x_rx * (g + h), full convolution; peaks land ``L - 1`` late."""
    y = signal.oaconvolve(np.asarray(x_rx, dtype=float), psf.g + psf.h)
    return ReceiverOutput(y, psf.length - 1, Detection.COHERENT)


def noncoherent_components(I, Q, psf: PsfPair):
    """The two filtered components ``(I*g + Q*h, Q*g - I*h)``."""
    _check_lengths(I, Q)
    Ig, Ih = signal.oaconvolve(I, psf.g), signal.oaconvolve(I, psf.h)
    Qg, Qh = signal.oaconvolve(Q, psf.g), signal.oaconvolve(Q, psf.h)
    return Ig + Qh, Qg - Ih


def receive_noncoherent(I, Q, psf: PsfPair) -> ReceiverOutput:
    """y_nc^2 = |(I + iQ) * (g - i h)|^2, one complex convolution."""
    _check_lengths(I, Q)
    z = signal.oaconvolve(np.asarray(I) + 1j * np.asarray(Q), psf.g - 1j * psf.h)
    y2 = z.real ** 2 + z.imag ** 2
    return ReceiverOutput(y2, psf.length - 1, Detection.NONCOHERENT)


def _filter_energy(psf: PsfPair, detection: Detection) -> float:
    if detection is Detection.COHERENT:
        comp = psf.taps_g + psf.taps_h
        return float(comp @ comp)
    return float(psf.taps_g @ psf.taps_g + psf.taps_h @ psf.taps_h)


def calibrate_noise(config: LinkConfig, psf: PsfPair, *, lam=None, snr=None, snr_db=None,
                    ebn0=None, ebn0_db=None, gain: float = 1.0, self_check: bool = False,
                    trials: int = 1_000_000, seed: int = 0) -> Calibration:
    """Noise std giving the requested matched-filter peak SNR.

    Exactly one of ``lam``, ``snr``/``snr_db`` or ``ebn0``/``ebn0_db`` sets the
    target; the conversions use ``config.M`` and ``config.Np``.  With a
    composite receive filter of energy K, the sampled peak is
    ``A = a K / sqrt(2)`` and the filtered noise variance per component is
    ``sigma_n^2 = sigma^2 K``, so ``lam = a^2 K / (2 sigma^2)``.  For a
    unit-normalized Hilbert pair K = 2 and lam = a^2 / sigma^2.
    """
    from .analytics import convert

    point = convert(config.M, config.Np, lam=lam, snr=snr, snr_db=snr_db, ebn0=ebn0, ebn0_db=ebn0_db)
    if not point.lam > 0 or not math.isfinite(point.lam):
        raise ValueError("calibration target must be positive and finite")
    K = _filter_energy(psf, config.detection)
    sigma = gain * math.sqrt(K / (2.0 * point.lam))
    A = gain * K / math.sqrt(2.0)
    cal = Calibration(sigma, point.lam, A, sigma ** 2 * K)
    if self_check:
        measured = measure_lambda(config, psf, sigma, trials=trials, gain=gain, seed=seed)
        if abs(measured / point.lam - 1.0) > 0.01:
            raise RuntimeError(f"empirical lambda {measured:.4g} deviates from target {point.lam:.4g} by >1%")
        cal = Calibration(sigma, point.lam, A, sigma ** 2 * K, measured)
    return cal


def measure_lambda(config: LinkConfig, psf: PsfPair, sigma: float, trials: int = 1_000_000,
                   gain: float = 1.0, seed: int = 0) -> float:
    """A^2 / sigma_n^2 measured through the simulated chain.

    A is read off a noiseless single-pulse response; sigma_n^2 is the
    per-component variance of ``trials`` noise-only matched-filter outputs
    (for the noncoherent receiver, half the mean of y_nc^2).
    """
    L = psf.length
    train = DesignedTrain(2 * L, np.array([0]), np.array([1.0]), 1)
    x_g, x_h = shape(train, psf)
    noiseless = ChannelSpec(0.0, 0.0, gain)
    if config.detection is Detection.COHERENT:
        peak = receive_coherent(channel_coherent(x_g, x_h, noiseless), psf).y[L - 1] ** 2
    else:
        peak = receive_noncoherent(*channel_noncoherent(x_g, x_h, noiseless), psf).y[L - 1]

    rng = np.random.default_rng(seed)
    # every fully-overlapped output sample; neighbours are correlated, which
    # only widens the estimator spread
    n = trials + L - 1
    zeros = np.zeros(n)
    noisy = ChannelSpec(sigma, 0.0, gain)
    if config.detection is Detection.COHERENT:
        y = receive_coherent(channel_coherent(zeros, zeros, noisy, rng), psf).y[L - 1:n]
        noise_var = float(np.mean(y ** 2))
    else:
        y2 = receive_noncoherent(*channel_noncoherent(zeros, zeros, noisy, rng), psf).y[L - 1:n]
        noise_var = float(np.mean(y2)) / 2.0
    return float(peak / noise_var)
