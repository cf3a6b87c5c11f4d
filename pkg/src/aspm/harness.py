"""Monte Carlo BER sweeps.

Each operating point is simulated frame by frame; a frame is a burst of
``symbols_per_frame`` symbols with its own guard intervals and carrier phase.
Frame ``f`` of point ``p`` draws all of its randomness from a Philox stream
keyed by ``(seed, p, f)``, and frames are accumulated strictly in index
order, so results do not depend on how many worker threads ran them.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize, stats

from .analytics import OperatingPoint, analytic_ber, convert
from .coding import Detection, LinkConfig, bits_to_symbols, symbols_to_bits, symbols_to_train
from .detection import detect
from .link import (ChannelSpec, calibrate_noise, channel_coherent, channel_noncoherent,
                   measure_lambda, receive_coherent, receive_noncoherent, shape)
from .shaping import PsfPair, default_psf

__all__ = [
    "SweepSpec",
    "FrameResult",
    "BerPoint",
    "BerCurve",
    "CSV_COLUMNS",
    "frame_rng",
    "simulate_frame",
    "run_sweep",
    "empirical_lambda",
    "wilson_interval",
    "lambda_for_ber",
    "default_threads",
]

AXES = ("snr_db", "ebn0_db", "lambda")
CSV_COLUMNS = ["axis_value", "lambda", "ebn0_db", "snr_db", "bits", "errors",
               "ber_sim", "ci_low", "ci_high", "ber_analytic", "flagged"]


def default_threads() -> int:
    try:
        return max(int(os.environ.get("ASPM_THREADS", "1")), 1)
    except ValueError:
        return 1


@dataclass
class SweepSpec:
    config: LinkConfig
    axis: str
    values: Sequence[float]
    min_errors: int = 100
    max_bits: int = 10 ** 8
    seed: int = 0
    threads: Optional[int] = None
    symbols_per_frame: int = 512
    reference: str = "ideal"
    gain: float = 1.0
    random_phase: bool = True

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        self.values = [float(v) for v in self.values]
        if not self.values:
            raise ValueError("operating-point grid is empty")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("operating-point grid must be sorted")
        if self.min_errors < 1:
            raise ValueError("min_errors must be >= 1")
        if self.symbols_per_frame < 1:
            raise ValueError("symbols_per_frame must be >= 1")
        self.max_bits = int(self.max_bits)
        if self.max_bits < self.bits_per_frame:
            raise ValueError(f"max_bits must be >= bits per frame ({self.bits_per_frame})")
        if self.reference not in ("ideal", "transmitted"):
            raise ValueError("reference must be 'ideal' or 'transmitted'")

    @property
    def bits_per_frame(self) -> int:
        return self.symbols_per_frame * self.config.bits_per_symbol

    def operating_point(self, value: float) -> OperatingPoint:
        key = {"snr_db": "snr_db", "ebn0_db": "ebn0_db", "lambda": "lam"}[self.axis]
        return convert(self.config.M, self.config.Np, **{key: value})


class FrameResult(NamedTuple):
    bits: int
    errors_ideal: int
    errors_transmitted: int
    symbols: int
    symbol_errors_ideal: int
    symbol_errors_transmitted: int


@dataclass
class BerPoint:
    """Simulated and closed-form BER at one operating point.

    ``errors`` counts bit errors against the reference selected by the sweep
    (``errors_ideal`` or ``errors_transmitted``); ``symbol_errors`` likewise.
    """

    axis_value: float
    point: OperatingPoint
    bits: int
    errors: int
    errors_ideal: int
    errors_transmitted: int
    ci_low: float
    ci_high: float
    ber_analytic: float
    flagged: bool
    frames: int
    sigma: float
    symbols: int = 0
    symbol_errors: int = 0
    wall_time: float = 0.0

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    def band(self, n_sigma: float = 3.0) -> float:
        """Half-width of the ``n_sigma`` binomial band around the analytic BER.

        The independent trials are symbols: one symbol error flips several
        bits at once, so the band is that of the symbol error count, scaled
        to bits by P_b / P_s = M / (2 (M - 1)).
        """
        M = self.point.M
        ratio = M / (2.0 * (M - 1))
        ps = min(self.ber_analytic / ratio, 1.0)
        return n_sigma * ratio * math.sqrt(ps * (1.0 - ps) / self.symbols)

    def within_band(self, n_sigma: float = 3.0) -> bool:
        return abs(self.ber - self.ber_analytic) <= self.band(n_sigma)


@dataclass
class BerCurve:
    spec: SweepSpec
    points: list = field(default_factory=list)

    def rows(self):
        for pt in self.points:
            snr_db = pt.point.snr_db
            yield [pt.axis_value, pt.point.lam, pt.point.ebn0_db,
                   snr_db if snr_db is not None else float("nan"),
                   pt.bits, pt.errors, pt.ber, pt.ci_low, pt.ci_high, pt.ber_analytic,
                   int(pt.flagged)]

    def to_csv(self, fh=None) -> str:
        """Write the curve as CSV (to ``fh`` if given) and return the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def wilson_interval(errors: int, bits: int, confidence: float = 0.95):
    if bits <= 0:
        return float("nan"), float("nan")
    ci = stats.binomtest(int(errors), int(bits)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def frame_rng(seed: int, point_index: int, frame_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(point_index, frame_index))
    return np.random.Generator(np.random.Philox(ss))


def _receive(config: LinkConfig, psf: PsfPair, x_g, x_h, chan: ChannelSpec, rng):
    if config.detection is Detection.COHERENT:
        return receive_coherent(channel_coherent(x_g, x_h, chan, rng), psf)
    return receive_noncoherent(*channel_noncoherent(x_g, x_h, chan, rng), psf)


def simulate_frame(config: LinkConfig, psf: PsfPair, sigma: float, rng: np.random.Generator,
                   n_symbols: int, gain: float = 1.0, random_phase: bool = True) -> FrameResult:
    """Send one burst of ``n_symbols`` random symbols and count decision errors.

    Errors are counted both against the decode of the noiseless received
    waveform and against the transmitted bits.
    """
    nbits = n_symbols * config.bits_per_symbol
    tx_bits = rng.integers(0, 2, nbits, dtype=np.int8)
    train = symbols_to_train(bits_to_symbols(tx_bits, config), config)
    x_g, x_h = shape(train, psf)
    # one carrier phase per frame, shared by the noiseless reference path
    phase = float(rng.uniform(0.0, 2.0 * math.pi)) if (random_phase and config.detection is Detection.NONCOHERENT) else 0.0
    clean = _receive(config, psf, x_g, x_h, ChannelSpec(0.0, phase, gain), rng)
    noisy = _receive(config, psf, x_g, x_h, ChannelSpec(sigma, phase, gain), rng)
    ref_bits = symbols_to_bits(detect(clean, config, n_symbols), config)
    rx_bits = symbols_to_bits(detect(noisy, config, n_symbols), config)
    k = config.bits_per_symbol
    sym_ideal = np.any((rx_bits != ref_bits).reshape(-1, k), axis=1)
    sym_tx = np.any((rx_bits != tx_bits).reshape(-1, k), axis=1)
    return FrameResult(nbits, int(np.count_nonzero(rx_bits != ref_bits)), int(np.count_nonzero(rx_bits != tx_bits)),
                       n_symbols, int(sym_ideal.sum()), int(sym_tx.sum()))


def _run_point(spec: SweepSpec, psf: PsfPair, index: int, value: float, pool) -> BerPoint:
    t0 = time.perf_counter()
    point = spec.operating_point(value)
    sigma = calibrate_noise(spec.config, psf, lam=point.lam, gain=spec.gain).sigma
    threads = pool._max_workers if pool is not None else 1

    def work(f):
        return simulate_frame(spec.config, psf, sigma, frame_rng(spec.seed, index, f),
                              spec.symbols_per_frame, spec.gain, spec.random_phase)

    total = np.zeros(len(FrameResult._fields), dtype=np.int64)
    ideal = spec.reference == "ideal"
    frames = 0
    done = False
    while not done:
        wave = range(frames, frames + 2 * threads)
        results = list(pool.map(work, wave)) if pool is not None else [work(f) for f in wave]
        for res in results:
            total += res
            frames += 1
            acc = FrameResult(*total.tolist())
            errors = acc.errors_ideal if ideal else acc.errors_transmitted
            if errors >= spec.min_errors or acc.bits >= spec.max_bits:
                done = True
                break
    lo, hi = wilson_interval(errors, acc.bits)
    sym_errors = acc.symbol_errors_ideal if ideal else acc.symbol_errors_transmitted
    return BerPoint(value, point, acc.bits, errors, acc.errors_ideal, acc.errors_transmitted, lo, hi,
                    analytic_ber(spec.config, point), errors < spec.min_errors, frames, sigma,
                    acc.symbols, sym_errors, time.perf_counter() - t0)


def run_sweep(spec: SweepSpec, psf: Optional[PsfPair] = None) -> BerCurve:
    """Simulate every grid point of ``spec`` and pair it with the closed form.

    Points that hit ``max_bits`` before ``min_errors`` are kept and flagged.
    """
    psf = psf if psf is not None else default_psf()
    if psf.length != spec.config.psf_length:
        raise ValueError(f"PSF length {psf.length} does not match config psf_length {spec.config.psf_length}")
    threads = spec.threads or default_threads()
    curve = BerCurve(spec)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            curve.points = [_run_point(spec, psf, i, v, pool) for i, v in enumerate(spec.values)]
    else:
        curve.points = [_run_point(spec, psf, i, v, None) for i, v in enumerate(spec.values)]
    return curve


def empirical_lambda(config: LinkConfig, sigma: float, trials: int = 1_000_000,
                     psf: Optional[PsfPair] = None, gain: float = 1.0, seed: int = 0) -> float:
    """Measured A^2 / sigma_n^2 of the receiver chain for noise std ``sigma``."""
    if trials < 100_000:
        raise ValueError("empirical_lambda needs at least 1e5 noise samples")
    return measure_lambda(config, psf if psf is not None else default_psf(), sigma, trials, gain, seed)


def lambda_for_ber(config: LinkConfig, target: float) -> float:
    """Operating point ``lam`` at which the closed-form BER equals ``target``."""
    if not 0 < target < 0.5:
        raise ValueError("target BER must lie in (0, 0.5)")

    def f(lam):
        return math.log(analytic_ber(config, lam)) - math.log(target)

    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    return optimize.brentq(f, 0.0 if f(0.0) > 0 else hi / 2, hi, xtol=1e-12, rtol=1e-12)
