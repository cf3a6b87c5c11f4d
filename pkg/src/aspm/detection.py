"""Hard symbol decisions from sampled matched-filter outputs.

Symbol timing is assumed known: frame ``j`` is sampled at
``guard + j*Np + offset[m] + delay`` for every candidate position ``m``.
Ties go to the smallest position index.
"""

from __future__ import annotations

import numpy as np

from .coding import Detection, LinkConfig, Signaling, SymbolStream
from .link import ReceiverOutput

__all__ = ["DetectionError", "sample_candidates", "detect_coherent", "detect_noncoherent", "detect"]


class DetectionError(ValueError):
    pass


def _frame_count(out: ReceiverOutput, config: LinkConfig) -> int:
    # full convolution of a train of (S + 2) Np + psf_length samples
    n = out.y.size - out.delay - config.psf_length
    return max(n // config.Np - 2, 0)


def sample_candidates(out: ReceiverOutput, config: LinkConfig, n_symbols: int | None = None) -> np.ndarray:
    """Receiver output at every candidate instant, shape (n_symbols, n_positions)."""
    if n_symbols is None:
        n_symbols = _frame_count(out, config)
    j = np.arange(n_symbols)[:, None]
    idx = config.guard + j * config.Np + config.offsets[None, :] + out.delay
    if idx.size and idx.max() >= out.y.size:
        raise DetectionError(f"frame {n_symbols - 1} exceeds the receiver output ({out.y.size} samples)")
    return out.y[idx]


def detect_coherent(out: ReceiverOutput, config: LinkConfig, n_symbols: int | None = None,
                    magnitude: bool = True) -> SymbolStream:
    """Position by largest |y_c|; for bipolar signaling the polarity bit is
    the sign of the winning sample.

    For unipolar signaling ``magnitude=False`` selects the largest signed
    sample instead; the default compares magnitudes, the rule behind the
    folded-normal error analysis.
    """
    if config.detection is not Detection.COHERENT:
        raise DetectionError("detect_coherent needs a coherent configuration")
    y = sample_candidates(out, config, n_symbols)
    bipolar = config.signaling is Signaling.BIPOLAR
    score = np.abs(y) if (bipolar or magnitude) else y
    best = np.argmax(score, axis=1)
    if bipolar:
        polarity = (y[np.arange(y.shape[0]), best] < 0).astype(np.int8)
    else:
        polarity = np.zeros(best.size, np.int8)
    return SymbolStream(best + 1, polarity)


def detect_noncoherent(out: ReceiverOutput, config: LinkConfig, n_symbols: int | None = None) -> SymbolStream:
    if config.detection is not Detection.NONCOHERENT:
        raise DetectionError("detect_noncoherent needs a noncoherent configuration")
    y2 = sample_candidates(out, config, n_symbols)
    best = np.argmax(y2, axis=1)
    return SymbolStream(best + 1, np.zeros(best.size, np.int8))


def detect(out: ReceiverOutput, config: LinkConfig, n_symbols: int | None = None) -> SymbolStream:
    if config.detection is Detection.COHERENT:
        return detect_coherent(out, config, n_symbols)
    return detect_noncoherent(out, config, n_symbols)
