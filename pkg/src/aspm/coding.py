"""Bit <-> symbol <-> designed-pulse-train mapping for M-ary ASPM.

A symbol is a pulse position index ``m`` (1-based) plus, for bipolar
signaling, a polarity bit ``a`` giving amplitude ``(-1)**a``.  Position ``m``
sits ``(m - 1) * n`` samples into its frame of ``Np`` samples.  Bits map to
positions in natural binary, most significant bit first; for bipolar
signaling the last bit of each group is the polarity bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ConfigError",
    "Signaling",
    "Detection",
    "LinkConfig",
    "SymbolStream",
    "DesignedTrain",
    "bits_to_symbols",
    "symbols_to_bits",
    "symbols_to_train",
]


class ConfigError(ValueError):
    pass


class Signaling(str, Enum):
    BIPOLAR = "bipolar"
    UNIPOLAR = "unipolar"


class Detection(str, Enum):
    COHERENT = "coherent"
    NONCOHERENT = "noncoherent"


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class LinkConfig:
    """Static parameters of an M-ASPM link.

    Parameters
    ----------
    M : int
        Alphabet size (power of two, >= 2).
    Np : int
        Interpulse interval in samples.
    n : int
        Spacing between adjacent pulse positions, in samples.
    signaling, detection : str or enum
        ``bipolar``/``unipolar`` and ``coherent``/``noncoherent``.
    psf_length : int
        Length of the shaping filter the train will be filtered with.
    allow_overlap : bool
        Accept ``Np <= psf_length + max offset``.  Shaped pulses then pile up
        and the per-pulse constant envelope is lost; detection is unaffected.
    """

    M: int
    Np: int
    n: int
    signaling: Signaling = Signaling.BIPOLAR
    detection: Detection = Detection.COHERENT
    psf_length: int = 256
    psf_id: str = "default"
    allow_overlap: bool = False

    def __post_init__(self):
        object.__setattr__(self, "signaling", Signaling(self.signaling))
        object.__setattr__(self, "detection", Detection(self.detection))
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 2 and _is_power_of_two(int(self.M))):
            raise ConfigError(f"M must be a power of two >= 2, got {self.M!r}")
        if self.Np < 1 or self.n < 1 or self.psf_length < 1:
            raise ConfigError("Np, n and psf_length must be positive")
        if self.detection is Detection.NONCOHERENT and self.signaling is Signaling.BIPOLAR:
            raise ConfigError("noncoherent detection cannot recover polarity; use unipolar signaling")
        min_n = 2 if self.detection is Detection.COHERENT else 4
        if self.n < min_n:
            raise ConfigError(f"{self.detection.value} detection needs n >= {min_n}, got {self.n}")
        if self.max_offset >= self.Np:
            raise ConfigError(f"position offsets up to {self.max_offset} do not fit in Np={self.Np}")
        if not self.allow_overlap and self.Np <= self.psf_length + self.max_offset:
            raise ConfigError(
                f"pulses overlap: Np={self.Np} <= psf_length + max offset = "
                f"{self.psf_length + self.max_offset}; pass allow_overlap=True to accept"
            )

    @property
    def bits_per_symbol(self) -> int:
        return int(self.M).bit_length() - 1

    @property
    def n_positions(self) -> int:
        return self.M // 2 if self.signaling is Signaling.BIPOLAR else self.M

    @property
    def offsets(self) -> np.ndarray:
        """Position table: offset of position m (index m-1) within a frame."""
        return np.arange(self.n_positions) * self.n

    @property
    def max_offset(self) -> int:
        return (self.n_positions - 1) * self.n

    @property
    def guard(self) -> int:
        return self.Np

    @property
    def spreading_factor(self) -> float:
        """Bandwidth to bit-rate ratio B/f_b = Np / (2 log2 M)."""
        return self.Np / (2 * self.bits_per_symbol)

    def pulse_rate(self, fs: float = 1.0) -> float:
        return fs / self.Np

    def bit_rate(self, fs: float = 1.0) -> float:
        return self.pulse_rate(fs) * self.bits_per_symbol

    def to_dict(self) -> dict:
        return {
            "M": int(self.M), "Np": int(self.Np), "n": int(self.n),
            "signaling": self.signaling.value, "detection": self.detection.value,
            "psf_length": int(self.psf_length), "psf_id": self.psf_id,
            "allow_overlap": bool(self.allow_overlap),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkConfig":
        known = {"M", "Np", "n", "signaling", "detection", "psf_length", "psf_id", "allow_overlap"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown LinkConfig fields: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class SymbolStream:
    """Per-pulse decisions or transmit symbols.

    ``positions`` are 1-based; ``polarity`` holds the bipolar sign bit (all
    zeros for unipolar).  ``pad`` counts zero bits appended to complete the
    last symbol.
    """

    positions: np.ndarray
    polarity: np.ndarray
    pad: int = 0

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=np.int64).ravel())
        object.__setattr__(self, "polarity", np.asarray(self.polarity, dtype=np.int8).ravel())
        if self.positions.shape != self.polarity.shape:
            raise ValueError("positions and polarity must have equal length")

    def __len__(self):
        return self.positions.size

    def validate(self, config: LinkConfig):
        if self.positions.size and (self.positions.min() < 1 or self.positions.max() > config.n_positions):
            raise ValueError(f"symbol position outside 1..{config.n_positions}")
        if np.any((self.polarity != 0) & (self.polarity != 1)):
            raise ValueError("polarity bits must be 0 or 1")
        if config.signaling is Signaling.UNIPOLAR and np.any(self.polarity):
            raise ValueError("unipolar symbols cannot carry a polarity bit")


@dataclass(frozen=True)
class DesignedTrain:
    """Sparse pulse train: amplitude ``amplitudes[j]`` at sample ``indices[j]``."""

    length: int
    indices: np.ndarray
    amplitudes: np.ndarray
    n_symbols: int = 0
    meta: dict = field(default_factory=dict)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.length)
        x[self.indices] = self.amplitudes
        return x

    @property
    def n_pulses(self) -> int:
        return self.indices.size


def _bit_weights(nbits: int) -> np.ndarray:
    return 1 << np.arange(nbits - 1, -1, -1, dtype=np.int64)


def bits_to_symbols(bits, config: LinkConfig) -> SymbolStream:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    b = config.bits_per_symbol
    pad = (-bits.size) % b
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.int64)])
    groups = bits.reshape(-1, b)
    if config.signaling is Signaling.BIPOLAR:
        value = groups[:, :-1] @ _bit_weights(b - 1) if b > 1 else np.zeros(len(groups), np.int64)
        polarity = groups[:, -1]
    else:
        value = groups @ _bit_weights(b)
        polarity = np.zeros(len(groups), np.int64)
    return SymbolStream(value + 1, polarity, pad)


def symbols_to_bits(symbols: SymbolStream, config: LinkConfig) -> np.ndarray:
    symbols.validate(config)
    b = config.bits_per_symbol
    value = symbols.positions - 1
    if config.signaling is Signaling.BIPOLAR:
        shifts = np.arange(b - 2, -1, -1)
        pos_bits = (value[:, None] >> shifts) & 1
        out = np.concatenate([pos_bits, symbols.polarity[:, None].astype(np.int64)], axis=1)
    else:
        shifts = np.arange(b - 1, -1, -1)
        out = (value[:, None] >> shifts) & 1
    out = out.astype(np.int8).ravel()
    return out[: out.size - symbols.pad] if symbols.pad else out


def symbols_to_train(symbols: SymbolStream, config: LinkConfig) -> DesignedTrain:
    """Place one pulse per symbol at ``guard + j*Np + offset[m_j]``.

    The train carries one empty frame in front and one frame plus a filter
    length behind, so filtering transients never reach a sampled frame.
    """
    symbols.validate(config)
    count = len(symbols)
    j = np.arange(count)
    idx = config.guard + j * config.Np + config.offsets[symbols.positions - 1]
    amp = np.where(symbols.polarity == 1, -1.0, 1.0)
    length = (count + 2) * config.Np + config.psf_length
    return DesignedTrain(length, idx.astype(np.int64), amp, count, {"pad": symbols.pad})
