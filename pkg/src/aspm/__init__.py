"""Aggregate spread pulse modulation (ASPM): pulse shaping, link simulation
and closed-form error rates."""

from .analytics import (OperatingPoint, analytic_ber, ber_binary, ber_coherent, ber_coherent_unipolar,
                        ber_noncoherent, convert, ser_coherent, ser_noncoherent)
from .coding import (ConfigError, DesignedTrain, Detection, LinkConfig, Signaling, SymbolStream,
                     bits_to_symbols, symbols_to_bits, symbols_to_train)
from .detection import DetectionError, detect
from .harness import BerCurve, BerPoint, SweepSpec, empirical_lambda, run_sweep
from .link import ChannelSpec, calibrate_noise, receive_coherent, receive_noncoherent, shape
from .shaping import PsfPair, acf_diagnostics, default_psf, design_psf, load_psf, save_psf

__version__ = "0.1.0"

__all__ = [
    "OperatingPoint", "analytic_ber", "ber_binary", "ber_coherent", "ber_coherent_unipolar",
    "ber_noncoherent", "convert", "ser_coherent", "ser_noncoherent",
    "ConfigError", "DesignedTrain", "Detection", "LinkConfig", "Signaling", "SymbolStream",
    "bits_to_symbols", "symbols_to_bits", "symbols_to_train",
    "DetectionError", "detect",
    "BerCurve", "BerPoint", "SweepSpec", "empirical_lambda", "run_sweep",
    "ChannelSpec", "calibrate_noise", "receive_coherent", "receive_noncoherent", "shape",
    "PsfPair", "acf_diagnostics", "default_psf", "design_psf", "load_psf", "save_psf",
]
