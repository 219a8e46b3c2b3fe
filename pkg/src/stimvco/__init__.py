"""Behavioural models for a wirelessly programmed biphasic stimulator and
phase-noise waveform analysis for harmonic VCOs.

Subpackages and modules:

``tissue``    electrode/tissue load impedance and transient response
``stim``      waveform tables, DAC, charge accounting and passive balance
``power``     charge-pump converter and its regulation loop
``refclock``  bandgap current reference and relaxation oscillator
``codec``     parameter memory image, framing and BPSK baseband
``vco``       ISF/NMF analysis, feedback-line ratio, harmonic power, formulas
``cli``       command-line front end
"""

from .errors import (
    CodecError,
    DomainError,
    FrameError,
    LengthError,
    OverloadError,
    StimVcoError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "CodecError",
    "DomainError",
    "FrameError",
    "LengthError",
    "OverloadError",
    "StimVcoError",
    "ValidationError",
    "__version__",
]
