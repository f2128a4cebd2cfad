"""Waveform-level simulator and jitter calculator for spectrally sliced,
optically enabled ADCs."""

from slicedadc.errors import (
    CalibrationError,
    ConfigurationError,
    SampleRangeError,
    SlicedAdcError,
)

__all__ = [
    "CalibrationError",
    "ConfigurationError",
    "SampleRangeError",
    "SlicedAdcError",
]

__version__ = "0.1.0"
