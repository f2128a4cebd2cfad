"""Wiener phase-noise generation and the linewidth/jitter arithmetic.

A Lorentzian full linewidth ``dnu`` (Hz) corresponds to a Wiener phase with
increment variance ``2*pi*dnu*dt`` per step.  Timing jitter of an oscillator
at ``f_osc`` is its phase divided by ``2*pi*f_osc``, so the RMS jitter
accumulated after a time ``t`` is ``sqrt(2*pi*dnu*t) / (2*pi*f_osc)``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from slicedadc.errors import ConfigurationError
from slicedadc.sigkit import TimeGrid

ROLES = ("carrier", "mll_optical", "mll_rf", "elec", "static_phase", "pilot")


@dataclass(frozen=True)
class NoiseSpec:
    """Linewidths of the four independent phase-noise sources.

    ``carrier_linewidth_hz`` is the modulated ECL carrier, ``mll_optical``
    the phase common to all comb lines, ``mll_rf`` the beat-note linewidth
    that sets the pulse-train timing jitter, and ``elec`` the ADC clock
    oscillator, specified at ``elec_osc_freq_hz``.
    """

    carrier_linewidth_hz: float = 0.0
    mll_optical_linewidth_hz: float = 0.0
    mll_rf_linewidth_hz: float = 0.0
    elec_linewidth_hz: float = 0.0
    elec_osc_freq_hz: float = 60e9
    carrier_enabled: bool = False
    mll_optical_enabled: bool = False
    mll_rf_enabled: bool = False
    elec_enabled: bool = False

    def __post_init__(self) -> None:
        for name in (
            "carrier_linewidth_hz",
            "mll_optical_linewidth_hz",
            "mll_rf_linewidth_hz",
            "elec_linewidth_hz",
        ):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"noise.{name} must be >= 0")
        if self.elec_enabled and not self.elec_osc_freq_hz > 0:
            raise ConfigurationError("noise.elec_osc_freq_hz must be > 0 when the clock source is enabled")

    def effective(self, source: str) -> float:
        """Linewidth of ``source`` after applying its enable flag."""
        lw = getattr(self, f"{source}_linewidth_hz")
        return lw if getattr(self, f"{source}_enabled") else 0.0


@dataclass(frozen=True)
class PhasePath:
    """One Wiener phase realisation in radians, starting at zero."""

    grid: TimeGrid
    phase: np.ndarray
    linewidth_hz: float
    seed: int

    def __post_init__(self) -> None:
        arr = np.array(self.phase, dtype=np.float64)
        if arr.shape != (self.grid.n,):
            raise ConfigurationError("phase path length does not match its grid")
        arr.flags.writeable = False
        object.__setattr__(self, "phase", arr)

    def at(self, times: np.ndarray) -> np.ndarray:
        """Phase linearly interpolated at arbitrary instants within the record."""
        return np.interp(times, self.grid.t, self.phase)


def derive_seed(master_seed: int, role: str, run_index: int = 0, frequency_index: int = 0) -> int:
    """Per-path 64-bit seed.

    The seed is the first eight bytes (little endian) of
    ``blake2b(pack('<Q', master) + role.encode() + pack('<QQ', run, freq))``
    with every integer reduced modulo ``2**64``, so derived seeds can serve
    as masters again.  Every path is fixed by its coordinates and does not
    depend on the order in which a sweep is executed.
    """
    h = hashlib.blake2b(digest_size=8)
    mask = (1 << 64) - 1
    h.update(struct.pack("<Q", int(master_seed) & mask))
    h.update(role.encode("utf-8"))
    h.update(struct.pack("<QQ", int(run_index) & mask, int(frequency_index) & mask))
    return int.from_bytes(h.digest(), "little")


def wiener_path(linewidth_hz: float, grid: TimeGrid, seed: int) -> PhasePath:
    """Generate a Wiener phase path with ``phase[0] = 0``."""
    if not linewidth_hz >= 0:
        raise ConfigurationError(f"linewidth must be >= 0, got {linewidth_hz!r}")
    phase = np.zeros(grid.n)
    if linewidth_hz > 0:
        rng = np.random.default_rng(seed)
        sigma = math.sqrt(2.0 * math.pi * linewidth_hz * grid.dt)
        np.cumsum(rng.normal(0.0, sigma, grid.n - 1), out=phase[1:])
    return PhasePath(grid, phase, float(linewidth_hz), int(seed))


def zero_path(grid: TimeGrid) -> PhasePath:
    return PhasePath(grid, np.zeros(grid.n), 0.0, 0)


def path_to_jitter(p: PhasePath, osc_freq_hz: float) -> np.ndarray:
    """Timing jitter (s) of an oscillator at ``osc_freq_hz`` carrying phase ``p``."""
    if not osc_freq_hz > 0:
        raise ConfigurationError(f"oscillator frequency must be > 0, got {osc_freq_hz!r}")
    return p.phase / (2.0 * math.pi * osc_freq_hz)


def jitter_rms(linewidth_hz: float, t_seconds: float, osc_freq_hz: float) -> float:
    """RMS jitter accumulated after ``t_seconds``: sqrt(2 pi dnu t) / (2 pi f)."""
    if linewidth_hz < 0 or t_seconds < 0:
        raise ConfigurationError("linewidth and time must be >= 0")
    if not osc_freq_hz > 0:
        raise ConfigurationError("oscillator frequency must be > 0")
    return math.sqrt(2.0 * math.pi * linewidth_hz * t_seconds) / (2.0 * math.pi * osc_freq_hz)


def effective_jitter(linewidth_hz: float, record_s: float, osc_freq_hz: float) -> float:
    """Record-averaged RMS jitter of a Wiener source that starts at zero.

    The phase variance grows linearly over the record, so its time average is
    half the end-of-record value: ``jitter_rms(dnu, T/2, f)``.
    """
    return jitter_rms(linewidth_hz, record_s / 2.0, osc_freq_hz)


def rescale_jitter(jitter_s: float, t_from_s: float, t_to_s: float) -> float:
    """Rescale an integrated Wiener jitter to another observation time (sqrt law)."""
    if not (t_from_s > 0 and t_to_s > 0):
        raise ConfigurationError("rescale times must be > 0")
    return jitter_s * math.sqrt(t_to_s / t_from_s)
