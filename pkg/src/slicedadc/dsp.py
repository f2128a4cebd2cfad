"""Digital stitching of the digitized slices back into one broadband record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from slicedadc.digitizer import DigitizedSlice
from slicedadc.errors import CalibrationError, ConfigurationError
from slicedadc.optics import FrequencyPlan
from slicedadc.sigkit import (
    TimeGrid,
    Waveform,
    analytic_from_samples,
    band_limited_field,
    fourier_resample,
    tone_phasor,
)

PILOT_DETECT_FLOOR = 10 ** (-40 / 20)


@dataclass(frozen=True)
class SliceChannel:
    """One digitized slice plus what the stitcher needs to place it.

    ``rin_monitor`` is the LO power tap ``|E(t)|^2`` sampled at the same
    instants as ``digitized``.
    """

    slice_index: int
    digitized: DigitizedSlice
    lo_offset_hz: float
    lo_amplitude: float = 1.0
    rin_monitor: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.rin_monitor is not None:
            mon = np.array(self.rin_monitor, dtype=np.float64)
            if mon.shape != self.digitized.samples.shape:
                raise ConfigurationError("RIN monitor length differs from the digitized record")
            if np.any(mon <= 0):
                raise ConfigurationError("RIN monitor must be strictly positive")
            mon.flags.writeable = False
            object.__setattr__(self, "rin_monitor", mon)
        if not self.lo_amplitude > 0:
            raise ConfigurationError("LO amplitude must be > 0")


@dataclass(frozen=True)
class PhaseCorrection:
    """Estimated static LO phase per slice; applied as ``e^{+j phi}``."""

    offsets_rad: tuple[float, ...]
    source: Literal["oracle", "pilot"] = "oracle"

    @classmethod
    def zeros(cls, n_slices: int) -> "PhaseCorrection":
        return cls(tuple([0.0] * n_slices), "oracle")


@dataclass(frozen=True)
class ReconstructionResult:
    field: Waveform
    signal: Waveform
    phasors: list[np.ndarray] = field(repr=False)


@dataclass(frozen=True)
class PilotRecord:
    """Digitized calibration record of slice ``slice_index`` carrying a pilot
    sideband at ``pilot_freq_hz`` (envelope frame) launched with
    ``launch_phase_rad``; ``expected_amplitude`` is the noiseless beat
    amplitude."""

    slice_index: int
    digitized: DigitizedSlice
    pilot_freq_hz: float
    launch_phase_rad: float
    expected_amplitude: float


def _wrap(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(phi, 2 * math.pi)
    return math.pi if w == -math.pi else w


def _bins(freq_hz: float, period_s: float) -> int:
    k = freq_hz * period_s
    kr = round(k)
    if abs(k - kr) > 1e-6:
        raise ConfigurationError(
            f"LO offset {freq_hz:.6g} Hz is not an integer number of cycles per record"
        )
    return int(kr)


def reconstruct(
    channels: Sequence[SliceChannel],
    plan: FrequencyPlan,
    corr: PhaseCorrection,
    rin_cancel: bool,
    recon_grid: TimeGrid,
) -> ReconstructionResult:
    """Stitch digitized slices into the composite field ``F`` and ``S = |F|^2``.

    Per slice: analytic phasor of the digitized photocurrent, band-limited
    upsampling to ``recon_grid`` fused with the shift up by the slice's LO
    offset, normalisation by ``2 sqrt(monitor)`` (or ``2 E``), and the
    static phase correction.  The detector beat carries a factor 2, which the
    normalisation removes so ``S`` is on the scale of the input field.

    The monitor division happens after upsampling: the phasor and the
    monitor are each band-limited, their quotient is not.
    """
    by_index = {ch.slice_index: ch for ch in channels}
    missing = [m for m in range(plan.n_slices) if m not in by_index]
    if missing:
        raise ConfigurationError(f"missing channels for slices {missing}")
    if len(corr.offsets_rad) != plan.n_slices:
        raise ConfigurationError("phase correction length differs from the slice count")
    period = recon_grid.duration
    acc = np.zeros(recon_grid.n, dtype=np.complex128)
    phasors = []
    for m in range(plan.n_slices):
        ch = by_index[m]
        d = ch.digitized
        if abs(d.duration - period) > 1e-9 * period:
            raise ConfigurationError(
                "digitized record does not span the reconstruction period; "
                "the digitizer rate times the duration must be an integer"
            )
        if d.samples.shape[0] > recon_grid.n:
            raise ConfigurationError("reconstruction grid is coarser than the digitizer")
        p = analytic_from_samples(d.samples)
        up = fourier_resample(p, recon_grid.n, _bins(ch.lo_offset_hz, period))
        if rin_cancel:
            if ch.rin_monitor is None:
                raise ConfigurationError(f"RIN cancellation requested but slice {m} has no monitor")
            mon = np.real(fourier_resample(ch.rin_monitor, recon_grid.n))
            up /= 2.0 * np.sqrt(np.clip(mon, 1e-300, None))
        else:
            up /= 2.0 * ch.lo_amplitude
        up *= np.exp(1j * corr.offsets_rad[m])
        phasors.append(up)
        acc += up
    fld = Waveform(recon_grid, acc)
    sig = Waveform(recon_grid, np.abs(acc) ** 2, "real")
    return ReconstructionResult(fld, sig, phasors)


def estimate_static_phases(
    calibration_channels: Sequence[PilotRecord],
    plan: FrequencyPlan,
) -> PhaseCorrection:
    """Per-slice static LO phase from pilot tones.

    The pilot beat in slice ``m`` sits at ``f_pilot - LO_m`` with phase
    ``launch - phi_m``; the estimate is ``launch - measured``, wrapped to
    (-pi, pi].
    """
    by_index = {r.slice_index: r for r in calibration_channels}
    offsets = []
    for m in range(plan.n_slices):
        if m not in by_index:
            raise CalibrationError(f"no pilot record for slice {m}")
        rec = by_index[m]
        beat = rec.pilot_freq_hz - plan.lo_freq(m)
        c = tone_phasor(rec.digitized.samples, rec.digitized.rate, beat)
        if abs(c) < PILOT_DETECT_FLOOR * rec.expected_amplitude:
            raise CalibrationError(
                f"pilot in slice {m} at {abs(c):.3g} is below -40 dB of the expected "
                f"{rec.expected_amplitude:.3g}"
            )
        offsets.append(_wrap(rec.launch_phase_rad - float(np.angle(c))))
    return PhaseCorrection(tuple(offsets), "pilot")


def ssb_reference(modulated: Waveform, plan: FrequencyPlan, recon_grid: TimeGrid) -> Waveform:
    """``|F_ref|^2`` where ``F_ref`` keeps the carrier and upper sidebands
    inside the sliced band ``[-f_g, M f_r - f_g)``."""
    ref = band_limited_field(modulated, plan.band, recon_grid).samples
    return Waveform(recon_grid, np.abs(ref) ** 2, "real")
