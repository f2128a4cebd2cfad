"""Optical front end: comb synthesis, carrier modulation, slicing, LO
singulation and balanced heterodyne detection.

All fields are complex envelopes referenced to the modulated carrier, which
therefore sits at envelope frequency 0.  Frequency bookkeeping for ``M``
slices of width ``f_r`` with guard ``f_g``:

* slice ``m`` spans ``[m*f_r - f_g, (m+1)*f_r - f_g)``;
* its local oscillator is the comb line at ``m*f_r - 2*f_g``;
* every signal/LO beat is therefore at least ``f_g`` above DC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from slicedadc.errors import ConfigurationError
from slicedadc.noise import PhasePath
from slicedadc.sigkit import (
    BandMask,
    TimeGrid,
    Waveform,
    brickwall_bank,
    brickwall_filter,
)

TransducerMode = Literal["linear", "mzm"]


@dataclass(frozen=True)
class FrequencyPlan:
    """Slice, guard-band and LO layout.

    ``lo_bw_hz`` is the width of the filter that singulates each LO line;
    ``None`` selects ``2 * guard_hz``, the widest filter that keeps every
    beat at non-negative frequency.
    """

    n_slices: int
    slice_bw_hz: float
    guard_hz: float
    lo_bw_hz: float | None = None

    def __post_init__(self) -> None:
        if int(self.n_slices) != self.n_slices or self.n_slices < 1:
            raise ConfigurationError(f"plan.n_slices must be an integer >= 1, got {self.n_slices!r}")
        object.__setattr__(self, "n_slices", int(self.n_slices))
        if not self.slice_bw_hz > 0:
            raise ConfigurationError("plan.slice_bw must be > 0")
        if not (0 < self.guard_hz < self.slice_bw_hz / 4):
            raise ConfigurationError(
                f"plan.guard must satisfy 0 < guard < slice_bw/4 "
                f"(= {self.slice_bw_hz / 4:.6g} Hz), got {self.guard_hz:.6g} Hz"
            )
        if self.lo_bw_hz is None:
            object.__setattr__(self, "lo_bw_hz", 2.0 * self.guard_hz)
        if not (0 < self.lo_bw_hz <= self.slice_bw_hz):
            raise ConfigurationError("plan.lo_bw must lie in (0, slice_bw]")

    @property
    def rep_rate_hz(self) -> float:
        return self.slice_bw_hz

    @property
    def band(self) -> BandMask:
        """Full sliced band ``[-f_g, M*f_r - f_g)``."""
        return BandMask(-self.guard_hz, self.n_slices * self.slice_bw_hz - self.guard_hz)

    def _check_m(self, m: int) -> None:
        if not (0 <= m < self.n_slices):
            raise ConfigurationError(f"slice index {m} outside 0..{self.n_slices - 1}")

    def slice_band(self, m: int) -> BandMask:
        self._check_m(m)
        fr, fg = self.slice_bw_hz, self.guard_hz
        return BandMask(m * fr - fg, (m + 1) * fr - fg)

    def lo_freq(self, m: int) -> float:
        self._check_m(m)
        return m * self.slice_bw_hz - 2.0 * self.guard_hz

    def lo_band(self, m: int) -> BandMask:
        f0 = self.lo_freq(m)
        return BandMask(f0 - self.lo_bw_hz / 2, f0 + self.lo_bw_hz / 2)

    def slice_index(self, freq_hz: float) -> int:
        """Slice containing the upper sideband at ``freq_hz``."""
        m = math.floor((freq_hz + self.guard_hz) / self.slice_bw_hz)
        if not (0 <= m < self.n_slices) or freq_hz <= 0:
            raise ConfigurationError(
                f"signal frequency {freq_hz:.6g} Hz is outside the sliced band "
                f"(0, {self.band.f_hi:.6g}) Hz"
            )
        return m

    @property
    def max_beat_hz(self) -> float:
        """Highest signal/LO beat frequency a slice can produce."""
        return self.slice_bw_hz + self.guard_hz + self.lo_bw_hz / 2

    @property
    def min_beat_hz(self) -> float:
        return self.guard_hz - self.lo_bw_hz / 2


@dataclass(frozen=True)
class CombSpec:
    """Mode-locked-laser comb: ``n_lines`` lines spaced by ``rep_rate_hz``.

    ``center_index`` is 1-based.  ``center_offset_hz`` is the envelope
    frequency of the centre line relative to the modulated carrier.
    """

    n_lines: int
    rep_rate_hz: float
    center_index: int
    amplitudes: np.ndarray
    static_phases_rad: np.ndarray
    center_offset_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.n_lines < 1:
            raise ConfigurationError("comb needs at least one line")
        if not (1 <= self.center_index <= self.n_lines):
            raise ConfigurationError("comb center_index must lie in 1..n_lines")
        amps = np.array(self.amplitudes, dtype=np.float64).reshape(-1)
        phases = np.array(self.static_phases_rad, dtype=np.float64).reshape(-1)
        if amps.shape != (self.n_lines,) or phases.shape != (self.n_lines,):
            raise ConfigurationError("comb amplitudes/phases must have n_lines entries")
        if np.any(amps <= 0):
            raise ConfigurationError("comb amplitudes must be > 0")
        amps.flags.writeable = False
        phases.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "static_phases_rad", phases)

    def line_freqs(self) -> np.ndarray:
        n = np.arange(1, self.n_lines + 1)
        return self.center_offset_hz + (n - self.center_index) * self.rep_rate_hz


def comb_for_plan(
    plan: FrequencyPlan,
    amplitudes: Sequence[float] | float = 1.0,
    static_phases_rad: Sequence[float] | float = 0.0,
) -> CombSpec:
    """Comb with one line per slice LO; line 1 (the slice-0 LO) is the centre
    line, so the jitter phase of slice ``m``'s LO is ``m * 2 pi f_r dt_r``."""
    n = plan.n_slices
    return CombSpec(
        n_lines=n,
        rep_rate_hz=plan.slice_bw_hz,
        center_index=1,
        amplitudes=np.broadcast_to(np.asarray(amplitudes, dtype=float), (n,)),
        static_phases_rad=np.broadcast_to(np.asarray(static_phases_rad, dtype=float), (n,)),
        center_offset_hz=plan.lo_freq(0),
    )


@dataclass(frozen=True)
class ToneSpec:
    """RF test tone.

    ``amplitude`` is the modulation index ``a``.  In ``linear`` mode the
    field is ``1 + a cos``; in ``mzm`` mode it is the quadrature-biased
    cosine field transfer with ``a`` the drive as a fraction of the bias
    angle, which must lie in [0, 1).
    """

    freq_hz: float
    amplitude: float
    mode: TransducerMode = "linear"
    phase_rad: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("linear", "mzm"):
            raise ConfigurationError(f"unknown transducer mode {self.mode!r}")
        if not self.freq_hz > 0:
            raise ConfigurationError("tone frequency must be > 0")
        if self.amplitude < 0:
            raise ConfigurationError("modulation index must be >= 0")
        if self.mode == "mzm" and not (0 <= self.amplitude < 1):
            raise ConfigurationError("mzm drive amplitude must lie in (0, 1)")

    def check_plan(self, plan: FrequencyPlan) -> None:
        if not self.freq_hz < plan.band.f_hi:
            raise ConfigurationError(
                f"tone at {self.freq_hz:.6g} Hz: upper sideband falls outside the sliced band"
            )


def synthesize_comb(
    spec: CombSpec,
    theta_c: PhasePath,
    delta_t_r: np.ndarray,
    grid: TimeGrid,
) -> Waveform:
    """Comb envelope with common optical phase ``theta_c`` and timing
    jitter ``delta_t_r`` (s); line ``n`` picks up ``(n - n_c) 2 pi f_r dt_r``."""
    freqs = spec.line_freqs()
    ny = grid.nyquist
    if freqs.min() <= -ny or freqs.max() >= ny:
        raise ConfigurationError("comb lines exceed the simulation Nyquist band")
    delta_t_r = np.asarray(delta_t_r, dtype=np.float64)
    if theta_c.phase.shape != (grid.n,) or delta_t_r.shape != (grid.n,):
        raise ConfigurationError("comb noise paths must lie on the simulation grid")
    t = grid.t
    # Lines are built by stepping a base phasor with the spacing phasor, which
    # costs one complex exponential per noise term instead of one per line.
    first = 1 - spec.center_index
    base = np.exp(2j * math.pi * (spec.center_offset_hz + first * spec.rep_rate_hz) * t)
    step = np.exp(2j * math.pi * spec.rep_rate_hz * t)
    if np.any(delta_t_r):
        jitter = np.exp(2j * math.pi * spec.rep_rate_hz * delta_t_r)
        base *= np.exp(2j * math.pi * first * spec.rep_rate_hz * delta_t_r)
        step *= jitter
    acc = np.zeros(grid.n, dtype=np.complex128)
    line = base
    for i in range(spec.n_lines):
        acc += (spec.amplitudes[i] * np.exp(1j * spec.static_phases_rad[i])) * line
        if i + 1 < spec.n_lines:
            line = line * step
    if np.any(theta_c.phase):
        acc *= np.exp(1j * theta_c.phase)
    return Waveform(grid, acc)


def modulate_carrier(
    theta_0: PhasePath,
    tone: ToneSpec | Sequence[ToneSpec],
    grid: TimeGrid,
) -> Waveform:
    """Carrier envelope ``e^{j theta_0}`` amplitude-modulated by one or more tones.

    linear: ``1 + sum a cos(2 pi f t + p)``;
    mzm: ``cos(pi/4 + (pi/4) sum a cos(2 pi f t + p))``, the quadrature-biased
    field transfer of a push-pull modulator.
    """
    tones = [tone] if isinstance(tone, ToneSpec) else list(tone)
    if not tones:
        raise ConfigurationError("at least one tone is required")
    modes = {tn.mode for tn in tones}
    if len(modes) != 1:
        raise ConfigurationError("all tones must share one transducer mode")
    for tn in tones:
        if not grid.is_on_bin(tn.freq_hz):
            raise ConfigurationError(
                f"tone at {tn.freq_hz:.6g} Hz is not on a grid bin "
                f"(resolution {grid.df:.6g} Hz)"
            )
        if tn.freq_hz >= grid.nyquist:
            raise ConfigurationError("tone exceeds the simulation Nyquist frequency")
    t = grid.t
    drive = np.zeros(grid.n)
    for tn in tones:
        if tn.amplitude:
            drive += tn.amplitude * np.cos(2.0 * math.pi * tn.freq_hz * t + tn.phase_rad)
    if modes == {"linear"}:
        env = 1.0 + drive
    else:
        env = np.cos(math.pi / 4 * (1.0 + drive))
    env = env.astype(np.complex128)
    if np.any(theta_0.phase):
        env *= np.exp(1j * theta_0.phase)
    return Waveform(grid, env)


def slice_signal(modulated: Waveform, plan: FrequencyPlan, m: int) -> Waveform:
    """Ideal optical slice ``m`` of the modulated field."""
    return brickwall_filter(modulated, plan.slice_band(m))


def slice_all(modulated: Waveform, plan: FrequencyPlan) -> list[Waveform]:
    """All slices of the modulated field (one forward FFT)."""
    return brickwall_bank(modulated, [plan.slice_band(m) for m in range(plan.n_slices)])


def _check_line_present(comb: Waveform, line: Waveform, m: int) -> None:
    total = comb.power()
    if total == 0 or line.power() < 1e-6 * total:
        raise ConfigurationError(f"no comb line inside the LO filter of slice {m}")


def isolate_lo_line(comb: Waveform, plan: FrequencyPlan, m: int) -> tuple[Waveform, np.ndarray]:
    """Singulate the LO line of slice ``m``.

    Returns the filtered line and the power-tap monitor ``|E(t)|^2``.
    """
    line = brickwall_filter(comb, plan.lo_band(m))
    _check_line_present(comb, line, m)
    return line, np.abs(line.samples) ** 2


def isolate_all(comb: Waveform, plan: FrequencyPlan) -> list[tuple[Waveform, np.ndarray]]:
    lines = brickwall_bank(comb, [plan.lo_band(m) for m in range(plan.n_slices)])
    out = []
    for m, line in enumerate(lines):
        _check_line_present(comb, line, m)
        out.append((line, np.abs(line.samples) ** 2))
    return out


def balanced_detect(signal_slice: Waveform, lo_line: Waveform) -> Waveform:
    """Ideal balanced pair behind a 3-dB coupler: ``i = 2 Re{a_s conj(a_L)}``."""
    if not signal_slice.grid.same_as(lo_line.grid):
        raise ConfigurationError("signal and LO are on different grids")
    i = 2.0 * np.real(signal_slice.samples * np.conj(lo_line.samples))
    return Waveform(signal_slice.grid, i, "real")
