"""Per-slice electrical ADCs driven by a shared, jittered clock."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from slicedadc.errors import ConfigurationError
from slicedadc.noise import PhasePath, path_to_jitter
from slicedadc.optics import FrequencyPlan
from slicedadc.sigkit import Waveform, resample_at

AUTO_RATE_FACTOR = 2.2


def auto_rate(plan: FrequencyPlan, duration_s: float) -> float:
    """Default digitizer rate.

    The smallest rate >= 2.2 * (f_r + 2 f_g) that fits an integer number of
    samples into the record, so digitized records stay periodic.
    """
    target = AUTO_RATE_FACTOR * (plan.slice_bw_hz + 2.0 * plan.guard_hz)
    n = math.ceil(target * duration_s - 1e-9)
    return n / duration_s


def sample_count(duration_s: float, rate_hz: float) -> int:
    return int(math.floor(duration_s * rate_hz + 1e-9))


@dataclass(frozen=True)
class ClockModel:
    nominal_rate_hz: float
    osc_freq_hz: float
    phase_path: PhasePath

    def __post_init__(self) -> None:
        if not self.nominal_rate_hz > 0:
            raise ConfigurationError("digitizer rate must be > 0")
        if not self.osc_freq_hz > 0:
            raise ConfigurationError("clock oscillator frequency must be > 0")

    def check_plan(self, plan: FrequencyPlan) -> None:
        need = 2.0 * (plan.slice_bw_hz + 2.0 * plan.guard_hz)
        if self.nominal_rate_hz < need * (1 - 1e-12):
            raise ConfigurationError(
                f"digitizer rate {self.nominal_rate_hz / 1e9:.6g} GS/s is below the "
                f"Nyquist requirement {need / 1e9:.6g} GS/s for beats up to f_r + 2 f_g"
            )

    def instants(self, duration_s: float) -> tuple[np.ndarray, np.ndarray]:
        """Nominal clock instants and the jittered instants actually sampled."""
        n = sample_count(duration_s, self.nominal_rate_hz)
        nominal = np.arange(n) / self.nominal_rate_hz
        jitter = path_to_jitter(self.phase_path, self.osc_freq_hz)
        dt_e = np.interp(nominal, self.phase_path.grid.t, jitter)
        t = np.mod(nominal + dt_e, duration_s)
        # mod of a tiny negative value rounds to exactly duration_s.
        t[t >= duration_s] = 0.0
        return nominal, t


@dataclass(frozen=True)
class DigitizedSlice:
    slice_index: int
    samples: np.ndarray
    sample_period: float
    instants: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def rate(self) -> float:
        return 1.0 / self.sample_period

    @property
    def duration(self) -> float:
        return self.samples.shape[0] * self.sample_period


def _oversample_for(w: Waveform, max_freq_hz: float | None) -> int:
    if max_freq_hz is not None and max_freq_hz <= 0.4 * w.grid.nyquist:
        return 1
    return 2


def sample_with_jitter(
    i: Waveform,
    clk: ClockModel,
    slice_index: int = 0,
    plan: FrequencyPlan | None = None,
) -> DigitizedSlice:
    """Sample a photocurrent at the jittered clock instants.

    Sample ``k`` is the band-limited value of ``i`` at
    ``k/rate + dt_e(k/rate)``; instants wrap around the (periodic) record.
    Passing ``plan`` enables the Nyquist check and lets the interpolator skip
    oversampling when the beat band is far below the simulation Nyquist.
    """
    if i.kind != "real":
        raise ConfigurationError("digitizer expects a real photocurrent")
    max_f = None
    if plan is not None:
        clk.check_plan(plan)
        max_f = plan.max_beat_hz
    _, times = clk.instants(i.grid.duration)
    vals = resample_at(i, times, oversample=_oversample_for(i, max_f))
    return DigitizedSlice(slice_index, vals, 1.0 / clk.nominal_rate_hz, times)


def sample_monitor(monitor: np.ndarray, like: Waveform, d: DigitizedSlice) -> np.ndarray:
    """Power-tap monitor sampled at the instants used for ``d``."""
    mon = Waveform(like.grid, monitor, "real")
    return resample_at(mon, d.instants, oversample=1)


def quantize(d: DigitizedSlice, bits: int | Literal["ideal"] = "ideal") -> DigitizedSlice:
    """Mid-rise uniform quantiser spanning the record's min..max range."""
    if bits == "ideal":
        return d
    if int(bits) != bits or bits < 1:
        raise ConfigurationError(f"quantizer bits must be >= 1 or 'ideal', got {bits!r}")
    x = d.samples
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return d
    levels = 2 ** int(bits)
    step = (hi - lo) / levels
    code = np.clip(np.floor((x - lo) / step), 0, levels - 1)
    return DigitizedSlice(d.slice_index, lo + (code + 0.5) * step, d.sample_period, d.instants)
