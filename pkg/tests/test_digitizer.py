import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slicedadc.digitizer import ClockModel, DigitizedSlice, auto_rate, quantize, sample_with_jitter
from slicedadc.errors import ConfigurationError
from slicedadc.noise import PhasePath, zero_path
from slicedadc.optics import FrequencyPlan
from slicedadc.sigkit import TimeGrid, Waveform

PLAN = FrequencyPlan(4, 30e9, 2e9)
GRID = TimeGrid(2e-12, 5000)


def _tone(f: float, phase: float = 0.0) -> Waveform:
    return Waveform(GRID, np.cos(2 * np.pi * f * GRID.t + phase), "real")


def test_auto_rate_fits_integer_samples():
    r = auto_rate(PLAN, GRID.duration)
    assert r >= 2.2 * 34e9
    assert r * GRID.duration == pytest.approx(round(r * GRID.duration))
    assert r - 2.2 * 34e9 < 1 / GRID.duration + 1


def test_rate_below_nyquist_is_rejected():
    clk = ClockModel(60e9, 60e9, zero_path(GRID))
    with pytest.raises(ConfigurationError):
        sample_with_jitter(_tone(10e9), clk, plan=PLAN)


def test_clean_clock_samples_on_grid_instants():
    rate = auto_rate(PLAN, GRID.duration)
    clk = ClockModel(rate, 60e9, zero_path(GRID))
    f = 31.3e9
    d = sample_with_jitter(_tone(f, 0.4), clk, 2, PLAN)
    t = np.arange(d.samples.size) / rate
    np.testing.assert_allclose(d.samples, np.cos(2 * np.pi * f * t + 0.4), atol=1e-9)
    assert d.duration == pytest.approx(GRID.duration)
    assert d.slice_index == 2


@settings(max_examples=20, deadline=None)
@given(st.floats(-3.0, 3.0), st.sampled_from([5e9, 20e9, 33e9]))
def test_constant_clock_phase_is_a_time_offset(phase, f):
    # A constant oscillator phase p shifts every instant by p / (2 pi f_osc).
    f_osc = 60e9
    path = PhasePath(GRID, np.full(GRID.n, phase), 0.0, 0)
    rate = auto_rate(PLAN, GRID.duration)
    d = sample_with_jitter(_tone(f), ClockModel(rate, f_osc, path), plan=PLAN)
    t = np.arange(d.samples.size) / rate + phase / (2 * np.pi * f_osc)
    np.testing.assert_allclose(d.samples, np.cos(2 * np.pi * f * t), atol=1e-9)


class TestQuantizer:
    def _slice(self, x):
        return DigitizedSlice(0, x, 1.0, np.arange(len(x), dtype=float))

    def test_ideal_is_identity(self):
        d = self._slice(np.linspace(-1, 1, 11))
        assert quantize(d, "ideal") is d

    @pytest.mark.parametrize("bits", [1, 4, 8, 12])
    def test_error_bounded_by_half_step(self, bits):
        x = np.sin(np.linspace(0, 20, 4001))
        q = quantize(self._slice(x), bits).samples
        step = (x.max() - x.min()) / 2**bits
        assert np.max(np.abs(q - x)) <= step / 2 + 1e-12
        assert np.unique(q).size <= 2**bits

    @pytest.mark.parametrize("bits", [0, -2, 2.5])
    def test_invalid_bits(self, bits):
        with pytest.raises(ConfigurationError):
            quantize(self._slice(np.arange(4.0)), bits)

    def test_constant_record(self):
        d = self._slice(np.ones(8))
        np.testing.assert_array_equal(quantize(d, 6).samples, 1.0)
