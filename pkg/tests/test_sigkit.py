import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slicedadc.errors import ConfigurationError, SampleRangeError
from slicedadc.sigkit import (
    BandMask,
    TimeGrid,
    Waveform,
    band_limited_field,
    brickwall_bank,
    brickwall_filter,
    fourier_resample,
    hilbert_analytic,
    resample_at,
    tone_phasor,
)

GRID = TimeGrid(1e-12, 1024)


def _random_field(seed: int, grid: TimeGrid = GRID) -> Waveform:
    rng = np.random.default_rng(seed)
    return Waveform(grid, rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n))


def _tone(grid: TimeGrid, k: int, phase: float = 0.0) -> np.ndarray:
    return np.cos(2 * np.pi * k * grid.df * grid.t + phase)


class TestTimeGrid:
    def test_derived_quantities(self):
        g = TimeGrid(0.3e-12, 340_000)
        assert g.duration == pytest.approx(102e-9)
        assert g.nyquist == pytest.approx(1 / 0.6e-12)
        assert g.df == pytest.approx(1 / 102e-9)

    def test_bin_lookup(self):
        assert GRID.bin_of(5 * GRID.df) == 5
        assert GRID.bin_of(5.5 * GRID.df) is None
        assert GRID.is_on_bin(-3 * GRID.df)

    @pytest.mark.parametrize("dt,n", [(0.0, 10), (-1.0, 10), (1e-12, 1), (1e-12, 2.5)])
    def test_invalid(self, dt, n):
        with pytest.raises(ConfigurationError):
            TimeGrid(dt, n)


class TestWaveform:
    def test_samples_are_read_only(self):
        w = _random_field(0)
        with pytest.raises(ValueError):
            w.samples[0] = 1.0

    def test_real_kind_rejects_imaginary_part(self):
        with pytest.raises(ConfigurationError):
            Waveform(GRID, np.ones(GRID.n) * 1j, "real")

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            Waveform(GRID, np.ones(GRID.n - 1))


class TestBrickwall:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.lists(st.floats(-0.45, 0.45), min_size=1, max_size=4, unique=True))
    def test_partition_sums_to_input(self, seed, cuts):
        w = _random_field(seed)
        ny = GRID.nyquist
        edges = [-ny] + sorted(c * 2 * ny for c in cuts) + [ny]
        masks = [BandMask(a, b) for a, b in zip(edges[:-1], edges[1:]) if a < b]
        parts = brickwall_bank(w, masks)
        total = sum(p.samples for p in parts)
        np.testing.assert_allclose(total, w.samples, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-0.4, 0.3))
    def test_idempotent(self, seed, lo):
        w = _random_field(seed)
        mask = BandMask(lo * GRID.nyquist, (lo + 0.2) * GRID.nyquist)
        once = brickwall_filter(w, mask)
        twice = brickwall_filter(once, mask)
        np.testing.assert_allclose(twice.samples, once.samples, atol=1e-12)

    def test_half_open_edges(self):
        k = 40
        x = np.exp(2j * np.pi * k * GRID.df * GRID.t)
        w = Waveform(GRID, x)
        f = k * GRID.df
        assert brickwall_filter(w, BandMask(f, 2 * f)).power() == pytest.approx(1.0)
        assert brickwall_filter(w, BandMask(0.5 * f, f)).power() < 1e-25

    def test_mask_outside_grid(self):
        with pytest.raises(ConfigurationError):
            brickwall_filter(_random_field(1), BandMask(0, 2 * GRID.nyquist))


class TestHilbert:
    @pytest.mark.parametrize("k", [1, 17, 200, 511])
    def test_cos_maps_to_sin(self, k):
        w = Waveform(GRID, _tone(GRID, k), "real")
        a = hilbert_analytic(w).samples
        np.testing.assert_allclose(a.real, _tone(GRID, k), atol=1e-12)
        np.testing.assert_allclose(a.imag, _tone(GRID, k, -np.pi / 2), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_one_sided(self, seed):
        x = np.random.default_rng(seed).normal(size=GRID.n)
        spec = np.fft.fft(hilbert_analytic(Waveform(GRID, x, "real")).samples)
        neg = spec[GRID.n // 2 + 1:]
        assert np.max(np.abs(neg)) < 1e-9 * np.max(np.abs(spec))

    def test_requires_real(self):
        with pytest.raises(ConfigurationError):
            hilbert_analytic(_random_field(0))


class TestFourierResample:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 200), st.integers(-300, 300), st.floats(0, 2 * np.pi))
    def test_shift_theorem(self, k, shift, phase):
        # A shift by s bins multiplies the upsampled record by e^{j 2 pi s t / T}.
        n, n_out = 512, 2048
        t = np.arange(n) / n
        x = np.exp(1j * (2 * np.pi * k * t + phase))
        y = fourier_resample(x, n_out, shift)
        t2 = np.arange(n_out) / n_out
        expect = np.exp(1j * (2 * np.pi * (k + shift) * t2 + phase))
        np.testing.assert_allclose(y, expect, atol=1e-10)

    def test_real_stays_real_with_nyquist_bin(self):
        x = np.cos(np.pi * np.arange(64))  # pure Nyquist tone
        y = fourier_resample(x, 256)
        assert y.dtype == np.float64
        np.testing.assert_allclose(y, np.cos(np.pi * np.arange(256) / 4), atol=1e-12)

    def test_downsample_if_content_fits(self):
        t = np.arange(1024) / 1024
        x = np.exp(2j * np.pi * 5 * t)
        y = fourier_resample(x, 64)
        np.testing.assert_allclose(y, np.exp(2j * np.pi * 5 * np.arange(64) / 64), atol=1e-12)

    def test_downsample_rejects_overflow(self):
        x = np.exp(2j * np.pi * 100 * np.arange(1024) / 1024)
        with pytest.raises(ConfigurationError):
            fourier_resample(x, 64)

    def test_band_limited_field_regrids(self):
        k = 30
        w = Waveform(GRID, np.exp(2j * np.pi * k * GRID.df * GRID.t) + 0.5)
        coarse = TimeGrid(GRID.duration / 128, 128)
        out = band_limited_field(w, BandMask(-5 * GRID.df, 40 * GRID.df), coarse)
        expect = np.exp(2j * np.pi * k * coarse.df * coarse.t) + 0.5
        np.testing.assert_allclose(out.samples, expect, atol=1e-12)


class TestResampleAt:
    @pytest.mark.parametrize("frac", [0.05, 0.4, 0.8])
    def test_on_bin_tone_exact(self, frac):
        g = TimeGrid(1e-12, 4096)
        k = int(frac * g.n / 2)
        w = Waveform(g, _tone(g, k, 0.3), "real")
        times = np.random.default_rng(1).uniform(0, g.duration, 5000)
        got = resample_at(w, times)
        expect = np.cos(2 * np.pi * k * g.df * times + 0.3)
        assert np.max(np.abs(got - expect)) < 1e-9

    def test_complex_record(self):
        g = TimeGrid(1e-12, 2048)
        k = 300
        w = Waveform(g, np.exp(2j * np.pi * k * g.df * g.t))
        times = np.linspace(0, g.duration, 777, endpoint=False) + 0.37e-12
        got = resample_at(w, times)
        assert np.iscomplexobj(got)
        np.testing.assert_allclose(got, np.exp(2j * np.pi * k * g.df * times), atol=1e-9)

    def test_grid_points_reproduce_samples(self):
        w = Waveform(GRID, np.random.default_rng(3).normal(size=GRID.n), "real")
        np.testing.assert_allclose(resample_at(w, GRID.t[::7]), w.samples[::7], atol=1e-9)

    @pytest.mark.parametrize("bad", [-1e-15, GRID.n * 1e-12])
    def test_out_of_range(self, bad):
        w = Waveform(GRID, np.zeros(GRID.n), "real")
        with pytest.raises(SampleRangeError):
            resample_at(w, [bad])


@pytest.mark.parametrize("amp,phase", [(1.0, 0.0), (0.3, 1.2), (2.0, -2.5)])
def test_tone_phasor(amp, phase):
    k = 21
    x = amp * _tone(GRID, k, phase)
    c = tone_phasor(x, GRID.sample_rate, k * GRID.df)
    assert abs(c) == pytest.approx(amp)
    assert np.angle(c) == pytest.approx(phase)
