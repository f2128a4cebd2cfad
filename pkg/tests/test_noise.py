import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slicedadc.errors import ConfigurationError
from slicedadc.noise import (
    NoiseSpec,
    derive_seed,
    effective_jitter,
    jitter_rms,
    path_to_jitter,
    rescale_jitter,
    wiener_path,
    zero_path,
)
from slicedadc.sigkit import TimeGrid

SMALL = TimeGrid(1e-9, 2000)


class TestJitterFormulas:
    @pytest.mark.parametrize(
        "lw,t,f,expected",
        [
            (3e3, 3.3e-6, 30e9, 1.3232e-12),
            (180e3, 3.3e-6, 60e9, 5.1245e-12),
            (1e5, 0.0, 1e9, 0.0),
        ],
    )
    def test_jitter_rms(self, lw, t, f, expected):
        assert jitter_rms(lw, t, f) == pytest.approx(expected, rel=1e-4, abs=1e-30)

    def test_effective_is_half_record(self):
        assert effective_jitter(3e3, 1e-7, 30e9) == pytest.approx(jitter_rms(3e3, 0.5e-7, 30e9))

    @pytest.mark.parametrize(
        "j,expected", [(6.4e-15, 25.28e-15), (870e-18, 3.436e-15)]
    )
    def test_rescale(self, j, expected):
        assert rescale_jitter(j, 500e-6, 7.8e-3) == pytest.approx(expected, rel=1e-3)

    def test_rescale_identity_and_errors(self):
        assert rescale_jitter(1e-15, 1.0, 1.0) == 1e-15
        with pytest.raises(ConfigurationError):
            rescale_jitter(1e-15, 0.0, 1.0)

    @pytest.mark.parametrize("args", [(-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            jitter_rms(*args)

    def test_full_cycle_phase(self):
        g = TimeGrid(1e-12, 4)
        p = zero_path(g)
        p2 = type(p)(g, np.full(4, 2 * np.pi), 0.0, 0)
        np.testing.assert_allclose(path_to_jitter(p2, 30e9), 1 / 30e9)
        assert not np.any(path_to_jitter(p, 30e9))


class TestWienerPath:
    def test_starts_at_zero_and_deterministic(self):
        a = wiener_path(1e5, SMALL, 42)
        b = wiener_path(1e5, SMALL, 42)
        assert a.phase[0] == 0.0
        np.testing.assert_array_equal(a.phase, b.phase)

    def test_zero_linewidth_is_flat(self):
        assert not np.any(wiener_path(0.0, SMALL, 1).phase)

    def test_negative_linewidth(self):
        with pytest.raises(ConfigurationError):
            wiener_path(-1.0, SMALL, 1)

    def test_ensemble_variance_grows_linearly(self):
        lw, k = 1e5, 400
        paths = np.stack([wiener_path(lw, SMALL, s).phase for s in range(k)])
        idx = np.linspace(SMALL.n // 10, SMALL.n - 1, 10).astype(int)
        var = paths[:, idx].var(axis=0, ddof=1)
        expect = 2 * np.pi * lw * SMALL.t[idx]
        # Sample variance of a Gaussian has standard error var * sqrt(2/(k-1)).
        se = expect * math.sqrt(2 / (k - 1))
        assert np.all(np.abs(var - expect) <= 3 * se)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(1e3, 1e7), st.integers(0, 2**32))
    def test_increment_statistics(self, lw, seed):
        g = TimeGrid(1e-12, 20_000)
        inc = np.diff(wiener_path(lw, g, seed).phase)
        sigma2 = 2 * np.pi * lw * g.dt
        se = sigma2 * math.sqrt(2 / (inc.size - 1))
        assert abs(inc.var(ddof=1) - sigma2) < 5 * se
        assert abs(inc.mean()) < 5 * math.sqrt(sigma2 / inc.size)

    def test_seed_independence(self):
        g = TimeGrid(1e-12, 100_000)
        a = np.diff(wiener_path(1e6, g, derive_seed(7, "carrier")).phase)
        b = np.diff(wiener_path(1e6, g, derive_seed(7, "elec")).phase)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.05

    def test_interpolation_at(self):
        p = wiener_path(1e5, SMALL, 3)
        mid = 0.5 * (SMALL.t[10] + SMALL.t[11])
        assert p.at(np.array([mid]))[0] == pytest.approx(0.5 * (p.phase[10] + p.phase[11]))


class TestSeeds:
    def test_distinct_coordinates_give_distinct_seeds(self):
        seeds = {
            derive_seed(m, role, r, f)
            for m in (0, 1)
            for role in ("carrier", "elec")
            for r in range(3)
            for f in range(3)
        }
        assert len(seeds) == 36

    def test_stable_and_chainable(self):
        s = derive_seed(1, "run", 2, 3)
        assert s == derive_seed(1, "run", 2, 3)
        assert 0 <= s < 2**64
        derive_seed(s, "carrier")  # a derived seed is a valid master


def test_noise_spec_enable_flags():
    ns = NoiseSpec(carrier_linewidth_hz=1e5, elec_linewidth_hz=1e3, elec_enabled=True)
    assert ns.effective("carrier") == 0.0
    assert ns.effective("elec") == 1e3
    with pytest.raises(ConfigurationError):
        NoiseSpec(mll_rf_linewidth_hz=-1.0)
