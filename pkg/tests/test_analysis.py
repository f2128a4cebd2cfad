import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from slicedadc.analysis import (
    NSR_FLOOR_DB,
    SnrReport,
    budget,
    enob,
    measure_nsr,
    snr_electrical,
    snr_sliced,
)
from slicedadc.errors import ConfigurationError
from slicedadc.optics import FrequencyPlan

PLAN = FrequencyPlan(4, 30e9, 2e9)
DT_R, DT_E = 870e-18, 6.4e-15


class TestClosedForms:
    def test_electrical(self):
        assert snr_electrical(120e9, 6.4e-15) == pytest.approx(46.33, abs=0.01)
        with pytest.raises(ConfigurationError):
            snr_electrical(0.0, 1e-15)

    def test_enob(self):
        assert enob(1.76) == 0.0
        assert enob(61.96) == pytest.approx(10.0)

    def test_sliced_single_slice_equals_electrical(self):
        plan = FrequencyPlan(1, 120e9, 2e9)
        assert snr_sliced(50e9, plan, DT_R, DT_E) == pytest.approx(snr_electrical(50e9, DT_E))

    def test_noiseless_is_infinite(self):
        assert snr_sliced(50e9, PLAN, 0.0, 0.0) == math.inf

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.5e9, 117.9e9), st.floats(1e-18, 1e-12), st.floats(1e-18, 1e-12), st.floats(1e-3, 1e3))
    def test_joint_scaling(self, f, dr, de, k):
        base = snr_sliced(f, PLAN, dr, de)
        scaled = snr_sliced(f, PLAN, k * dr, k * de)
        assert scaled == pytest.approx(base - 20 * math.log10(k), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1e9, 117.9e9), st.floats(1e-18, 1e-13), st.floats(0.0, 1.0))
    def test_sliced_beats_electrical(self, f, de, frac):
        # Holds wherever dt_r <= dt_e sqrt(1 - 2 f_g / f_r); just above a
        # slice edge the comb term can otherwise exceed the clock term.
        dr = frac * de * math.sqrt(1 - 2 * PLAN.guard_hz / PLAN.slice_bw_hz)
        assert snr_sliced(f, PLAN, dr, de) >= snr_electrical(f, de) - 1e-9

    def test_staircase_with_comb_jitter_only(self):
        prev = math.inf
        for m in range(1, 4):
            band = PLAN.slice_band(m)
            vals = [snr_sliced(f, PLAN, DT_R, 0.0) for f in np.linspace(band.f_lo + 1e6, band.f_hi - 1e6, 7)]
            assert max(vals) - min(vals) < 1e-9
            assert vals[0] <= prev
            prev = vals[0]
        hi, lo = snr_sliced(95e9, PLAN, DT_R, 0.0), snr_sliced(85e9, PLAN, DT_R, 0.0)
        assert lo - hi == pytest.approx(20 * math.log10(3 / 2))


class TestBudget:
    def test_reference_values(self):
        r = budget(4, 30e9, DT_R, DT_E)
        assert r.eff_elec_jitter_s == pytest.approx(1.600e-15, rel=5e-4)
        assert r.eff_mll_jitter_s == pytest.approx(652.5e-18, rel=5e-4)
        assert r.worst_case_snr_db == pytest.approx(57.70, abs=0.01)
        assert r.worst_case_enob == pytest.approx(9.29, abs=0.01)
        assert r.electric_enob == pytest.approx(7.40, abs=0.01)
        assert r.enob_gain >= 1.8

    def test_rescaled(self):
        r = budget(4, 30e9, DT_R, DT_E, rescale=(500e-6, 7.8e-3))
        assert r.worst_case_enob == pytest.approx(7.31, abs=0.01)
        assert r.electric_enob == pytest.approx(5.42, abs=0.01)

    def test_single_slice_degenerates_to_electrical(self):
        r = budget(1, 120e9, DT_R, DT_E)
        assert r.eff_mll_jitter_s == 0.0
        assert r.worst_case_snr_db == pytest.approx(r.electric_snr_db)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-18, 1e-14), st.floats(1.01, 30.0), st.floats(10e9, 500e9))
    def test_monotone_in_slices_up_to_turnover(self, dr, ratio, bw):
        de = ratio * dr
        m_star = 1 + ratio**2  # effective jitter is minimal here
        ms = [m for m in range(1, 64) if m <= m_star]
        assume(len(ms) >= 2)
        enobs = [budget(m, bw / m, dr, de).worst_case_enob for m in ms]
        assert all(b >= a - 1e-9 for a, b in zip(enobs, enobs[1:]))

    def test_turnover_beyond_optimum(self):
        # Past M* = 1 + (dt_e/dt_r)^2 extra slices cost resolution again.
        de, dr = 2e-15, 1e-15
        assert budget(8, 15e9, dr, de).worst_case_enob < budget(5, 24e9, dr, de).worst_case_enob

    def test_curve_and_dict(self):
        r = budget(4, 30e9, DT_R, DT_E, curve_points=24)
        assert len(r.curve_freq_hz) == 24
        d = r.to_dict()
        assert d["enob_gain"] == pytest.approx(r.enob_gain)

    @pytest.mark.parametrize("args", [(0, 30e9, 1e-15, 1e-15), (2, 0.0, 1e-15, 1e-15), (2, 30e9, -1.0, 1e-15)])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            budget(*args)


class TestNsr:
    def test_identical_records_hit_floor(self):
        x = np.cos(np.linspace(0, 30, 1000))
        assert measure_nsr(x, x) == NSR_FLOOR_DB

    def test_known_ratio_and_mean_removal(self):
        t = np.arange(4000)
        ref = np.cos(2 * np.pi * t / 40)
        noisy = ref + 0.1 * np.sin(2 * np.pi * t / 40) + 5.0
        assert measure_nsr(noisy, ref) == pytest.approx(-20.0, abs=1e-9)

    def test_edge_guard(self):
        ref = np.cos(2 * np.pi * np.arange(4000) / 40)
        spoiled = ref.copy()
        spoiled[:10] += 3.0
        assert measure_nsr(spoiled, ref, edge_guard=20) == NSR_FLOOR_DB
        with pytest.raises(ConfigurationError):
            measure_nsr(ref, ref, edge_guard=2000)

    def test_zero_reference(self):
        with pytest.raises(ConfigurationError):
            measure_nsr(np.ones(10), np.ones(10))

    def test_report_statistics(self):
        rng = np.random.default_rng(0)
        vals = list(-30 + rng.normal(0, 1, 200))
        r = SnrReport.from_runs(1e9, vals, -30.0)
        lin = 10 ** (np.array(vals) / 10)
        assert r.nsr_mean_db == pytest.approx(10 * np.log10(lin.mean()))
        assert r.ci3_db == pytest.approx(3 * r.nsr_std_db / math.sqrt(200))
        assert r.n_runs == 200
        with pytest.raises(ConfigurationError):
            SnrReport.from_runs(1e9, [], 0.0)
