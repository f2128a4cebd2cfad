"""End-to-end scenario runs and frequency sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.fft import next_fast_len

from slicedadc.analysis import NSR_FLOOR_DB, SnrReport, measure_nsr, snr_sliced
from slicedadc.config import ScenarioConfig, static_phases_for
from slicedadc.digitizer import ClockModel, quantize, sample_monitor, sample_with_jitter
from slicedadc.dsp import (
    PhaseCorrection,
    PilotRecord,
    ReconstructionResult,
    SliceChannel,
    estimate_static_phases,
    reconstruct,
    ssb_reference,
)
from slicedadc.errors import ConfigurationError
from slicedadc.noise import derive_seed, effective_jitter, path_to_jitter, wiener_path, zero_path
from slicedadc.optics import (
    CombSpec,
    ToneSpec,
    balanced_detect,
    comb_for_plan,
    isolate_all,
    modulate_carrier,
    slice_all,
    synthesize_comb,
)
from slicedadc.sigkit import TimeGrid, Waveform

PILOT_INDEX = 0.1

# Fraction of the record dropped at each end when scoring.  Noise paths are
# Wiener processes, so a periodic record joins two unrelated phases at the
# wrap; filtered comb lines ring there and the artefact is excluded.
EDGE_GUARD_FRACTION = 0.02


@dataclass
class Diagnostics:
    seed: int
    freq_hz: float
    slice_index: int
    nsr_analytic_db: float
    recon: ReconstructionResult
    reference: Waveform
    modulated_power: np.ndarray
    monitors: list[np.ndarray]
    correction: PhaseCorrection


def analytic_nsr(cfg: ScenarioConfig, f_rf_hz: float) -> float:
    """Closed-form NSR (dB) at ``f_rf_hz`` for the enabled jitter sources,
    using record-averaged effective jitters."""
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    ns = cfg.noise_spec()
    dt_r = effective_jitter(ns.effective("mll_rf"), g.duration, plan.slice_bw_hz)
    dt_e = effective_jitter(ns.effective("elec"), g.duration, ns.elec_osc_freq_hz)
    snr = snr_sliced(f_rf_hz, plan, dt_r, dt_e)
    return NSR_FLOOR_DB if math.isinf(snr) else max(NSR_FLOOR_DB, -snr)


def electric_nsr(cfg: ScenarioConfig, f_rf_hz: float) -> float:
    """All-electric comparator: the clock jitter applied at the full RF frequency."""
    g = cfg.time_grid()
    ns = cfg.noise_spec()
    dt_e = effective_jitter(ns.elec_linewidth_hz, g.duration, ns.elec_osc_freq_hz)
    if dt_e == 0:
        return NSR_FLOOR_DB
    return 20.0 * math.log10(2.0 * math.pi * f_rf_hz * dt_e)


def pilot_freqs(cfg: ScenarioConfig) -> list[float]:
    """One on-bin pilot near the centre of each slice."""
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    out = []
    for m in range(plan.n_slices):
        band = plan.slice_band(m)
        centre = 0.5 * (band.f_lo + band.f_hi)
        out.append(round(centre * g.duration) / g.duration)
    return out


def calibrate_pilot(
    cfg: ScenarioConfig,
    comb: CombSpec,
    rate_hz: float,
    theta_0=None,
    theta_c=None,
) -> PhaseCorrection:
    """Pilot-tone calibration acquisition followed by phase estimation.

    One pilot per slice is sent in a single acquisition with a clean clock.
    Carrier and common comb phase noise may be supplied; both are common to
    every slice.
    """
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    zero = zero_path(g)
    freqs = pilot_freqs(cfg)
    tones = [ToneSpec(f, PILOT_INDEX, "linear") for f in freqs]
    mod = modulate_carrier(theta_0 or zero, tones, g)
    comb_wf = synthesize_comb(comb, theta_c or zero, np.zeros(g.n), g)
    clk = ClockModel(rate_hz, 1.0, zero)
    records = []
    for m, (sl, (lo, _)) in enumerate(zip(slice_all(mod, plan), isolate_all(comb_wf, plan))):
        d = sample_with_jitter(balanced_detect(sl, lo), clk, m, plan)
        amp = PILOT_INDEX * comb.amplitudes[m]
        records.append(PilotRecord(m, d, freqs[m], 0.0, amp))
    return estimate_static_phases(records, plan)


RECON_MARGIN = 1.25


def recon_grid(cfg: ScenarioConfig) -> TimeGrid:
    """Reconstruction grid spanning the simulation period.

    Its Nyquist frequency clears every shifted slice spectrum by
    ``RECON_MARGIN``; the composite field is band-limited so nothing is lost
    against the much finer simulation grid.
    """
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    half_rate = cfg.digitizer_rate_hz() / 2
    top = max(abs(plan.lo_freq(plan.n_slices - 1) + half_rate), abs(plan.lo_freq(0) - half_rate))
    n_dig = round(cfg.digitizer_rate_hz() * g.duration)
    n = max(n_dig, math.ceil(2 * RECON_MARGIN * top * g.duration))
    n = next_fast_len(n)
    if n >= g.n:
        return g
    return TimeGrid(g.duration / n, n)


@lru_cache(maxsize=8)
def _reference(cfg: ScenarioConfig, f_rf_hz: float) -> Waveform:
    g = cfg.time_grid()
    noiseless = modulate_carrier(zero_path(g), cfg.tone(f_rf_hz), g)
    return ssb_reference(noiseless, cfg.frequency_plan(), recon_grid(cfg))


def simulate_once(cfg: ScenarioConfig, f_rf_hz: float, seed: int) -> tuple[float, Diagnostics]:
    """Run the full optical/electrical chain once and score it.

    Every noise path is seeded from ``derive_seed(seed, role)``.  The NSR is
    measured against the single-sideband reference of the noiseless modulator
    output, so carrier-spectrum truncation counts as noise.
    """
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    ns = cfg.noise_spec()
    tone = cfg.tone(f_rf_hz)
    tone.check_plan(plan)
    m_sig = plan.slice_index(f_rf_hz)

    def path(role: str):
        lw = ns.effective(role)
        return wiener_path(lw, g, derive_seed(seed, role)) if lw > 0 else zero_path(g)

    theta_0 = path("carrier")
    theta_c = path("mll_optical")
    phi_r = path("mll_rf")
    phi_e = path("elec")

    phases = static_phases_for(cfg, derive_seed(cfg.run.master_seed, "static_phase"))
    comb = comb_for_plan(plan, cfg.comb.amplitudes, phases)
    comb_wf = synthesize_comb(comb, theta_c, path_to_jitter(phi_r, plan.slice_bw_hz), g)
    modulated = modulate_carrier(theta_0, tone, g)

    rate = cfg.digitizer_rate_hz()
    clk = ClockModel(rate, ns.elec_osc_freq_hz, phi_e)
    bits = cfg.digitizer.bits
    channels = []
    monitors = []
    for m, (sl, (lo, mon)) in enumerate(zip(slice_all(modulated, plan), isolate_all(comb_wf, plan))):
        i_m = balanced_detect(sl, lo)
        d = quantize(sample_with_jitter(i_m, clk, m, plan), bits)
        mon_d = sample_monitor(mon, i_m, d)
        monitors.append(mon_d)
        channels.append(
            SliceChannel(m, d, plan.lo_freq(m), float(comb.amplitudes[m]), mon_d)
        )

    if cfg.dsp.phase_correction == "pilot":
        corr = calibrate_pilot(cfg, comb, rate)
    else:
        corr = PhaseCorrection(tuple(float(p) for p in comb.static_phases_rad), "oracle")

    recon = reconstruct(channels, plan, corr, cfg.dsp.rin_cancel, recon_grid(cfg))
    ref = _reference(cfg, f_rf_hz)
    guard = int(EDGE_GUARD_FRACTION * recon.signal.grid.n)
    nsr = measure_nsr(recon.signal.samples, ref.samples, guard)
    diag = Diagnostics(
        seed=seed,
        freq_hz=f_rf_hz,
        slice_index=m_sig,
        nsr_analytic_db=analytic_nsr(cfg, f_rf_hz),
        recon=recon,
        reference=ref,
        modulated_power=np.abs(modulated.samples) ** 2,
        monitors=monitors,
        correction=corr,
    )
    return nsr, diag


def run_seed(master_seed: int, run_index: int, frequency_index: int) -> int:
    return derive_seed(master_seed, "run", run_index, frequency_index)


def _one(args: tuple) -> float:
    cfg, f, seed = args
    return simulate_once(cfg, f, seed)[0]


def check_frequencies(cfg: ScenarioConfig, frequencies: Sequence[float]) -> None:
    if len(frequencies) == 0:
        raise ConfigurationError("frequency list is empty")
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    for f in frequencies:
        if not g.is_on_bin(f):
            raise ConfigurationError(f"sweep frequency {f / 1e9:g} GHz is not on a grid bin")
        cfg.tone(f).check_plan(plan)
        plan.slice_index(f)


def sweep(
    cfg: ScenarioConfig,
    frequencies: Sequence[float],
    runs_per_point: int,
    master_seed: int,
    workers: int = 1,
    progress=None,
) -> list[SnrReport]:
    """Monte Carlo NSR versus frequency with the closed-form overlay.

    Run ``r`` at frequency index ``k`` uses seed ``run_seed(master, r, k)``,
    so results do not depend on ``workers`` or execution order.
    """
    check_frequencies(cfg, frequencies)
    if runs_per_point < 1:
        raise ConfigurationError("runs_per_point must be >= 1")
    jobs = [
        (cfg, float(f), run_seed(master_seed, r, k))
        for k, f in enumerate(frequencies)
        for r in range(runs_per_point)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs, chunksize=max(1, runs_per_point // 4)))
    else:
        results = []
        for job in jobs:
            results.append(_one(job))
            if progress is not None:
                progress(len(results), len(jobs))
    reports = []
    for k, f in enumerate(frequencies):
        vals = results[k * runs_per_point:(k + 1) * runs_per_point]
        reports.append(SnrReport.from_runs(float(f), vals, analytic_nsr(cfg, float(f))))
    return reports


def default_frequencies(cfg: ScenarioConfig) -> list[float]:
    """24 points on a 5 GHz pitch centred in the sliced band.

    With the default plan this is 2.5, 7.5, ..., 117.5 GHz.
    """
    plan = cfg.frequency_plan()
    top = plan.band.f_hi
    n = 24
    step = 5e9
    start = 2.5e9 if top > 2.5e9 + (n - 1) * step else step / 2
    return [start + k * step for k in range(n) if start + k * step < top]
