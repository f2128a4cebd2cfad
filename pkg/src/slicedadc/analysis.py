"""Closed-form jitter-limited SNR/ENOB models, the slice-count jitter budget
and the NSR measurement used to score simulations."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from slicedadc.errors import ConfigurationError
from slicedadc.noise import rescale_jitter
from slicedadc.optics import FrequencyPlan

NSR_FLOOR_DB = -150.0


def snr_electrical(f_rf_hz: float, jitter_s: float) -> float:
    """Aperture-jitter-limited SNR (dB) of a conventional ADC."""
    if not (f_rf_hz > 0 and jitter_s > 0):
        raise ConfigurationError("snr_electrical needs positive frequency and jitter")
    return 20.0 * math.log10(1.0 / (2.0 * math.pi * f_rf_hz * jitter_s))


def sliced_phase_rms(f_rf_hz: float, plan: FrequencyPlan, dt_r_s: float, dt_e_s: float) -> float:
    """RMS phase error (rad) of a tone at ``f_rf_hz`` through the sliced ADC.

    The comb jitter enters at ``m f_r`` (frequency rounded down to the LO of
    the tone's slice) and the clock jitter at the residual ``f_rf - m f_r``;
    the two are independent, so their variances add.
    """
    m = plan.slice_index(f_rf_hz)
    wr = 2.0 * math.pi * plan.slice_bw_hz
    w = 2.0 * math.pi * f_rf_hz
    return math.hypot(m * wr * dt_r_s, (w - m * wr) * dt_e_s)


def snr_sliced(f_rf_hz: float, plan: FrequencyPlan, dt_r_s: float, dt_e_s: float) -> float:
    """Jitter-limited SNR (dB) of the spectrally sliced ADC (inf if noiseless)."""
    if dt_r_s < 0 or dt_e_s < 0:
        raise ConfigurationError("jitters must be >= 0")
    rms = sliced_phase_rms(f_rf_hz, plan, dt_r_s, dt_e_s)
    return math.inf if rms == 0 else -20.0 * math.log10(rms)


def enob(snr_db: float) -> float:
    return (snr_db - 1.76) / 6.02


@dataclass(frozen=True)
class BudgetReport:
    n_slices: int
    slice_bw_hz: float
    mll_jitter_s: float
    elec_jitter_s: float
    rescale: tuple[float, float] | None
    mll_jitter_used_s: float
    elec_jitter_used_s: float
    eff_elec_jitter_s: float
    eff_mll_jitter_s: float
    worst_case_freq_hz: float
    worst_case_snr_db: float
    worst_case_enob: float
    electric_snr_db: float
    electric_enob: float
    curve_freq_hz: list[float] = field(default_factory=list)
    curve_snr_db: list[float] = field(default_factory=list)

    @property
    def enob_gain(self) -> float:
        return self.worst_case_enob - self.electric_enob

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rescale"] = list(self.rescale) if self.rescale else None
        d["enob_gain"] = self.enob_gain
        return d


def budget(
    n_slices: int,
    f_r_hz: float,
    dt_r_s: float,
    dt_e_s: float,
    rescale: tuple[float, float] | None = None,
    curve_points: int = 0,
) -> BudgetReport:
    """Jitter budget of an ``M``-slice converter of total bandwidth ``M f_r``.

    The worst case is a tone at ``M f_r`` recorded in the top slice
    (``m = M - 1``): the clock jitter then acts at ``f_r`` only, an effective
    ``dt_e / M`` at the full bandwidth, and the comb jitter at
    ``(M - 1) f_r``, an effective ``dt_r (M - 1) / M``.  The all-electric
    comparator sees ``dt_e`` at ``M f_r``.  With ``rescale=(t_from, t_to)``
    both jitters are first rescaled to the new observation time.
    """
    if int(n_slices) != n_slices or n_slices < 1:
        raise ConfigurationError(f"number of slices must be >= 1, got {n_slices!r}")
    if not f_r_hz > 0:
        raise ConfigurationError("slice bandwidth must be > 0")
    if dt_r_s < 0 or dt_e_s < 0:
        raise ConfigurationError("jitters must be >= 0")
    M = int(n_slices)
    jr, je = dt_r_s, dt_e_s
    if rescale is not None:
        jr = rescale_jitter(jr, *rescale)
        je = rescale_jitter(je, *rescale)
    eff_e = je / M
    eff_r = jr * (M - 1) / M
    f_top = M * f_r_hz
    w_top = 2.0 * math.pi * f_top
    # Eq. 6 at the top edge with m = M - 1, written with the effective jitters.
    rms = w_top * math.hypot(eff_r, eff_e)
    snr = math.inf if rms == 0 else -20.0 * math.log10(rms)
    e_snr = snr_electrical(f_top, je) if je > 0 else math.inf
    freqs: list[float] = []
    curve: list[float] = []
    if curve_points:
        wr = 2.0 * math.pi * f_r_hz
        for f in np.linspace(f_top / curve_points, f_top, curve_points):
            m = min(int(f // f_r_hz), M - 1)
            r = math.hypot(m * wr * jr, (2.0 * math.pi * f - m * wr) * je)
            freqs.append(float(f))
            curve.append(math.inf if r == 0 else -20.0 * math.log10(r))
    return BudgetReport(
        n_slices=M,
        slice_bw_hz=f_r_hz,
        mll_jitter_s=dt_r_s,
        elec_jitter_s=dt_e_s,
        rescale=tuple(rescale) if rescale else None,
        mll_jitter_used_s=jr,
        elec_jitter_used_s=je,
        eff_elec_jitter_s=eff_e,
        eff_mll_jitter_s=eff_r,
        worst_case_freq_hz=f_top,
        worst_case_snr_db=snr,
        worst_case_enob=enob(snr),
        electric_snr_db=e_snr,
        electric_enob=enob(e_snr),
        curve_freq_hz=freqs,
        curve_snr_db=curve,
    )


def measure_nsr(recon_s: np.ndarray, reference_s: np.ndarray, edge_guard: int = 0) -> float:
    """Noise-to-signal ratio (dB) of a reconstruction against its reference.

    ``edge_guard`` samples are dropped from each end before scoring.  Both
    records then have their mean removed; the result is floored at -150 dB.
    """
    recon = np.asarray(getattr(recon_s, "samples", recon_s), dtype=np.float64)
    ref = np.asarray(getattr(reference_s, "samples", reference_s), dtype=np.float64)
    if recon.shape != ref.shape:
        raise ConfigurationError("records differ in length")
    if edge_guard < 0 or 2 * edge_guard >= recon.shape[0]:
        raise ConfigurationError("edge guard must leave a non-empty record")
    if edge_guard:
        recon = recon[edge_guard:-edge_guard]
        ref = ref[edge_guard:-edge_guard]
    ref_ac = ref - ref.mean()
    sig = float(np.sum(ref_ac**2))
    if sig == 0:
        raise ConfigurationError("reference record has zero AC power")
    err = float(np.sum((recon - recon.mean() - ref_ac) ** 2))
    if err == 0:
        return NSR_FLOOR_DB
    return max(NSR_FLOOR_DB, 10.0 * math.log10(err / sig))


@dataclass(frozen=True)
class SnrReport:
    """Monte Carlo summary at one frequency.

    ``nsr_mean_db`` is the ensemble (power-averaged) NSR; ``nsr_std_db`` is
    the spread of a single run's NSR around it, in dB, to first order
    (``10/ln10 * std/mean`` of the linear values), so ``ci3_db =
    3 * nsr_std_db / sqrt(runs)`` is the 3-sigma half-width of the mean.
    """

    freq_hz: float
    nsr_mean_db: float
    nsr_std_db: float
    ci3_db: float
    nsr_analytic_db: float
    n_runs: int
    nsr_runs_db: tuple[float, ...] = ()

    @classmethod
    def from_runs(cls, freq_hz: float, nsr_db: list[float], analytic_db: float) -> "SnrReport":
        n = len(nsr_db)
        if n == 0:
            raise ConfigurationError("no runs to summarise")
        lin = 10.0 ** (np.asarray(nsr_db) / 10.0)
        mean = float(lin.mean())
        std_lin = float(lin.std(ddof=1)) if n > 1 else 0.0
        std_db = 10.0 / math.log(10.0) * std_lin / mean
        return cls(
            freq_hz=freq_hz,
            nsr_mean_db=max(NSR_FLOOR_DB, 10.0 * math.log10(mean)),
            nsr_std_db=std_db,
            ci3_db=3.0 * std_db / math.sqrt(n),
            nsr_analytic_db=analytic_db,
            n_runs=n,
            nsr_runs_db=tuple(float(v) for v in nsr_db),
        )
