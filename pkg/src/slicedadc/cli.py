"""Command-line front end: ``slicedadc simulate | sweep | budget``.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime or
numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from slicedadc.analysis import NSR_FLOOR_DB, SnrReport, budget, snr_sliced
from slicedadc.config import PRESETS, ScenarioConfig, load_config, preset
from slicedadc.errors import ConfigurationError, SlicedAdcError
from slicedadc.montecarlo import (
    analytic_nsr,
    check_frequencies,
    default_frequencies,
    electric_nsr,
    run_seed,
    simulate_once,
    sweep,
)
from slicedadc.noise import effective_jitter
from slicedadc.svg import Chart

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_COLUMNS = ("freq_ghz", "nsr_mean_db", "nsr_std_db", "ci3_db", "nsr_analytic_db", "n_runs")
OVERLAY_SAMPLES = 10_000


def fmt6(v: float) -> str:
    """Six significant digits in fixed (non-exponent) notation."""
    v = float(v)
    if not math.isfinite(v):
        return str(v)
    if v == 0:
        return "0.00000"
    decimals = max(0, 5 - math.floor(math.log10(abs(v))))
    return f"{v:.{decimals}f}"


def _resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else preset(args.preset or "desk")
    run = {}
    if args.seed is not None:
        run["master_seed"] = args.seed
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigurationError("--runs must be >= 1")
        run["runs"] = args.runs
    return cfg.with_(run=run) if run else cfg


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_scenario(cfg: ScenarioConfig, out: Path) -> None:
    doc = cfg.to_dict()
    doc["derived"] = cfg.derived()
    (out / "scenario.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _curves(cfg: ScenarioConfig, n: int = 481) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Closed-form NSR curves for the MLL-only, electric-only and combined cases."""
    g = cfg.time_grid()
    plan = cfg.frequency_plan()
    ns = cfg.noise_spec()
    dt_r = effective_jitter(ns.mll_rf_linewidth_hz, g.duration, plan.slice_bw_hz)
    dt_e = effective_jitter(ns.elec_linewidth_hz, g.duration, ns.elec_osc_freq_hz)
    f = np.linspace(plan.band.f_hi / n, plan.band.f_hi * (1 - 1e-9), n)

    def nsr(dr: float, de: float) -> np.ndarray:
        vals = [snr_sliced(x, plan, dr, de) for x in f]
        return np.array([max(NSR_FLOOR_DB, -v) for v in vals])

    return {
        "analytic, MLL jitter only": (f, nsr(dt_r, 0.0)),
        "analytic, electric only": (f, np.array([electric_nsr(cfg, x) for x in f])),
        "analytic, combined": (f, nsr(dt_r, dt_e)),
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    f = cfg.signal.freq_ghz * 1e9
    check_frequencies(cfg, [f])
    _write_scenario(cfg, out)
    rows = []
    first = None
    t0 = time.perf_counter()
    for r in range(cfg.run.runs):
        seed = run_seed(cfg.run.master_seed, r, 0)
        nsr, diag = simulate_once(cfg, f, seed)
        rows.append((seed, nsr))
        if first is None:
            first = diag
    with open(out / "nsr.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "nsr_db"])
        for seed, nsr in rows:
            w.writerow([seed, fmt6(nsr)])

    rec = first.recon.signal
    k = min(OVERLAY_SAMPLES, rec.grid.n)
    t_ns = rec.grid.t[:k] * 1e9
    Chart(f"Reconstruction at {cfg.signal.freq_ghz:g} GHz", "time (ns)", "|F|^2").add(
        t_ns, first.reference.samples[:k], "SSB reference"
    ).add(t_ns, rec.samples[:k], "reconstructed").save(out / "overlay.svg")
    ref_ac = first.reference.samples - first.reference.samples.mean()
    rec_ac = rec.samples - rec.samples.mean()
    Chart("Reconstructed vs reference", "reference (AC)", "reconstructed (AC)", equal_axes=True).add(
        ref_ac[:k], rec_ac[:k], "samples", style="points"
    ).save(out / "recon_vs_input.svg")

    report = SnrReport.from_runs(f, [n for _, n in rows], analytic_nsr(cfg, f))
    print(f"frequency        {cfg.signal.freq_ghz:g} GHz (slice {first.slice_index})")
    print(f"runs             {report.n_runs}")
    print(f"NSR mean         {report.nsr_mean_db:.2f} dB (+/- {report.ci3_db:.2f} dB, 3 sigma)")
    print(f"NSR analytic     {report.nsr_analytic_db:.2f} dB")
    print(f"elapsed          {time.perf_counter() - t0:.1f} s")
    print(f"outputs          {out}")
    return EXIT_OK


def _parse_freqs(text: str) -> list[float]:
    items = [s for s in text.replace(" ", "").split(",") if s]
    try:
        return [float(s) * 1e9 for s in items]
    except ValueError as exc:
        raise ConfigurationError(f"--freqs: {exc}") from exc


def write_sweep_csv(path: Path, reports: Sequence[SnrReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in reports:
            w.writerow([
                fmt6(r.freq_hz / 1e9),
                fmt6(r.nsr_mean_db),
                fmt6(r.nsr_std_db),
                fmt6(r.ci3_db),
                fmt6(r.nsr_analytic_db),
                r.n_runs,
            ])


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    freqs = _parse_freqs(args.freqs) if args.freqs is not None else default_frequencies(cfg)
    check_frequencies(cfg, freqs)
    out = _out_dir(args)
    _write_scenario(cfg, out)
    t0 = time.perf_counter()

    def progress(done: int, total: int) -> None:
        if done == total or done % max(1, total // 20) == 0:
            print(f"  {done}/{total} runs", file=sys.stderr)

    reports = sweep(cfg, freqs, cfg.run.runs, cfg.run.master_seed, workers=args.threads, progress=progress)
    write_sweep_csv(out / "sweep.csv", reports)

    chart = Chart("NSR versus signal frequency", "frequency (GHz)", "NSR (dB)")
    for label, (f, y) in _curves(cfg).items():
        chart.add(f / 1e9, y, label)
    chart.add(
        [r.freq_hz / 1e9 for r in reports],
        [r.nsr_mean_db for r in reports],
        f"Monte Carlo ({cfg.run.runs} runs, 3 sigma)",
        style="points",
        yerr=[r.ci3_db for r in reports],
        color="black",
    )
    chart.save(out / "fig4.svg")

    print(f"{'freq_ghz':>9} {'nsr_mean':>9} {'ci3':>6} {'analytic':>9}")
    for r in reports:
        print(f"{r.freq_hz / 1e9:9.2f} {r.nsr_mean_db:9.2f} {r.ci3_db:6.2f} {r.nsr_analytic_db:9.2f}")
    print(f"elapsed {time.perf_counter() - t0:.1f} s; outputs in {out}")
    return EXIT_OK


def cmd_budget(args: argparse.Namespace) -> int:
    rescale = None
    if (args.t_from is None) != (args.t_to is None):
        raise ConfigurationError("--t-from and --t-to must be given together")
    if args.t_from is not None:
        rescale = (args.t_from, args.t_to)
    rep = budget(args.slices, args.slice_bw_ghz * 1e9, args.mll_jitter, args.elec_jitter, rescale)
    print(f"slices                   {rep.n_slices} x {args.slice_bw_ghz:g} GHz")
    if rescale:
        print(f"rescaled jitters         MLL {rep.mll_jitter_used_s:.4g} s, clock {rep.elec_jitter_used_s:.4g} s")
    print(f"effective clock jitter   {rep.eff_elec_jitter_s:.4g} s")
    print(f"effective MLL jitter     {rep.eff_mll_jitter_s:.4g} s")
    print(f"worst case at            {rep.worst_case_freq_hz / 1e9:g} GHz")
    print(f"sliced SNR / ENOB        {rep.worst_case_snr_db:.2f} dB / {rep.worst_case_enob:.2f} bits")
    print(f"all-electric SNR / ENOB  {rep.electric_snr_db:.2f} dB / {rep.electric_enob:.2f} bits")
    print(f"ENOB gain                {rep.enob_gain:.2f} bits")
    if args.out:
        out = _out_dir(args)
        (out / "budget.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario file (YAML or JSON)")
    p.add_argument("--preset", choices=PRESETS, help="built-in scenario when --config is absent (default desk)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed (overrides run.master_seed)")
    p.add_argument("--runs", type=int, help="runs per point (overrides run.runs)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicedadc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="repeated runs of one scenario")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Monte Carlo NSR versus frequency")
    _common(p)
    p.add_argument("--freqs", help="comma-separated frequencies in GHz (default: preset list)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("budget", help="closed-form jitter budget")
    p.add_argument("--slices", type=int, default=4)
    p.add_argument("--slice-bw-ghz", type=float, default=30.0)
    p.add_argument("--mll-jitter", type=float, default=870e-18, help="seconds")
    p.add_argument("--elec-jitter", type=float, default=6.4e-15, help="seconds")
    p.add_argument("--t-from", type=float, help="observation time of the given jitters (s)")
    p.add_argument("--t-to", type=float, help="observation time to rescale to (s)")
    p.add_argument("--out", help="directory for budget.json")
    p.set_defaults(func=cmd_budget)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SlicedAdcError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
