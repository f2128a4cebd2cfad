"""Scenario configuration: schema, defaults, presets and a YAML/JSON loader
that reports errors with the offending field and line."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Union

import numpy as np
import yaml

from slicedadc.errors import ConfigurationError
from slicedadc.noise import NoiseSpec
from slicedadc.optics import FrequencyPlan, ToneSpec
from slicedadc.sigkit import TimeGrid

PRESETS = ("paper", "desk")

# 0.1 us class record: 340000 x 0.3 ps = 102 ns puts every 0.5 GHz multiple on a bin.
DESK_SAMPLES = 340_000
PAPER_SAMPLES = 11_000_000


@dataclass(frozen=True)
class GridCfg:
    dt_ps: float = 0.3
    n_samples: int = DESK_SAMPLES


@dataclass(frozen=True)
class PlanCfg:
    n_slices: int = 4
    slice_bw_ghz: float = 30.0
    guard_ghz: float = 2.0
    lo_bw_ghz: Union[float, None] = None


@dataclass(frozen=True)
class EnableCfg:
    carrier: bool = True
    mll_optical: bool = True
    mll_rf: bool = True
    elec: bool = True


@dataclass(frozen=True)
class NoiseCfg:
    carrier_lw_hz: float = 100e3
    mll_optical_lw_hz: float = 10e6
    mll_rf_lw_hz: float = 3e3
    elec_lw_hz: float = 180e3
    elec_osc_freq_ghz: float = 60.0
    enable: EnableCfg = field(default_factory=EnableCfg)


@dataclass(frozen=True)
class CombCfg:
    amplitudes: Union[float, tuple] = 1.0
    static_phases: Union[float, tuple, str] = 0.0


@dataclass(frozen=True)
class SignalCfg:
    freq_ghz: float = 100.0
    mod_index: float = 1.0
    transducer: Literal["linear", "mzm"] = "linear"


@dataclass(frozen=True)
class DigitizerCfg:
    rate_gsps: Union[float, str] = "auto"
    bits: Union[int, str] = "ideal"


@dataclass(frozen=True)
class DspCfg:
    rin_cancel: bool = True
    phase_correction: Literal["oracle", "pilot"] = "oracle"


@dataclass(frozen=True)
class RunCfg:
    master_seed: int = 1
    runs: int = 65


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridCfg = field(default_factory=GridCfg)
    plan: PlanCfg = field(default_factory=PlanCfg)
    noise: NoiseCfg = field(default_factory=NoiseCfg)
    comb: CombCfg = field(default_factory=CombCfg)
    signal: SignalCfg = field(default_factory=SignalCfg)
    digitizer: DigitizerCfg = field(default_factory=DigitizerCfg)
    dsp: DspCfg = field(default_factory=DspCfg)
    run: RunCfg = field(default_factory=RunCfg)

    # -- derived domain objects -------------------------------------------
    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.grid.dt_ps * 1e-12, self.grid.n_samples)

    def frequency_plan(self) -> FrequencyPlan:
        lo = self.plan.lo_bw_ghz
        return FrequencyPlan(
            self.plan.n_slices,
            self.plan.slice_bw_ghz * 1e9,
            self.plan.guard_ghz * 1e9,
            None if lo is None else lo * 1e9,
        )

    def noise_spec(self) -> NoiseSpec:
        n = self.noise
        return NoiseSpec(
            carrier_linewidth_hz=n.carrier_lw_hz,
            mll_optical_linewidth_hz=n.mll_optical_lw_hz,
            mll_rf_linewidth_hz=n.mll_rf_lw_hz,
            elec_linewidth_hz=n.elec_lw_hz,
            elec_osc_freq_hz=n.elec_osc_freq_ghz * 1e9,
            carrier_enabled=n.enable.carrier,
            mll_optical_enabled=n.enable.mll_optical,
            mll_rf_enabled=n.enable.mll_rf,
            elec_enabled=n.enable.elec,
        )

    def tone(self, freq_hz: float | None = None) -> ToneSpec:
        f = self.signal.freq_ghz * 1e9 if freq_hz is None else freq_hz
        return ToneSpec(f, self.signal.mod_index, self.signal.transducer)

    def digitizer_rate_hz(self) -> float:
        from slicedadc.digitizer import auto_rate

        if self.digitizer.rate_gsps == "auto":
            return auto_rate(self.frequency_plan(), self.time_grid().duration)
        return float(self.digitizer.rate_gsps) * 1e9

    # -- convenience -------------------------------------------------------
    def with_sources(self, **flags: bool) -> "ScenarioConfig":
        """Copy with only the named noise sources enabled."""
        en = EnableCfg(**{k: bool(flags.get(k, False)) for k in asdict(EnableCfg())})
        return replace(self, noise=replace(self.noise, enable=en))

    def with_(self, **sections: dict) -> "ScenarioConfig":
        """Copy with fields of the named sections overridden,
        e.g. ``cfg.with_(plan={"guard_ghz": 4})``."""
        updates = {}
        for name, vals in sections.items():
            updates[name] = replace(getattr(self, name), **vals)
        return replace(self, **updates)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("amplitudes", "static_phases"):
            if isinstance(d["comb"][key], tuple):
                d["comb"][key] = list(d["comb"][key])
        return d

    def derived(self) -> dict:
        """Quantities resolved from the configuration, for reports."""
        from slicedadc.noise import effective_jitter

        g = self.time_grid()
        p = self.frequency_plan()
        return {
            "duration_s": g.duration,
            "freq_resolution_hz": g.df,
            "digitizer_rate_hz": self.digitizer_rate_hz(),
            "lo_bw_hz": p.lo_bw_hz,
            "lo_freqs_hz": [p.lo_freq(m) for m in range(p.n_slices)],
            "band_hz": [p.band.f_lo, p.band.f_hi],
            "mll_jitter_eff_s": effective_jitter(self.noise.mll_rf_lw_hz, g.duration, p.slice_bw_hz),
            "elec_jitter_eff_s": effective_jitter(
                self.noise.elec_lw_hz, g.duration, self.noise.elec_osc_freq_ghz * 1e9
            ),
        }


def preset(name: str) -> ScenarioConfig:
    """Paper-scale (3.3 us, 65 runs) or desk-scale (0.1 us class, 33 runs) defaults."""
    if name == "paper":
        return ScenarioConfig(grid=GridCfg(n_samples=PAPER_SAMPLES), run=RunCfg(runs=65))
    if name == "desk":
        return ScenarioConfig(grid=GridCfg(n_samples=DESK_SAMPLES), run=RunCfg(runs=33))
    raise ConfigurationError(f"unknown preset {name!r}; expected one of {PRESETS}")


# ---------------------------------------------------------------------------
# Loading and validation


class ConfigError(ConfigurationError):
    """Configuration error tied to a field path and, when known, a source line."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{path}: {message}")


def _line_map(node: yaml.Node, prefix: str = "", out: dict | None = None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    return out


_SCHEMA: dict[str, dict[str, str]] = {
    "grid": {"dt_ps": "pos", "n_samples": "int>=2"},
    "plan": {"n_slices": "int>=1", "slice_bw_ghz": "pos", "guard_ghz": "pos", "lo_bw_ghz": "pos|null"},
    "noise": {
        "carrier_lw_hz": "nonneg",
        "mll_optical_lw_hz": "nonneg",
        "mll_rf_lw_hz": "nonneg",
        "elec_lw_hz": "nonneg",
        "elec_osc_freq_ghz": "pos",
        "enable": "enable",
    },
    "comb": {"amplitudes": "amps", "static_phases": "phases"},
    "signal": {"freq_ghz": "pos", "mod_index": "nonneg", "transducer": "linear|mzm"},
    "digitizer": {"rate_gsps": "pos|auto", "bits": "int>=1|ideal"},
    "dsp": {"rin_cancel": "bool", "phase_correction": "oracle|pilot"},
    "run": {"master_seed": "int>=0", "runs": "int>=1"},
}


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_value(kind: str, v: Any, path: str, line: int | None) -> Any:
    def bad(msg: str) -> ConfigError:
        return ConfigError(path, f"{msg} (got {v!r})", line)

    if kind == "pos":
        if not _is_num(v) or v <= 0:
            raise bad("must be a number > 0")
        return float(v)
    if kind == "nonneg":
        if not _is_num(v) or v < 0:
            raise bad("must be a number >= 0")
        return float(v)
    if kind == "pos|null":
        return None if v is None else _check_value("pos", v, path, line)
    if kind.startswith("int>="):
        lo = int(kind.split(">=")[1].split("|")[0])
        if "|" in kind and isinstance(v, str):
            if v != kind.split("|")[1]:
                raise bad(f"must be an integer >= {lo} or '{kind.split('|')[1]}'")
            return v
        if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < lo:
            raise bad(f"must be an integer >= {lo}")
        return int(v)
    if kind == "pos|auto":
        if v == "auto":
            return v
        return _check_value("pos", v, path, line)
    if kind == "bool":
        if not isinstance(v, bool):
            raise bad("must be true or false")
        return v
    if kind in ("linear|mzm", "oracle|pilot"):
        if v not in kind.split("|"):
            raise bad(f"must be one of {kind.split('|')}")
        return v
    if kind == "amps":
        if _is_num(v) and v > 0:
            return float(v)
        if isinstance(v, list) and v and all(_is_num(x) and x > 0 for x in v):
            return tuple(float(x) for x in v)
        raise bad("must be a positive number or a list of positive numbers")
    if kind == "phases":
        if v == "random":
            return v
        if _is_num(v):
            return float(v)
        if isinstance(v, list) and v and all(_is_num(x) for x in v):
            return tuple(float(x) for x in v)
        raise bad("must be a number, a list of numbers or 'random'")
    raise AssertionError(kind)


def config_from_dict(data: Any, lines: dict | None = None) -> ScenarioConfig:
    """Build and validate a :class:`ScenarioConfig` from a nested mapping."""
    lines = lines or {}
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a mapping", 1)
    base = ScenarioConfig()
    sections: dict[str, Any] = {}
    for sec, raw in data.items():
        if sec == "derived":
            # Report-only block written alongside the echoed configuration.
            continue
        if sec not in _SCHEMA:
            raise ConfigError(str(sec), f"unknown section; expected one of {list(_SCHEMA)}", lines.get(str(sec)))
        if not isinstance(raw, dict):
            raise ConfigError(sec, "section must be a mapping", lines.get(sec))
        vals = {}
        for key, v in raw.items():
            path = f"{sec}.{key}"
            kind = _SCHEMA[sec].get(key)
            if kind is None:
                raise ConfigError(path, f"unknown field; expected one of {list(_SCHEMA[sec])}", lines.get(path))
            if kind == "enable":
                if not isinstance(v, dict):
                    raise ConfigError(path, "must be a mapping of source -> bool", lines.get(path))
                flags = {}
                for src, flag in v.items():
                    p2 = f"{path}.{src}"
                    if src not in asdict(EnableCfg()):
                        raise ConfigError(p2, "unknown noise source", lines.get(p2))
                    flags[src] = _check_value("bool", flag, p2, lines.get(p2))
                vals[key] = replace(base.noise.enable, **flags)
            else:
                vals[key] = _check_value(kind, v, path, lines.get(path))
        sections[sec] = replace(getattr(base, sec), **vals)
    cfg = replace(base, **sections)
    _cross_validate(cfg, lines)
    return cfg


def _cross_validate(cfg: ScenarioConfig, lines: dict) -> None:
    def fail(path: str, msg: str) -> None:
        raise ConfigError(path, msg, lines.get(path))

    p = cfg.plan
    if not p.guard_ghz < p.slice_bw_ghz / 4:
        fail("plan.guard_ghz", f"must be < slice_bw_ghz/4 = {p.slice_bw_ghz / 4:g} GHz (got {p.guard_ghz:g})")
    if p.lo_bw_ghz is not None and p.lo_bw_ghz > p.slice_bw_ghz:
        fail("plan.lo_bw_ghz", "must not exceed slice_bw_ghz")
    grid = cfg.time_grid()
    plan = cfg.frequency_plan()
    for key in ("amplitudes", "static_phases"):
        v = getattr(cfg.comb, key)
        if isinstance(v, tuple) and len(v) != p.n_slices:
            fail(f"comb.{key}", f"needs one entry per slice ({p.n_slices}), got {len(v)}")
    f = cfg.signal.freq_ghz * 1e9
    if not f < plan.band.f_hi:
        fail("signal.freq_ghz", f"upper sideband must fall below {plan.band.f_hi / 1e9:g} GHz")
    if not grid.is_on_bin(f):
        fail("signal.freq_ghz", f"not on a grid bin (resolution {grid.df / 1e6:.6g} MHz)")
    for m in range(p.n_slices):
        if not grid.is_on_bin(plan.lo_freq(m)):
            fail("plan.guard_ghz", f"LO of slice {m} at {plan.lo_freq(m) / 1e9:g} GHz is not on a grid bin")
    if plan.lo_freq(p.n_slices - 1) + plan.lo_bw_hz / 2 >= grid.nyquist or plan.band.f_hi >= grid.nyquist:
        fail("grid.dt_ps", "simulation Nyquist band does not cover the sliced band")
    if cfg.signal.transducer == "mzm" and not cfg.signal.mod_index < 1:
        fail("signal.mod_index", "mzm drive amplitude must be < 1")
    rate = cfg.digitizer_rate_hz()
    need = 2 * (plan.slice_bw_hz + 2 * plan.guard_hz)
    if rate < need * (1 - 1e-12):
        fail("digitizer.rate_gsps", f"below the Nyquist requirement {need / 1e9:g} GS/s")
    n_dig = rate * grid.duration
    if abs(n_dig - round(n_dig)) > 1e-6:
        fail("digitizer.rate_gsps", "rate x record duration must be an integer sample count")
    if n_dig > grid.n:
        fail("digitizer.rate_gsps", "digitizer rate exceeds the simulation rate")


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a YAML (or JSON) scenario file."""
    text = Path(path).read_text()
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("<syntax>", str(exc).splitlines()[0], mark.line + 1 if mark else None) from exc
    lines = _line_map(node) if node is not None else {}
    return config_from_dict(data, lines)


def dump_config(cfg: ScenarioConfig) -> str:
    """YAML text that :func:`load_config` reads back to ``cfg``."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def static_phases_for(cfg: ScenarioConfig, seed: int) -> np.ndarray:
    """Comb static phases; ``"random"`` draws uniform [-pi, pi) from ``seed``."""
    n = cfg.plan.n_slices
    v = cfg.comb.static_phases
    if v == "random":
        return np.random.default_rng(seed).uniform(-np.pi, np.pi, n)
    return np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
