"""
Strict INI-style experiment configuration.

A config has a ``[system]`` block with the cavity-QED rates, an optional
``[waveform]`` block, an ``[experiment]`` block naming what to run and an
optional ``[output]`` block. Every key is checked; anything unknown is a
:class:`ConfigError` that names the offending key.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import Constant, DriveWaveform, Sinusoid, Step, SystemParams

EXPERIMENTS = ("spectrum", "transmission-sweep", "freqresp", "harmonics", "step",
               "dephasing", "energy", "validate")
FORMATS = ("csv", "json")

SYSTEM_KEYS = {
    "g_over_2pi_ghz": "g_over_2pi",
    "kappa_over_2pi_ghz": "kappa_over_2pi",
    "gamma_over_2pi_ghz": "gamma_over_2pi",
    "gamma_d_over_2pi_ghz": "gamma_d_over_2pi",
    "omega_over_2pi_ghz": "omega_over_2pi",
}
SYSTEM_OPTIONAL = {"delta_omega_c_over_2pi_ghz": "delta_omega_c_over_2pi"}

WAVEFORM_KEYS = {
    "constant": {"delta_omega_a_over_2pi_ghz"},
    "sinusoid": {"delta_omega_0_over_2pi_ghz", "omega_e_over_2pi_ghz"},
    "step": {"start_detuning_over_2pi_ghz", "end_detuning_over_2pi_ghz", "switch_time_ns"},
}

# per experiment: key -> (kind, required, default)
_F, _G, _S, _I = "float", "grid", "str", "int"
EXPERIMENT_KEYS: dict[str, dict[str, tuple]] = {
    "spectrum": {
        "laser_detuning_grid_ghz": (_G, True, None),
        "qd_detunings_ghz": (_G, False, "0"),
    },
    "transmission-sweep": {
        "qd_detuning_grid_ghz": (_G, True, None),
    },
    "freqresp": {
        "delta_omega_0_over_2pi_ghz": (_F, True, None),
        "omega_e_grid_ghz": (_G, True, None),
        "g_values_ghz": (_G, False, None),
        "kappa_values_ghz": (_G, False, None),
        "report": (_S, False, "curve"),
        "probe_omega_e_ghz": (_F, False, None),
        "family": (_S, False, "one-at-a-time"),
    },
    "harmonics": {
        "omega_e_over_2pi_ghz": (_F, True, None),
        "delta_omega_0_grid_ghz": (_G, True, None),
        "report": (_S, False, "ratios"),
        "samples_per_period": (_I, False, "256"),
    },
    "step": {
        "delta_omega_0_over_2pi_ghz": (_F, True, None),
        "direction": (_S, False, "both"),
        "t_end_ns": (_F, False, "1.0"),
        "sample_dt_ns": (_F, False, "0.001"),
    },
    "dephasing": {
        "gamma_d_grid_ghz": (_G, True, None),
        "mode": (_S, False, "transmission"),
        "omega_e_over_2pi_ghz": (_F, False, None),
        "delta_omega_0_over_2pi_ghz": (_F, False, None),
    },
    "energy": {
        "field_v_per_cm": (_F, True, None),
        "volume_m3": (_G, True, None),
        "relative_permittivity": (_F, True, None),
        "f_switch_ghz": (_F, False, "10"),
        "nominal_energy_j": (_F, False, None),
    },
    "validate": {
        "t_end_ns": (_F, False, "2.0"),
        "sample_dt_ns": (_F, False, "0.002"),
        "truncation": (_I, False, "3"),
        "max_truncation": (_I, False, "40"),
        "threshold": (_F, False, "0.02"),
    },
}
_CHOICES = {
    ("freqresp", "report"): ("curve", "cutoff"),
    ("freqresp", "family"): ("one-at-a-time", "product"),
    ("harmonics", "report"): ("ratios", "waveform"),
    ("step", "direction"): ("on->off", "off->on", "both"),
    ("dephasing", "mode"): ("transmission", "on_off"),
}
NEEDS_SYSTEM = set(EXPERIMENTS) - {"energy"}
NEEDS_WAVEFORM = {"validate"}

_RANGE = re.compile(r"^(linspace|geomspace|arange)\(([^)]*)\)$")


def parse_grid(text: str) -> np.ndarray:
    """Comma-separated numbers, or ``linspace(a, b, n)``, ``geomspace(a, b, n)``, ``arange(a, b, step)``."""
    s = text.strip()
    m = _RANGE.match(s.replace(" ", ""))
    try:
        if m:
            args = [float(x) for x in m.group(2).split(",")]
            if len(args) != 3:
                raise ValueError
            fn = m.group(1)
            if fn == "arange":
                a, b, step = args
                return a + step * np.arange(int(np.floor((b - a) / step + 1e-9)) + 1)
            return getattr(np, fn)(args[0], args[1], int(args[2]))
        values = np.array([float(x) for x in s.split(",") if x.strip()])
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None
    if values.size == 0:
        raise ConfigError("grid is empty")
    return values


@dataclass
class ExperimentConfig:
    experiment: str
    params: SystemParams | None
    waveform: DriveWaveform | None
    settings: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "csv"
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Plain-data view of the config for result metadata."""
        def clean(v):
            if isinstance(v, np.ndarray):
                return [float(x) for x in v]
            return v
        out = {"experiment": self.experiment, "settings": {k: clean(v) for k, v in self.settings.items()}}
        if self.params is not None:
            out["system"] = {k: getattr(self.params, v) for k, v in {**SYSTEM_KEYS, **SYSTEM_OPTIONAL}.items()}
        if self.waveform is not None:
            out["waveform"] = {"kind": type(self.waveform).__name__.lower(), **vars(self.waveform)}
        return out


def _float(section: str, key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}") from None


def _check_keys(section: str, present, allowed) -> None:
    unknown = sorted(set(present) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(unknown)}")


def _parse_system(sec) -> SystemParams:
    _check_keys("system", sec.keys(), {**SYSTEM_KEYS, **SYSTEM_OPTIONAL})
    missing = [k for k in SYSTEM_KEYS if k not in sec]
    if missing:
        raise ConfigError(f"[system] missing key(s): {', '.join(missing)}")
    kwargs = {attr: _float("system", k, sec[k]) for k, attr in {**SYSTEM_KEYS, **SYSTEM_OPTIONAL}.items() if k in sec}
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[system] {exc}") from None


def _parse_waveform(sec) -> DriveWaveform:
    kind = sec.get("kind")
    if kind not in WAVEFORM_KEYS:
        raise ConfigError(f"[waveform] kind must be one of {sorted(WAVEFORM_KEYS)}, got {kind!r}")
    keys = WAVEFORM_KEYS[kind]
    _check_keys("waveform", sec.keys(), keys | {"kind"})
    missing = sorted(keys - set(sec.keys()))
    if kind == "step" and missing == ["switch_time_ns"]:
        missing = []
    if missing:
        raise ConfigError(f"[waveform] missing key(s): {', '.join(missing)}")
    v = {k: _float("waveform", k, sec[k]) for k in sec if k != "kind"}
    try:
        if kind == "constant":
            return Constant(v["delta_omega_a_over_2pi_ghz"])
        if kind == "sinusoid":
            return Sinusoid(v["delta_omega_0_over_2pi_ghz"], v["omega_e_over_2pi_ghz"])
        return Step(v["start_detuning_over_2pi_ghz"], v["end_detuning_over_2pi_ghz"], v.get("switch_time_ns", 0.0))
    except ValueError as exc:
        raise ConfigError(f"[waveform] {exc}") from None


def _parse_settings(name: str, sec) -> dict:
    schema = EXPERIMENT_KEYS[name]
    _check_keys("experiment", sec.keys(), set(schema) | {"name"})
    out = {}
    for key, (kind, required, default) in schema.items():
        raw = sec.get(key, default)
        if raw is None:
            if required:
                raise ConfigError(f"[experiment] {name} requires key {key}")
            out[key] = None
            continue
        if kind == _F:
            out[key] = _float("experiment", key, raw)
        elif kind == _I:
            try:
                out[key] = int(raw)
            except ValueError:
                raise ConfigError(f"[experiment] {key}: expected an integer, got {raw!r}") from None
        elif kind == _G:
            out[key] = parse_grid(raw)
        else:
            raw = raw.strip()
            choices = _CHOICES.get((name, key))
            if choices and raw not in choices:
                raise ConfigError(f"[experiment] {key} must be one of {choices}, got {raw!r}")
            out[key] = raw
    if name == "dephasing" and out["mode"] == "on_off":
        for key in ("omega_e_over_2pi_ghz", "delta_omega_0_over_2pi_ghz"):
            if out[key] is None:
                raise ConfigError(f"[experiment] dephasing mode on_off requires key {key}")
    return out


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keys are case-sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    allowed = {"system", "waveform", "experiment", "output"}
    unknown = sorted(set(cp.sections()) - allowed)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    exp = cp["experiment"]
    name = exp.get("name")
    if name not in EXPERIMENTS:
        raise ConfigError(f"[experiment] name must be one of {EXPERIMENTS}, got {name!r}")

    params = None
    if "system" in cp:
        params = _parse_system(cp["system"])
    elif name in NEEDS_SYSTEM:
        raise ConfigError(f"experiment {name} requires a [system] section")

    waveform = None
    if "waveform" in cp:
        waveform = _parse_waveform(cp["waveform"])
    elif name in NEEDS_WAVEFORM:
        raise ConfigError(f"experiment {name} requires a [waveform] section")

    settings = _parse_settings(name, exp)

    path, fmt = None, "csv"
    if "output" in cp:
        out = cp["output"]
        _check_keys("output", out.keys(), {"path", "format"})
        path = out.get("path")
        fmt = out.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"[output] format must be one of {FORMATS}, got {fmt!r}")

    raw = {s: dict(cp[s]) for s in cp.sections()}
    return ExperimentConfig(name, params, waveform, settings, path, fmt, raw)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
