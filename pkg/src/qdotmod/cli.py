"""Command-line front end: ``qdotmod run|preset|validate``."""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import analysis as an
from . import master, mbe
from .config import ExperimentConfig, load_config
from .errors import ConfigError, InsufficientRange, NoCutoffInRange, SolverError
from .presets import PRESETS, preset
from .results import SweepResult, write_result

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _rows(columns, records) -> SweepResult:
    return SweepResult(list(columns), [dict(zip(columns, r)) for r in records])


# --------------------------------------------------------------------------
# experiment runners; each returns a SweepResult without metadata
# --------------------------------------------------------------------------

def _spectrum(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    cols = ["qd_detuning_over_2pi_ghz", "laser_detuning_over_2pi_ghz", "transmission_normalized"]
    records = []
    for qd in s["qd_detunings_ghz"]:
        spec = mbe.transmission_spectrum(cfg.params, s["laser_detuning_grid_ghz"], float(qd))
        records += [(float(qd), d, t) for d, t in spec]
    return _rows(cols, records)


def _transmission_sweep(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    cols = ["delta_omega_a_over_2pi_ghz", "transmission_normalized"]
    return _rows(cols, [(float(d), mbe.normalized_transmission(cfg.params, float(d)))
                        for d in cfg.settings["qd_detuning_grid_ghz"]])


def _param_family(cfg: ExperimentConfig) -> list:
    s, p = cfg.settings, cfg.params
    gs = s["g_values_ghz"] if s["g_values_ghz"] is not None else [p.g_over_2pi]
    ks = s["kappa_values_ghz"] if s["kappa_values_ghz"] is not None else [p.kappa_over_2pi]
    if s["family"] == "product":
        pairs = list(itertools.product(gs, ks))
    else:
        pairs = [(g, p.kappa_over_2pi) for g in gs] + [(p.g_over_2pi, k) for k in ks]
    seen, out = set(), []
    for g, k in pairs:
        key = (float(g), float(k))
        if key not in seen:
            seen.add(key)
            out.append(p.replace(g_over_2pi=key[0], kappa_over_2pi=key[1]))
    return out


def _freq_task(args):
    q, d0, f = args
    return an.on_off_ratio(q, d0, f)


def _freqresp(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    d0 = s["delta_omega_0_over_2pi_ghz"]
    grid = [float(f) for f in s["omega_e_grid_ghz"]]
    family = _param_family(cfg)
    tasks = [(q, d0, f) for q in family for f in grid]
    flat = an.parallel_map(_freq_task, tasks, jobs)
    curves = [flat[i * len(grid):(i + 1) * len(grid)] for i in range(len(family))]

    if s["report"] == "curve":
        cols = ["g_over_2pi_ghz", "kappa_over_2pi_ghz", "omega_e_over_2pi_ghz", "on_off_ratio", "on_off_db"]
        return _rows(cols, [(q.g_over_2pi, q.kappa_over_2pi, pt.omega_e_over_2pi, pt.on_off_ratio, pt.on_off_db)
                            for q, pts in zip(family, curves) for pt in pts])

    cols = ["g_over_2pi_ghz", "kappa_over_2pi_ghz", "cutoff_ghz", "rolloff_db_per_decade", "plateau_on_off_db"]
    probe = s["probe_omega_e_ghz"]
    if probe is not None:
        cols.append("probe_on_off_db")
    records = []
    for q, pts in zip(family, curves):
        try:
            fc = an.cutoff_frequency(pts)
        except NoCutoffInRange:
            fc = math.nan
        try:
            slope = an.rolloff_slope(pts, fc) if math.isfinite(fc) else math.nan
        except InsufficientRange:
            slope = math.nan
        rec = [q.g_over_2pi, q.kappa_over_2pi, fc, slope, pts[0].on_off_db]
        if probe is not None:
            rec.append(an.on_off_ratio(q, d0, probe).on_off_db)
        records.append(rec)
    return _rows(cols, records)


def _harmonics(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    fe = s["omega_e_over_2pi_ghz"]
    d0s = [float(d) for d in s["delta_omega_0_grid_ghz"]]
    if s["report"] == "ratios":
        cols = ["delta_omega_0_over_2pi_ghz", "h2_over_h1", "h3_over_h1"]
        res = an.parallel_map(_harm_task, [(cfg.params, d, fe, s["samples_per_period"]) for d in d0s], jobs)
        return _rows(cols, [(d, h2, h3) for d, (h2, h3) in zip(d0s, res)])
    cols = ["delta_omega_0_over_2pi_ghz", "t_ns", "delta_omega_a_over_2pi_ghz", "output_normalized"]
    records = []
    for d in d0s:
        ts = an.periodic_window(cfg.params, d, fe, samples_per_period=s["samples_per_period"])
        out = ts.output / ts.output.max()
        t = ts.t - ts.t[0]
        records += [(d, ti, di, oi) for ti, di, oi in zip(t, ts.detuning, out)]
    return _rows(cols, records)


def _harm_task(args):
    p, d, fe, spp = args
    return an.harmonic_distortion(p, d, fe, spp)


def _step(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    t = mbe.sample_grid(0.0, s["t_end_ns"], s["sample_dt_ns"])
    dirs = [an.ON_TO_OFF, an.OFF_TO_ON] if s["direction"] == "both" else [s["direction"]]
    cols, series = ["t_ns"], [t]
    for d in dirs:
        tag = "on_off" if d == an.ON_TO_OFF else "off_on"
        ana = an.step_response_analytic(cfg.params, s["delta_omega_0_over_2pi_ghz"], d, t)
        num = an.step_response_numeric(cfg.params, s["delta_omega_0_over_2pi_ghz"], d, t)
        cols += [f"{tag}_analytic", f"{tag}_numeric"]
        series += [ana.kappa * ana.n_cav, num.output]
    return _rows(cols, zip(*series))


def _dephasing(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    rows = an.dephasing_sweep(cfg.params, s["gamma_d_grid_ghz"], s["mode"],
                              s["omega_e_over_2pi_ghz"], s["delta_omega_0_over_2pi_ghz"], jobs=jobs)
    return SweepResult(list(rows[0]), rows)


def _energy(cfg: ExperimentConfig, jobs: int) -> SweepResult:
    s = cfg.settings
    cols = ["field_v_per_cm", "volume_m3", "relative_permittivity", "energy_j", "f_switch_ghz", "power_w"]
    records = []
    for v in s["volume_m3"]:
        e = an.EnergyParams(s["field_v_per_cm"], float(v), s["relative_permittivity"])
        energy = an.switching_energy(e)
        records.append((e.field_v_per_cm, e.volume_m3, e.relative_permittivity, energy,
                        s["f_switch_ghz"], an.power(energy, s["f_switch_ghz"])))
    return _rows(cols, records)


RUNNERS = {
    "spectrum": _spectrum,
    "transmission-sweep": _transmission_sweep,
    "freqresp": _freqresp,
    "harmonics": _harmonics,
    "step": _step,
    "dephasing": _dephasing,
    "energy": _energy,
}


# --------------------------------------------------------------------------
# validation against the master equation
# --------------------------------------------------------------------------

def validate(cfg: ExperimentConfig) -> dict:
    """Run MBE and master equation side by side from the empty/ground state."""
    s = cfg.settings
    p, w = cfg.params, cfg.waveform
    span, dt = (0.0, s["t_end_ns"]), s["sample_dt_ns"]
    me = master.find_truncation(p, w, span, dt, N_start=s["truncation"], N_max=s["max_truncation"])
    mb = mbe.integrate(p, w, span, dt, initial="zero")
    dev_cav = float(np.max(np.abs(mb.n_cav - me.n_cav)) / np.max(me.n_cav))
    dev_qd = float(np.max(np.abs(mb.n_qd - me.n_qd)) / np.max(me.n_qd))
    passed = dev_cav <= s["threshold"] and dev_qd <= s["threshold"]
    return {
        "verdict": "PASS" if passed else "FAIL",
        "threshold": s["threshold"],
        "max_rel_dev_n_cav": dev_cav,
        "max_rel_dev_n_qd": dev_qd,
        "truncation_N": me.meta["N"],
        "truncation_change_N_to_N_plus_1": me.meta["convergence_change"],
        "trace_defect": me.meta["trace_defect"],
        "hermiticity_defect": me.meta["hermiticity_defect"],
        "min_eigenvalue": me.meta["min_eigenvalue"],
        "mbe_symmetry_defect": mb.meta["symmetry_defect"],
    }


def format_report(report: dict) -> str:
    lines = [f"validation: {report['verdict']} (threshold {report['threshold']:.3g})"]
    for key, value in report.items():
        if key not in ("verdict", "threshold"):
            lines.append(f"  {key}: {value:.6g}" if isinstance(value, float) else f"  {key}: {value}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# entry points
# --------------------------------------------------------------------------

def execute(cfg: ExperimentConfig, jobs: int = 1) -> SweepResult:
    if cfg.experiment == "validate":
        report = validate(cfg)
        cols = [k for k, v in report.items() if isinstance(v, (int, float))] + ["passed"]
        row = {k: float(report[k]) for k in cols[:-1]}
        row["passed"] = 1.0 if report["verdict"] == "PASS" else 0.0
        result = SweepResult(cols, [row])
        result.metadata["report"] = report
    else:
        result = RUNNERS[cfg.experiment](cfg, jobs)
    return result


def _summary(cfg: ExperimentConfig, result: SweepResult) -> str:
    if cfg.experiment == "energy":
        lines = []
        for row in result.rows:
            lines.append(f"V = {row['volume_m3']:.4g} m^3: E = {row['energy_j'] * 1e15:.4g} fJ, "
                         f"power at {row['f_switch_ghz']:g} GHz = {row['power_w'] * 1e6:.4g} uW")
        nominal = cfg.settings.get("nominal_energy_j")
        if nominal is not None:
            f = cfg.settings["f_switch_ghz"]
            lines.append(f"nominal E = {nominal * 1e15:.4g} fJ: power at {f:g} GHz = "
                         f"{an.power(nominal, f) * 1e6:.4g} uW")
        return "\n".join(lines)
    if cfg.experiment == "validate":
        return format_report(result.metadata["report"])
    return f"{cfg.experiment}: {len(result.rows)} rows"


def _run_config(cfg: ExperimentConfig, out: str | None, fmt: str | None, jobs: int, label: str) -> int:
    start = time.perf_counter()
    try:
        result = execute(cfg, jobs)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    result.metadata.update({
        "config": cfg.resolved(),
        "source": label,
        "tool": "qdotmod",
        "version": __version__,
        "wall_time_s": time.perf_counter() - start,
    })
    print(_summary(cfg, result))
    path = out or cfg.output_path
    if path:
        for written in write_result(result, path, fmt or cfg.output_format):
            print(f"wrote {written}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdotmod", description="Quantum-dot cavity electro-optic modulator simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    default_jobs = os.cpu_count() or 1
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--jobs", type=int, default=default_jobs)

    pre = sub.add_parser("preset", help="run a built-in figure preset")
    pre.add_argument("name", choices=sorted(PRESETS))
    pre.add_argument("--out")
    pre.add_argument("--format", choices=("csv", "json"))
    pre.add_argument("--jobs", type=int, default=default_jobs)

    val = sub.add_parser("validate", help="compare the MBE engine with the master equation")
    val.add_argument("config")
    val.add_argument("--out")
    val.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            cfg, label = preset(args.name), f"preset:{args.name}"
        else:
            cfg, label = load_config(args.config), str(args.config)
        if args.command == "validate" and cfg.experiment != "validate":
            raise ConfigError(f"validate expects an experiment named 'validate', got {cfg.experiment!r}")
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError("--jobs must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _run_config(cfg, args.out, args.format, getattr(args, "jobs", 1), label)


if __name__ == "__main__":
    sys.exit(main())
