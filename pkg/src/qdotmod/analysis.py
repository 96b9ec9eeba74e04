"""
Figures of merit for the modulator: frequency response, cutoff and rolloff,
harmonic distortion, step response, dephasing sweeps and switching energy.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import DomainError, InsufficientRange, NoCutoffInRange
from .mbe import integrate, normalized_transmission, steady_state
from .model import Constant, Sinusoid, SystemParams, TimeSeries, to_angular

EPSILON_0 = 8.8541878128e-12  # F/m

WARMUP_PERIODS = 5
WARMUP_KAPPA_TIMES = 20.0
ANALYSIS_PERIODS = 4
SAMPLES_PER_PERIOD = 256


def parallel_map(fn, items, jobs: int | None = 1) -> list:
    """Map ``fn`` over ``items`` keeping input order; ``jobs > 1`` uses processes."""
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# periodic steady state under sinusoidal modulation
# --------------------------------------------------------------------------

def periodic_window(
    p: SystemParams,
    delta_omega_0: float,
    omega_e: float,
    periods: int = ANALYSIS_PERIODS,
    samples_per_period: int = SAMPLES_PER_PERIOD,
) -> TimeSeries:
    """Sample ``periods`` full modulation periods after the warmup transient.

    The run starts from the zero-detuning steady state and discards
    max(5 periods, 20/kappa) of warmup. The returned grid includes both
    window endpoints, i.e. ``periods * samples_per_period + 1`` samples.
    """
    w = Sinusoid(delta_omega_0, omega_e)
    period = w.period
    warmup = max(WARMUP_PERIODS * period, WARMUP_KAPPA_TIMES / p.kappa)
    # whole number of periods so the window starts at the same drive phase
    warmup = math.ceil(warmup / period - 1e-9) * period
    n = periods * samples_per_period
    t = warmup + period * np.arange(n + 1) / samples_per_period
    return integrate(p, w, (0.0, float(t[-1])), period / samples_per_period, initial="steady", t_eval=t)


@dataclass(frozen=True)
class FreqResponsePoint:
    omega_e_over_2pi: float
    on_off_ratio: float

    @property
    def on_off_db(self) -> float:
        return 10.0 * math.log10(self.on_off_ratio)


def on_off_ratio(p: SystemParams, delta_omega_0: float, omega_e: float) -> FreqResponsePoint:
    out = periodic_window(p, delta_omega_0, omega_e).output
    return FreqResponsePoint(float(omega_e), float(out.max() / out.min()))


def frequency_response(p: SystemParams, delta_omega_0: float, omega_e_grid, jobs: int = 1) -> list[FreqResponsePoint]:
    grid = [float(f) for f in omega_e_grid]
    if not grid or any(f <= 0 for f in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("omega_e grid must be positive and strictly increasing")
    return parallel_map(partial(on_off_ratio, p, delta_omega_0), grid, jobs)


def quasi_static_ratio(p: SystemParams, delta_omega_0: float) -> float:
    """On/off ratio in the omega_e -> 0 limit from two steady-state solves."""
    hi = steady_state(p, delta_omega_0).n_cav
    lo = steady_state(p, 0.0).n_cav
    return hi / lo


def cutoff_frequency(points: list[FreqResponsePoint], drop_db: float = 3.0) -> float:
    """First modulation frequency where the on/off ratio (dB) is ``drop_db`` below the plateau.

    The plateau is the value at the lowest grid frequency; the crossing is
    interpolated linearly in dB against log frequency.
    """
    if len(points) < 2:
        raise NoCutoffInRange("need at least two frequency points")
    f = np.array([pt.omega_e_over_2pi for pt in points])
    db = np.array([pt.on_off_db for pt in points])
    level = db[0] - drop_db
    below = np.nonzero(db <= level)[0]
    if below.size == 0:
        raise NoCutoffInRange(f"response never drops {drop_db} dB below the plateau ({db[0]:.3f} dB)")
    k = below[0]
    if k == 0:
        return float(f[0])
    x0, x1 = math.log10(f[k - 1]), math.log10(f[k])
    y0, y1 = db[k - 1], db[k]
    frac = (y0 - level) / (y0 - y1)
    return float(10 ** (x0 + frac * (x1 - x0)))


def rolloff_slope(points: list[FreqResponsePoint], cutoff: float, span=(2.0, 20.0)) -> float:
    """Least-squares slope (dB/decade) of 10 log10(ratio - 1) over [2, 20] x cutoff."""
    f = np.array([pt.omega_e_over_2pi for pt in points])
    depth = np.array([pt.on_off_ratio for pt in points]) - 1.0
    if f.max() < 10 * cutoff:
        raise InsufficientRange("grid must extend at least one decade past the cutoff")
    sel = (f >= span[0] * cutoff) & (f <= span[1] * cutoff) & (depth > 0)
    if sel.sum() < 2:
        raise InsufficientRange("fewer than two usable points in the rolloff window")
    slope, _ = np.polyfit(np.log10(f[sel]), 10 * np.log10(depth[sel]), 1)
    return float(slope)


# --------------------------------------------------------------------------
# nonlinear distortion
# --------------------------------------------------------------------------

def fourier_coefficients(t: np.ndarray, y: np.ndarray, omega_e: float, harmonics=(1, 2, 3)) -> dict[int, complex]:
    """c_k = (2/T) * integral of y(t) exp(-i k w t) over the window (trapezoidal rule).

    The window must span an integer number of modulation periods.
    """
    w = to_angular(omega_e)
    span = t[-1] - t[0]
    return {k: complex(2.0 / span * np.trapezoid(y * np.exp(-1j * k * w * t), t)) for k in harmonics}


def harmonic_distortion(p: SystemParams, delta_omega_0: float, omega_e: float,
                        samples_per_period: int = SAMPLES_PER_PERIOD) -> tuple[float, float]:
    """Second- and third-harmonic amplitudes of the cavity output relative to the first."""
    if samples_per_period < 256:
        raise ValueError("at least 256 samples per period are required")
    ts = periodic_window(p, delta_omega_0, omega_e, samples_per_period=samples_per_period)
    c = fourier_coefficients(ts.t, ts.output, omega_e)
    return abs(c[2]) / abs(c[1]), abs(c[3]) / abs(c[1])


# --------------------------------------------------------------------------
# step response
# --------------------------------------------------------------------------

ON_TO_OFF = "on->off"  # detuning delta_omega_0 -> 0
OFF_TO_ON = "off->on"  # detuning 0 -> delta_omega_0


@dataclass(frozen=True)
class StepResponseParams:
    """Closed-form step-response coefficients (angular units).

    ``<a>(t) = r exp(-alpha t) cos(beta t - phi) + ss_target`` with
    ``phi = arctan(alpha / beta)`` and ``r = (ss_start - ss_target) / cos(phi)``.
    """

    alpha: complex
    beta: complex
    phi: complex
    r: complex
    ss_start: complex
    ss_target: complex

    def continuity_defect(self) -> float:
        return abs(self.r * np.cos(self.phi) + self.ss_target - self.ss_start)


def _ss(p: SystemParams, w: float) -> complex:
    gt = p.gamma + p.gamma_d
    return 1j * p.omega * (gt + 1j * w) / (p.g ** 2 + p.kappa * (gt + 1j * w))


def step_params(p: SystemParams, delta_omega_0: float, direction: str) -> StepResponseParams:
    if direction not in (ON_TO_OFF, OFF_TO_ON):
        raise ValueError(f"direction must be {ON_TO_OFF!r} or {OFF_TO_ON!r}")
    d0 = to_angular(delta_omega_0)
    start, target = (d0, 0.0) if direction == ON_TO_OFF else (0.0, d0)
    gt = p.gamma + p.gamma_d
    alpha = (p.kappa + gt + 1j * target) / 2
    disc = 4 * p.g ** 2 - (p.kappa - gt - 1j * target) ** 2
    if abs(disc) <= 1e-12 * (4 * p.g ** 2 + abs(p.kappa - gt - 1j * target) ** 2):
        raise DomainError("degenerate oscillation: 4 g^2 - (kappa - gamma - i w)^2 vanishes")
    beta = np.sqrt(complex(disc)) / 2
    phi = np.arctan(alpha / beta)
    ss_start, ss_target = _ss(p, start), _ss(p, target)
    r = (ss_start - ss_target) / np.cos(phi)
    return StepResponseParams(alpha, beta, complex(phi), complex(r), ss_start, ss_target)


def _series(p: SystemParams, t: np.ndarray, a: np.ndarray, detuning: float, n_cav=None) -> TimeSeries:
    nan = np.full(t.shape, np.nan)
    return TimeSeries(
        t=t, a=a, sigma=nan.astype(complex), n_cav=np.abs(a) ** 2 if n_cav is None else n_cav,
        n_qd=nan, detuning=np.full(t.shape, float(detuning)), kappa=p.kappa,
    )


def step_response_analytic(p: SystemParams, delta_omega_0: float, direction: str, t) -> TimeSeries:
    """Closed-form kappa |<a>(t)|^2 after an abrupt QD detuning switch at t = 0."""
    t = np.asarray(t, dtype=float)
    sp = step_params(p, delta_omega_0, direction)
    a = sp.r * np.exp(-sp.alpha * t) * np.cos(sp.beta * t - sp.phi) + sp.ss_target
    target = 0.0 if direction == ON_TO_OFF else delta_omega_0
    return _series(p, t, a, target)


def step_response_numeric(p: SystemParams, delta_omega_0: float, direction: str, t) -> TimeSeries:
    """MBE integration of the same switch, starting from the pre-switch steady state."""
    t = np.asarray(t, dtype=float)
    start, target = (delta_omega_0, 0.0) if direction == ON_TO_OFF else (0.0, delta_omega_0)
    return integrate(p, Constant(target), (float(t[0]), float(t[-1])), 1.0,
                     initial=steady_state(p, start), t_eval=t)


def normalized_rms(reference: np.ndarray, candidate: np.ndarray) -> float:
    """RMS difference divided by the peak-to-peak span of the reference."""
    reference, candidate = np.asarray(reference), np.asarray(candidate)
    span = np.ptp(reference)
    return float(np.sqrt(np.mean((candidate - reference) ** 2)) / span)


# --------------------------------------------------------------------------
# dephasing
# --------------------------------------------------------------------------

def _transmission_row(p: SystemParams, gamma_d: float) -> dict:
    q = p.replace(gamma_d_over_2pi=gamma_d)
    return {
        "gamma_d_over_2pi_ghz": gamma_d,
        "transmission_normalized": normalized_transmission(q, 0.0, incoherent=True),
        "transmission_coherent": normalized_transmission(q, 0.0),
    }


def _on_off_row(p: SystemParams, delta_omega_0: float, omega_e: float, gamma_d: float) -> dict:
    pt = on_off_ratio(p.replace(gamma_d_over_2pi=gamma_d), delta_omega_0, omega_e)
    return {"gamma_d_over_2pi_ghz": gamma_d, "on_off_ratio": pt.on_off_ratio, "on_off_db": pt.on_off_db}


def dephasing_sweep(p: SystemParams, gamma_d_grid, mode: str = "transmission",
                    omega_e: float | None = None, delta_omega_0: float | None = None,
                    jobs: int = 1) -> list[dict]:
    grid = [float(x) for x in gamma_d_grid]
    if any(x < 0 for x in grid):
        raise ValueError("dephasing rates must be nonnegative")
    if mode == "transmission":
        return [_transmission_row(p, x) for x in grid]
    if mode == "on_off":
        if omega_e is None or delta_omega_0 is None:
            raise ValueError("on_off mode needs omega_e and delta_omega_0")
        return parallel_map(partial(_on_off_row, p, delta_omega_0, omega_e), grid, jobs)
    raise ValueError(f"unknown dephasing sweep mode {mode!r}")


# --------------------------------------------------------------------------
# switching energy
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyParams:
    field_v_per_cm: float
    volume_m3: float
    relative_permittivity: float

    def __post_init__(self):
        if not (self.field_v_per_cm > 0 and self.volume_m3 > 0 and self.relative_permittivity > 0):
            raise ValueError("field, volume and permittivity must all be positive")


def switching_energy(e: EnergyParams) -> float:
    """Electrostatic energy eps0 eps_r F^2 V / 2 in joules."""
    field = e.field_v_per_cm * 100.0  # V/m
    return EPSILON_0 * e.relative_permittivity * field ** 2 * e.volume_m3 / 2.0


def power(e: EnergyParams | float, f_switch_ghz: float) -> float:
    """Operating power in watts at one switching event per cycle of ``f_switch_ghz``."""
    energy = switching_energy(e) if isinstance(e, EnergyParams) else float(e)
    return energy * (f_switch_ghz * 1e9)
