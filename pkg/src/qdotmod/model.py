"""
Parameter records, drive waveforms and observable containers.

Every rate is stored as its "/2pi" value in GHz and time is in ns. The
equations of motion use angular rates (rad/ns); :func:`to_angular` is the
only place where that conversion happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

TWO_PI = 2.0 * math.pi


def to_angular(value_over_2pi):
    """Convert a rate given as value/2pi in GHz to rad/ns."""
    return TWO_PI * value_over_2pi


@dataclass(frozen=True)
class SystemParams:
    """Cavity-QED parameter set (all values are /2pi, in GHz)."""

    g_over_2pi: float
    kappa_over_2pi: float
    gamma_over_2pi: float
    gamma_d_over_2pi: float = 0.0
    omega_over_2pi: float = 1.0
    delta_omega_c_over_2pi: float = 0.0

    def __post_init__(self):
        for name in ("g_over_2pi", "kappa_over_2pi", "gamma_over_2pi",
                     "gamma_d_over_2pi", "omega_over_2pi"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.delta_omega_c_over_2pi):
            raise ValueError("delta_omega_c_over_2pi must be finite")

    # angular-rate views used by the solvers
    @property
    def g(self) -> float:
        return to_angular(self.g_over_2pi)

    @property
    def kappa(self) -> float:
        return to_angular(self.kappa_over_2pi)

    @property
    def gamma(self) -> float:
        return to_angular(self.gamma_over_2pi)

    @property
    def gamma_d(self) -> float:
        return to_angular(self.gamma_d_over_2pi)

    @property
    def omega(self) -> float:
        return to_angular(self.omega_over_2pi)

    @property
    def delta_omega_c(self) -> float:
        return to_angular(self.delta_omega_c_over_2pi)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Constant:
    delta_omega_a_over_2pi: float = 0.0


@dataclass(frozen=True)
class Sinusoid:
    """Raised-cosine swing 0 -> delta_omega_0 -> 0 at modulation frequency omega_e."""

    delta_omega_0_over_2pi: float
    omega_e_over_2pi: float

    def __post_init__(self):
        if not self.omega_e_over_2pi > 0:
            raise ValueError("omega_e_over_2pi must be > 0")

    @property
    def period(self) -> float:
        return 1.0 / self.omega_e_over_2pi


@dataclass(frozen=True)
class Step:
    start_detuning_over_2pi: float
    end_detuning_over_2pi: float
    switch_time: float = 0.0


DriveWaveform = Union[Constant, Sinusoid, Step]


def evaluate_drive(w: DriveWaveform, t):
    """QD detuning Delta omega_a(t)/2pi in GHz; accepts scalars or arrays."""
    tt = np.asarray(t, dtype=float)
    if isinstance(w, Constant):
        out = np.full(tt.shape, float(w.delta_omega_a_over_2pi))
    elif isinstance(w, Sinusoid):
        phase = to_angular(w.omega_e_over_2pi) * tt
        out = 0.5 * w.delta_omega_0_over_2pi * (1.0 - np.cos(phase))
    elif isinstance(w, Step):
        out = np.where(tt < w.switch_time,
                       float(w.start_detuning_over_2pi),
                       float(w.end_detuning_over_2pi))
    else:
        raise TypeError(f"unknown waveform {w!r}")
    return float(out) if out.ndim == 0 else out


def drive_function(w: DriveWaveform):
    """Fast scalar closure t -> angular detuning (rad/ns) for ODE right-hand sides."""
    if isinstance(w, Constant):
        value = to_angular(w.delta_omega_a_over_2pi)
        return lambda t: value
    if isinstance(w, Sinusoid):
        amp = 0.5 * to_angular(w.delta_omega_0_over_2pi)
        we = to_angular(w.omega_e_over_2pi)
        return lambda t: amp * (1.0 - math.cos(we * t))
    if isinstance(w, Step):
        lo = to_angular(w.start_detuning_over_2pi)
        hi = to_angular(w.end_detuning_over_2pi)
        ts = w.switch_time
        return lambda t: lo if t < ts else hi
    raise TypeError(f"unknown waveform {w!r}")


def breakpoints(w: DriveWaveform, t0: float, t1: float) -> list[float]:
    """Times strictly inside (t0, t1) where the waveform jumps."""
    if isinstance(w, Step) and t0 < w.switch_time < t1:
        return [w.switch_time]
    return []


@dataclass
class TimeSeries:
    """Sampled observables on a strictly increasing time grid (ns)."""

    t: np.ndarray
    a: np.ndarray  # complex <a>
    sigma: np.ndarray  # complex <sigma>
    n_cav: np.ndarray  # <a^dag a>
    n_qd: np.ndarray  # <sigma^dag sigma>
    detuning: np.ndarray  # Delta omega_a(t)/2pi, GHz
    kappa: float  # angular cavity decay used for the output rate
    meta: dict = field(default_factory=dict)

    @property
    def output(self) -> np.ndarray:
        """Cavity output rate kappa <a^dag a> (photons/ns)."""
        return self.kappa * self.n_cav

    def check(self, tol: float = 1e-9) -> None:
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid is not strictly increasing")
        if np.min(self.n_cav) < -tol:
            raise ValueError("negative cavity population")
        if np.min(self.n_qd) < -tol or np.max(self.n_qd) > 1 + tol:
            raise ValueError("QD population outside [0, 1]")
