"""
Fock-truncated Lindblad master equation for the driven cavity/dot system.

Serves as the reference the moment equations are checked against. The
Hilbert space is {|g>, |e>} (x) {|0>, ..., |N>}, so for the default N = 3 the
density matrix is 8 x 8 and is evolved directly as a matrix ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationFailure, TruncationNotConverged
from .mbe import ATOL, METHOD, RTOL, _segment_drive, sample_grid
from .model import DriveWaveform, SystemParams, TimeSeries, breakpoints, evaluate_drive, to_angular

DEFAULT_N = 3
CONVERGENCE_RTOL = 1e-6


@dataclass(frozen=True)
class Operators:
    N: int
    a: np.ndarray
    sigma: np.ndarray
    sigma_z: np.ndarray
    identity: np.ndarray

    @property
    def dim(self) -> int:
        return self.identity.shape[0]

    @property
    def n_cav(self) -> np.ndarray:
        return self.a.conj().T @ self.a

    @property
    def n_qd(self) -> np.ndarray:
        return self.sigma.conj().T @ self.sigma


def build_operators(N: int = DEFAULT_N) -> Operators:
    """Ladder operators on the two-level (x) truncated-Fock space."""
    if N < 1:
        raise ValueError("photon truncation N must be >= 1")
    fock = np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), 1).astype(complex)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| on (g, e)
    eye_f = np.eye(N + 1, dtype=complex)
    eye_q = np.eye(2, dtype=complex)
    a = np.kron(eye_q, fock)
    sigma = np.kron(lower, eye_f)
    sd = sigma.conj().T
    sigma_z = sd @ sigma - sigma @ sd
    return Operators(N=N, a=a, sigma=sigma, sigma_z=sigma_z, identity=np.eye(2 * (N + 1), dtype=complex))


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray
    N: int

    @classmethod
    def ground(cls, N: int = DEFAULT_N) -> "DensityMatrix":
        dim = 2 * (N + 1)
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, N)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def trace_defect(self) -> float:
        return float(abs(np.trace(self.rho) - 1.0))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])


class _Liouvillian:
    """Precomputed pieces of the right-hand side for one parameter set."""

    def __init__(self, p: SystemParams, ops: Operators):
        a, s, sz = ops.a, ops.sigma, ops.sigma_z
        ad, sd = a.conj().T, s.conj().T
        self.ops = ops
        self.nqd = sd @ s
        h0 = (p.delta_omega_c * (ad @ a)
              + 1j * p.g * (ad @ s - a @ sd)
              + p.omega * (a + ad))
        # anticommutator part of the dissipators folded into a non-Hermitian H
        damp = p.kappa * (ad @ a) + p.gamma * self.nqd + 0.25 * p.gamma_d * ops.identity
        self.heff0 = h0 - 1j * damp
        self.a, self.ad, self.s, self.sd, self.sz = a, ad, s, sd, sz
        self.kappa, self.gamma, self.gamma_d = p.kappa, p.gamma, p.gamma_d

    def __call__(self, delta: float, rho: np.ndarray) -> np.ndarray:
        heff = self.heff0 + delta * self.nqd
        out = -1j * (heff @ rho) + 1j * (rho @ heff.conj().T)
        out += 2 * self.kappa * (self.a @ rho @ self.ad)
        out += 2 * self.gamma * (self.s @ rho @ self.sd)
        if self.gamma_d:
            out += 0.5 * self.gamma_d * (self.sz @ rho @ self.sz)
        return out


def rhs(p: SystemParams, delta_omega_a: float, rho, N: int | None = None) -> np.ndarray:
    """Time derivative of the density matrix at QD detuning ``delta_omega_a`` (/2pi GHz)."""
    if isinstance(rho, DensityMatrix):
        N, rho = rho.N, rho.rho
    rho = np.asarray(rho, dtype=complex)
    if N is None:
        N = rho.shape[0] // 2 - 1
    return _Liouvillian(p, build_operators(N))(to_angular(delta_omega_a), rho)


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def _evolve_once(p, w, times, t0, t1, N, initial, rtol, atol):
    ops = build_operators(N)
    liou = _Liouvillian(p, ops)
    dim = ops.dim
    if initial is None or (isinstance(initial, str) and initial == "ground"):
        rho0 = DensityMatrix.ground(N).rho
    elif isinstance(initial, DensityMatrix):
        if initial.N != N:
            raise ValueError("initial density matrix truncation does not match N")
        rho0 = initial.rho
    else:
        raise ValueError(f"unknown initial state {initial!r}")

    edges = [t0, *breakpoints(w, t0, t1), t1]
    y = rho0.reshape(-1).astype(complex)
    chunks = []
    for k, (s0, s1) in enumerate(zip(edges[:-1], edges[1:])):
        last = k == len(edges) - 2
        sel = (times >= s0) & ((times <= s1) if last else (times < s1))
        drive = _segment_drive(w, s0, s1)

        def f(t, y, drive=drive):
            return liou(drive(t), y.reshape(dim, dim)).reshape(-1)

        seg_times = times[sel]
        with_end = seg_times.size == 0 or seg_times[-1] != s1
        if with_end:
            seg_times = np.append(seg_times, s1)
        sol = solve_ivp(f, (s0, s1), y, method=METHOD, rtol=rtol, atol=atol, t_eval=seg_times)
        if sol.status != 0:
            raise IntegrationFailure(f"master equation integration failed: {sol.message}")
        y = sol.y[:, -1]
        chunks.append(sol.y[:, :-1] if with_end else sol.y)

    rhos = np.concatenate(chunks, axis=1).T.reshape(-1, dim, dim)
    return ops, rhos


def evolve(
    p: SystemParams,
    w: DriveWaveform,
    t_span: tuple[float, float],
    sample_dt: float,
    N: int = DEFAULT_N,
    initial="ground",
    check_convergence: bool = True,
    rtol: float = RTOL,
    atol: float = ATOL,
    t_eval: np.ndarray | None = None,
) -> TimeSeries:
    """Integrate the master equation and sample the same observables as the MBE engine.

    With ``check_convergence`` the run is repeated at N + 1 and
    :class:`TruncationNotConverged` is raised if the peak photon number moves
    by more than ``CONVERGENCE_RTOL`` relative.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    times = sample_grid(t0, t1, sample_dt) if t_eval is None else np.asarray(t_eval, dtype=float)

    ops, rhos = _evolve_once(p, w, times, t0, t1, N, initial, rtol, atol)
    n_cav = np.einsum("ij,tji->t", ops.n_cav, rhos)
    meta = {"N": N}

    if check_convergence:
        init_up = initial
        if isinstance(initial, DensityMatrix):
            init_up = _pad(initial, N + 1)
        ops_up, rhos_up = _evolve_once(p, w, times, t0, t1, N + 1, init_up, rtol, atol)
        n_up = np.einsum("ij,tji->t", ops_up.n_cav, rhos_up).real
        peak, peak_up = np.max(np.abs(n_cav.real)), np.max(np.abs(n_up))
        change = abs(peak_up - peak) / peak_up if peak_up > 0 else abs(peak_up - peak)
        meta["convergence_change"] = float(change)
        if change > CONVERGENCE_RTOL:
            raise TruncationNotConverged(
                f"N={N} -> {N + 1} changes max <a^dag a> by {change:.3g} (relative)"
            )

    herm = np.max(np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1)))), initial=0.0)
    trace = np.max(np.abs(np.trace(rhos, axis1=1, axis2=2) - 1.0), initial=0.0)
    hermitian_part = 0.5 * (rhos + np.conj(np.transpose(rhos, (0, 2, 1))))
    min_eig = float(np.min(np.linalg.eigvalsh(hermitian_part))) if len(rhos) else 0.0
    meta.update(hermiticity_defect=float(herm), trace_defect=float(trace), min_eigenvalue=min_eig,
                final_state=DensityMatrix(rhos[-1].copy(), N) if len(rhos) else None)

    return TimeSeries(
        t=times,
        a=np.einsum("ij,tji->t", ops.a, rhos),
        sigma=np.einsum("ij,tji->t", ops.sigma, rhos),
        n_cav=n_cav.real,
        n_qd=np.einsum("ij,tji->t", ops.n_qd, rhos).real,
        detuning=np.asarray(evaluate_drive(w, times), dtype=float),
        kappa=p.kappa,
        meta=meta,
    )


def _pad(dm: DensityMatrix, N: int) -> DensityMatrix:
    """Embed a state into a larger photon truncation (zero amplitude on new levels)."""
    old, new = dm.N + 1, N + 1
    rho = np.zeros((2 * new, 2 * new), dtype=complex)
    idx = np.concatenate([np.arange(old), new + np.arange(old)])
    rho[np.ix_(idx, idx)] = dm.rho
    return DensityMatrix(rho, N)


def estimated_truncation(p: SystemParams) -> int:
    """Photon cutoff covering a coherent state with the empty-cavity amplitude Omega/kappa."""
    n = (p.omega / p.kappa) ** 2 if p.kappa > 0 else 0.0
    return int(math.floor(n + 6.0 * math.sqrt(n) + 3.0))


def find_truncation(p, w, t_span, sample_dt, N_start: int = DEFAULT_N, N_max: int = 40, **kwargs):
    """Increase N until the +1 convergence check passes; returns the converged series.

    The search starts at the larger of ``N_start`` and a photon-number
    estimate, so strongly driven runs skip the obviously too small spaces.
    """
    last_exc = None
    for N in range(max(N_start, min(estimated_truncation(p), N_max)), N_max + 1):
        try:
            return evolve(p, w, t_span, sample_dt, N=N, check_convergence=True, **kwargs)
        except TruncationNotConverged as exc:
            last_exc = exc
    raise TruncationNotConverged(f"no convergence up to N={N_max}: {last_exc}")
