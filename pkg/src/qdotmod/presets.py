"""Ready-made configs reproducing each figure's parameter set."""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

# g/2pi = kappa/2pi = 20 GHz with gamma = kappa/80 and no dephasing
_FIG1_SYSTEM = """
[system]
g_over_2pi_ghz = 20
kappa_over_2pi_ghz = 20
gamma_over_2pi_ghz = 0.25
gamma_d_over_2pi_ghz = 0
omega_over_2pi_ghz = 1
"""

# frequency-domain figures: gamma/2pi = gamma_d/2pi = 0.1 GHz, Omega/2pi = 1 GHz
_FREQ_SYSTEM = """
[system]
g_over_2pi_ghz = 20
kappa_over_2pi_ghz = 20
gamma_over_2pi_ghz = 0.1
gamma_d_over_2pi_ghz = 0.1
omega_over_2pi_ghz = 1
"""

_DISTORTION_SYSTEM = """
[system]
g_over_2pi_ghz = 20
kappa_over_2pi_ghz = 20
gamma_over_2pi_ghz = 0.1
gamma_d_over_2pi_ghz = 0
omega_over_2pi_ghz = 1
"""

FIG2_GRID = "0.05, 1, 2, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 100, 150, 200, 300, 500, 1000"

PRESETS: dict[str, str] = {
    "fig1a": _FIG1_SYSTEM + """
[experiment]
name = spectrum
laser_detuning_grid_ghz = linspace(-60, 60, 1201)
qd_detunings_ghz = 0, 40
""",
    "fig1b": _FIG1_SYSTEM + """
[experiment]
name = transmission-sweep
qd_detuning_grid_ghz = linspace(0, 100, 401)
""",
    "fig2": _FREQ_SYSTEM + f"""
[experiment]
name = freqresp
delta_omega_0_over_2pi_ghz = 10
omega_e_grid_ghz = {FIG2_GRID}
g_values_ghz = 10, 20, 30, 40
kappa_values_ghz = 10, 20, 30, 40
report = curve
""",
    "fig3": _FREQ_SYSTEM + f"""
[experiment]
name = freqresp
delta_omega_0_over_2pi_ghz = 5
omega_e_grid_ghz = {FIG2_GRID}
g_values_ghz = 10, 20, 30, 40
kappa_values_ghz = 10, 20, 30, 40
report = cutoff
family = product
probe_omega_e_ghz = 5
""",
    "fig4": _DISTORTION_SYSTEM + """
[experiment]
name = harmonics
omega_e_over_2pi_ghz = 20
delta_omega_0_grid_ghz = 2, 40
report = waveform
""",
    "fig5": _DISTORTION_SYSTEM + """
[experiment]
name = harmonics
omega_e_over_2pi_ghz = 20
delta_omega_0_grid_ghz = 0.1, 1, 2, 5, 10, 15, 20, 25, 30, 35, 40
report = ratios
""",
    "fig6": """
[system]
g_over_2pi_ghz = 20
kappa_over_2pi_ghz = 5
gamma_over_2pi_ghz = 0.1
gamma_d_over_2pi_ghz = 0
omega_over_2pi_ghz = 1

[experiment]
name = step
delta_omega_0_over_2pi_ghz = 20
direction = both
t_end_ns = 1.0
sample_dt_ns = 0.001
""",
    "fig7a": _FIG1_SYSTEM + """
[experiment]
name = dephasing
gamma_d_grid_ghz = 0, 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10
mode = transmission
""",
    "fig7b": _FIG1_SYSTEM + """
[experiment]
name = dephasing
gamma_d_grid_ghz = 0, 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10
mode = on_off
omega_e_over_2pi_ghz = 5
delta_omega_0_over_2pi_ghz = 10
""",
    "energy-reference": """
[experiment]
name = energy
field_v_per_cm = 5e4
volume_m3 = 2e-19, 1.5625e-23
relative_permittivity = 13
f_switch_ghz = 10
nominal_energy_j = 0.5e-15
""",
    "validate-reference": _FREQ_SYSTEM + """
[waveform]
kind = sinusoid
delta_omega_0_over_2pi_ghz = 10
omega_e_over_2pi_ghz = 5

[experiment]
name = validate
t_end_ns = 2.0
sample_dt_ns = 0.002
""",
}

FIGURE_PRESETS = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7a", "fig7b")


def preset(name: str) -> ExperimentConfig:
    try:
        text = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return parse_config(text)
