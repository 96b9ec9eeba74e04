import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdotmod import analysis as an
from qdotmod.errors import DomainError, InsufficientRange, NoCutoffInRange
from qdotmod.mbe import normalized_transmission
from qdotmod.model import SystemParams, to_angular


def pts(freqs, ratios):
    return [an.FreqResponsePoint(float(f), float(r)) for f, r in zip(freqs, ratios)]


def single_pole(f, fc, depth=10.0):
    # modulation depth rolling off as 1/f^2 in power above fc
    return 1.0 + depth / (1.0 + (np.asarray(f) / fc) ** 2)


# --- frequency response -------------------------------------------------------

def test_quasi_static_limit(fig2_params):
    ratio = an.on_off_ratio(fig2_params, 10.0, 0.05).on_off_ratio
    assert ratio == pytest.approx(an.quasi_static_ratio(fig2_params, 10.0), rel=0.01)


def test_far_above_cutoff_passes_nothing(fig2_params):
    assert an.on_off_ratio(fig2_params, 10.0, 1e4).on_off_ratio == pytest.approx(1.0, abs=0.01)


def test_periodic_window_layout(fig2_params):
    ts = an.periodic_window(fig2_params, 10.0, 5.0)
    period = 1 / 5.0
    assert len(ts.t) == 4 * 256 + 1
    assert ts.t[-1] - ts.t[0] == pytest.approx(4 * period, rel=1e-12)
    # warmup is a whole number of periods and at least 20/kappa
    k = ts.t[0] / period
    assert k == pytest.approx(round(k), abs=1e-9)
    assert ts.t[0] >= max(5 * period, 20 / fig2_params.kappa) - 1e-12


def test_frequency_response_rejects_bad_grid(fig2_params):
    for grid in ([], [5, 1], [0, 1], [1, 1]):
        with pytest.raises(ValueError):
            an.frequency_response(fig2_params, 10.0, grid)


def test_parallel_map_keeps_order():
    assert an.parallel_map(math.sqrt, [9, 4, 1, 16], jobs=2) == [3, 2, 1, 4]


def test_low_frequency_ratio_grows_with_swing(fig2_params):
    ratios = [an.on_off_ratio(fig2_params, d0, 0.5).on_off_ratio for d0 in (0.5, 2, 5, 10)]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


# --- cutoff and rolloff -------------------------------------------------------

def test_cutoff_on_synthetic_step():
    freqs = [1, 2, 5, 10, 20, 50]
    db = [81, 81, 81, 81, 10, 10]
    c = an.cutoff_frequency(pts(freqs, [10 ** (x / 10) for x in db]))
    # interpolated between 10 and 20 GHz on a log axis, 3 dB below 81 dB
    frac = 3 / 71
    assert c == pytest.approx(10 ** (1 + frac * math.log10(2)), rel=1e-12)


def test_cutoff_on_exact_grid_point():
    freqs = [1, 2, 4]
    assert an.cutoff_frequency(pts(freqs, [100.0, 100.0, 100.0 * 10 ** -0.3])) == pytest.approx(4.0, rel=1e-12)


def test_no_cutoff_in_range():
    with pytest.raises(NoCutoffInRange):
        an.cutoff_frequency(pts([1, 2, 3], [10, 9.9, 9.8]))
    with pytest.raises(NoCutoffInRange):
        an.cutoff_frequency(pts([1], [10]))


def test_cutoff_increases_with_coupling(fig2_params):
    grid = [0.05, 5, 10, 20, 30, 40, 60, 80]
    cut = [an.cutoff_frequency(an.frequency_response(fig2_params.replace(g_over_2pi=g), 5.0, grid))
           for g in (10, 30)]
    assert cut[0] < cut[1]


def test_rolloff_flat_response():
    f = np.geomspace(1, 1000, 30)
    assert an.rolloff_slope(pts(f, np.full(f.size, 3.0)), 10.0) == pytest.approx(0.0, abs=1e-9)


def test_rolloff_single_pole():
    f = np.geomspace(0.1, 1000, 60)
    slope = an.rolloff_slope(pts(f, single_pole(f, 5.0)), 5.0)
    assert slope == pytest.approx(-20, abs=1.0)


def test_rolloff_requires_a_decade():
    f = np.geomspace(1, 30, 10)
    with pytest.raises(InsufficientRange):
        an.rolloff_slope(pts(f, single_pole(f, 5.0)), 5.0)
    with pytest.raises(InsufficientRange):
        an.rolloff_slope(pts([1, 7, 60], [5, 2, 1.1]), 5.0)


# --- distortion -----------------------------------------------------------------

def test_fourier_coefficients_of_known_signal():
    fe = 3.0
    t = np.linspace(0, 4 / fe, 4 * 256 + 1)
    w = to_angular(fe)
    y = 2.0 + 1.5 * np.cos(w * t + 0.3) + 0.2 * np.cos(2 * w * t) + 0.05 * np.sin(3 * w * t)
    c = an.fourier_coefficients(t, y, fe)
    assert abs(c[1]) == pytest.approx(1.5, rel=1e-12)
    assert abs(c[2]) == pytest.approx(0.2, rel=1e-12)
    assert abs(c[3]) == pytest.approx(0.05, rel=1e-12)


def test_third_harmonic_vanishes_for_small_swing():
    p = SystemParams(20, 20, 0.1, 0.0, 1.0)
    _, h3 = an.harmonic_distortion(p, 0.1, 20.0)
    assert h3 < 1e-2


def test_second_harmonic_floor_for_raised_cosine_drive():
    # T is even in the detuning and the drive swings from 0 to d0, so the
    # leading output term is quadratic: (1 - cos)^2 gives |c2|/|c1| = 1/4
    p = SystemParams(20, 20, 0.1, 0.0, 1.0)
    h2, _ = an.harmonic_distortion(p, 0.1, 0.5)
    assert h2 == pytest.approx(0.25, rel=1e-3)


def test_harmonics_need_resolution(fig2_params):
    with pytest.raises(ValueError):
        an.harmonic_distortion(fig2_params, 1.0, 5.0, samples_per_period=128)


# --- step response ----------------------------------------------------------------

FIG6 = SystemParams(20, 5, 0.1, 0.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(
    g=st.floats(10, 40), kappa=st.floats(10, 40), d0=st.floats(1, 40),
    direction=st.sampled_from([an.ON_TO_OFF, an.OFF_TO_ON]),
)
def test_continuity_identity(g, kappa, d0, direction):
    sp = an.step_params(SystemParams(g, kappa, 0.1, 0.0, 1.0), d0, direction)
    assert sp.continuity_defect() < 1e-10 * max(1.0, abs(sp.ss_start))


@pytest.mark.parametrize("direction", [an.ON_TO_OFF, an.OFF_TO_ON])
def test_step_endpoints(direction):
    sp = an.step_params(FIG6, 20.0, direction)
    ts = an.step_response_analytic(FIG6, 20.0, direction, [0.0, 50.0])
    assert ts.output[0] == pytest.approx(FIG6.kappa * abs(sp.ss_start) ** 2, rel=1e-10)
    assert ts.output[1] == pytest.approx(FIG6.kappa * abs(sp.ss_target) ** 2, rel=1e-10)


def test_steady_values_match_moment_equations():
    for d in (0.0, 20.0):
        expected = normalized_transmission(FIG6, d) * FIG6.omega ** 2 / FIG6.kappa ** 2
        assert abs(an._ss(FIG6, to_angular(d))) ** 2 == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("direction", [an.ON_TO_OFF, an.OFF_TO_ON])
def test_step_analytic_matches_numeric(direction):
    t = np.linspace(0, 1, 1001)
    ana = an.step_response_analytic(FIG6, 20.0, direction, t)
    num = an.step_response_numeric(FIG6, 20.0, direction, t)
    assert an.normalized_rms(ana.output, num.output) < 0.05


def test_step_oscillates_near_coupling_rate():
    sp = an.step_params(FIG6, 20.0, an.ON_TO_OFF)
    assert sp.beta.real / (2 * math.pi) == pytest.approx(20, rel=0.05)
    assert sp.alpha.real == pytest.approx((FIG6.kappa + FIG6.gamma) / 2, rel=1e-12)


def test_degenerate_oscillation():
    # 4 g^2 = (kappa - gamma)^2 with no detuning
    p = SystemParams(5, 10.1, 0.1, 0.0, 1.0)
    with pytest.raises(DomainError):
        an.step_params(p, 20.0, an.ON_TO_OFF)


def test_step_direction_validated():
    with pytest.raises(ValueError):
        an.step_params(FIG6, 20.0, "sideways")


def test_normalized_rms():
    ref = np.array([0.0, 1.0, 2.0])
    assert an.normalized_rms(ref, ref + 0.1) == pytest.approx(0.05)


# --- dephasing --------------------------------------------------------------------

def test_dephasing_transmission(fig1_params):
    rows = an.dephasing_sweep(fig1_params, [0, 0.5, 1, 2, 5, 10])
    T = [r["transmission_normalized"] for r in rows]
    assert T[0] == pytest.approx(1 / 6561, rel=1e-10)
    assert all(b > a for a, b in zip(T, T[1:]))
    coherent = [r["transmission_coherent"] for r in rows]
    assert coherent[0] == pytest.approx(T[0], rel=1e-10)
    assert all(c <= i * (1 + 1e-12) for c, i in zip(coherent, T))


def test_dephasing_on_off(fig1_params):
    rows = an.dephasing_sweep(fig1_params, [0, 2, 10], mode="on_off", omega_e=5.0, delta_omega_0=10.0)
    r = [row["on_off_ratio"] for row in rows]
    assert r[0] > r[1] > r[2] > 1


def test_dephasing_argument_checks(fig1_params):
    with pytest.raises(ValueError):
        an.dephasing_sweep(fig1_params, [-1])
    with pytest.raises(ValueError):
        an.dephasing_sweep(fig1_params, [0], mode="on_off")
    with pytest.raises(ValueError):
        an.dephasing_sweep(fig1_params, [0], mode="other")


# --- energy -----------------------------------------------------------------------

def test_switching_energy_reference_volume():
    e = an.EnergyParams(5e4, 1e-6 * 1e-6 * 200e-9, 13)
    expected = 8.8541878128e-12 * 13 * (5e6) ** 2 * 2e-19 / 2
    assert an.switching_energy(e) == pytest.approx(expected, rel=1e-15)
    assert an.switching_energy(e) == pytest.approx(2.9e-16, rel=0.01)


def test_small_volume_energy():
    e = an.EnergyParams(5e4, (25e-9) ** 3, 13)
    assert an.switching_energy(e) < 1e-19
    assert an.switching_energy(e) == pytest.approx(2.2e-20, rel=0.03)


def test_power():
    assert an.power(0.5e-15, 10) == 5e-6
    e = an.EnergyParams(5e4, 2e-19, 13)
    assert an.power(e, 10) == pytest.approx(an.switching_energy(e) * 1e10, rel=1e-15)


@settings(max_examples=50)
@given(f=st.floats(1, 1e7), v=st.floats(1e-25, 1e-15), eps=st.floats(1, 20))
def test_energy_quadratic_in_field(f, v, eps):
    one = an.switching_energy(an.EnergyParams(f, v, eps))
    two = an.switching_energy(an.EnergyParams(2 * f, v, eps))
    assert two == 4 * one


def test_energy_params_validated():
    with pytest.raises(ValueError):
        an.EnergyParams(0, 1e-19, 13)
    with pytest.raises(ValueError):
        an.EnergyParams(5e4, -1, 13)
