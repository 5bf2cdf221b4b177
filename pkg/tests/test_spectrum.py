import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darkthermo import spectrum as sp
from darkthermo.errors import DegenerateSteadyStateError, InvalidParameterError
from darkthermo.levels import DriveConfig, ZeemanField, build_ca40_system
from darkthermo.spectrum import (BeamGeometry, Spectrum, doppler_width, local_minima,
                                 locate_dark_resonances, resonance_contrast, resonance_grid,
                                 spectrum_cold, spectrum_thermal_effective,
                                 spectrum_thermal_quadrature, velocity_nodes)
from darkthermo.steadystate import assemble_liouvillian, fluorescence_rate, steady_state
from darkthermo.levels import collapse_operators, hamiltonian
from oracles import doppler_width_direct, thermal_average_dense

finite = dict(allow_nan=False, allow_infinity=False)
FIELD = ZeemanField(4.7e-4)


def _drives(lw=(0.45, 0.49), ra=12.0, rb=8.0, da=-14.0):
    return DriveConfig(da, ra, 397.0, lw[0]), DriveConfig(0.0, rb, 866.0, lw[1])


def test_cold_four_minima(ca40):
    a, b = _drives()
    grid = np.arange(-25.0, 25.0001, 0.05) + a.detuning_mhz
    s = spectrum_cold(ca40, a, b, FIELD, grid)
    assert local_minima(s.fluorescence).size == 4
    assert s.method == "cold" and np.all(s.fluorescence >= 0)


def test_lambda_dark_point(lam3):
    a, b = DriveConfig(-3.0, 5.0), DriveConfig(0.0, 4.0, 866.0)
    grid = np.linspace(-10.0, 4.0, 141)
    s = spectrum_cold(lam3, a, b, None, grid)
    k = int(np.argmin(s.fluorescence))
    assert grid[k] == pytest.approx(-3.0, abs=1e-12)
    assert s.fluorescence[k] <= 1e-9


def test_pointwise_independence(ca40):
    a, b = _drives()
    coarse = np.linspace(-30.0, 2.0, 33)
    fine = np.linspace(-30.0, 2.0, 65)
    f1 = spectrum_cold(ca40, a, b, FIELD, coarse).fluorescence
    f2 = spectrum_cold(ca40, a, b, FIELD, fine).fluorescence
    assert np.array_equal(f1, f2[::2])


def test_threads_do_not_change_results(ca40):
    a, b = _drives()
    grid = np.linspace(-30.0, 2.0, 97)
    f1 = spectrum_cold(ca40, a, b, FIELD, grid, threads=1).fluorescence
    f2 = spectrum_cold(ca40, a, b, FIELD, grid, threads=3).fluorescence
    assert np.array_equal(f1, f2)


def test_doppler_width_zero():
    assert doppler_width(0.0) == 0.0


@pytest.mark.parametrize("angle, expected, tol", [(0.0, 0.44, 0.01), (math.pi, 1.18, 0.02)])
def test_doppler_width_spot_values(angle, expected, tol):
    got = doppler_width(1.0, BeamGeometry(angle))
    assert got == pytest.approx(expected, abs=tol)
    assert got == pytest.approx(doppler_width_direct(1.0, angle), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 1e3, **finite), st.floats(0, math.pi, **finite))
def test_doppler_width_sqrt_scaling(T, angle):
    g = BeamGeometry(angle)
    if doppler_width(T, g) > 0:
        assert doppler_width(4 * T, g) / doppler_width(T, g) == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 1e3, **finite), st.floats(1e-3, 1e3, **finite),
       st.floats(0, math.pi, **finite), st.floats(0, math.pi, **finite))
def test_doppler_width_monotone(T1, T2, a1, a2):
    lo_T, hi_T = sorted((T1, T2))
    lo_a, hi_a = sorted((a1, a2))
    assert doppler_width(lo_T, BeamGeometry(lo_a)) <= doppler_width(hi_T, BeamGeometry(lo_a))
    assert doppler_width(lo_T, BeamGeometry(lo_a)) <= doppler_width(lo_T, BeamGeometry(hi_a))


def test_effective_zero_temperature_is_cold(ca40):
    a, b = _drives()
    grid = np.linspace(-30.0, 2.0, 41)
    cold = spectrum_cold(ca40, a, b, FIELD, grid).fluorescence
    eff = spectrum_thermal_effective(ca40, a, b, FIELD, grid, 0.0).fluorescence
    assert np.array_equal(cold, eff)


@pytest.mark.parametrize("k", range(4))
def test_contrast_decreases_with_temperature(ca40, k):
    a, b = _drives()
    grid = resonance_grid(a, b, FIELD)
    pos = a.detuning_mhz + locate_dark_resonances(ca40, field_=FIELD)[k]
    c = [resonance_contrast(spectrum_thermal_effective(ca40, a, b, FIELD, grid, T), pos)
         for T in (0.1, 1.0, 10.0, 100.0)]
    assert all(x > y for x, y in zip(c, c[1:]))


def test_smeared_but_fittable_at_46mk(ca40):
    a, b = _drives()
    grid = resonance_grid(a, b, FIELD)
    s = spectrum_thermal_effective(ca40, a, b, FIELD, grid, 46.0)
    offsets = locate_dark_resonances(ca40, field_=FIELD)
    assert all(resonance_contrast(s, a.detuning_mhz + o) > 0 for o in offsets)


def test_quadrature_cold_limit(ca40):
    a, b = _drives()
    grid = np.linspace(-30.0, 2.0, 65)
    cold = spectrum_cold(ca40, a, b, FIELD, grid).fluorescence
    q = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, 1e-6).fluorescence
    assert np.max(np.abs(q - cold)) <= 1e-6
    q0 = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, 0.0).fluorescence
    assert np.array_equal(q0, cold)


# Gauss-Hermite with 32 nodes resolves the velocity average only while the
# two-photon Doppler width stays comparable to the resonance widths.
_UNDER_RESOLVED = pytest.mark.xfail(
    strict=True, reason="32 Gauss-Hermite nodes under-resolve the dark resonances at this width")


@pytest.mark.parametrize("angle, T", [
    (0.0, 1.0), (0.0, 3.0), (0.0, 10.0), (math.pi, 1.0), (math.pi, 3.0),
    pytest.param(0.0, 100.0, marks=_UNDER_RESOLVED),
    pytest.param(math.pi, 10.0, marks=_UNDER_RESOLVED),
    pytest.param(math.pi, 100.0, marks=_UNDER_RESOLVED),
])
def test_quadrature_node_doubling(ca40, angle, T):
    a, b = _drives()
    grid = np.linspace(-40.0, 12.0, 105)
    g = BeamGeometry(angle)
    f32 = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, T, g, 32).fluorescence
    f64 = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, T, g, 64).fluorescence
    assert np.max(np.abs(f32 - f64)) <= 1e-4


@pytest.mark.parametrize("angle", [0.0, math.pi])
def test_quadrature_against_dense_velocity_average(ca40, angle):
    a, b = _drives()
    T = 1.0
    ops = collapse_operators(ca40, a.linewidth_mhz, b.linewidth_mhz)
    for det_b in (-17.9, -12.0, 0.5):
        bb = DriveConfig(det_b, b.rabi_mhz, 866.0, b.linewidth_mhz)

        def F(da, db):
            H = hamiltonian(ca40, a, bb, FIELD, doppler=(da, db))
            return fluorescence_rate(steady_state(assemble_liouvillian(H, ops)), ca40)

        ref = thermal_average_dense(F, T, counter=angle > 0, points=801)
        got = spectrum_thermal_quadrature(ca40, a, b, FIELD, np.array([det_b]), T,
                                          BeamGeometry(angle)).fluorescence[0]
        assert got == pytest.approx(ref, abs=1e-6)


def test_quadrature_oblique_angle_converges(ca40):
    a, b = _drives()
    grid = np.linspace(-30.0, 2.0, 17)
    g = BeamGeometry(math.pi / 3)
    f12 = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, 1.0, g, 12).fluorescence
    f24 = spectrum_thermal_quadrature(ca40, a, b, FIELD, grid, 1.0, g, 24).fluorescence
    assert np.max(np.abs(f12 - f24)) <= 1e-4
    shifts, w = velocity_nodes(1.0, g, 12)
    assert shifts.shape == (144, 2) and w.sum() == pytest.approx(1.0, abs=1e-13)


def test_too_few_nodes(ca40):
    a, b = _drives()
    with pytest.raises(InvalidParameterError):
        spectrum_thermal_quadrature(ca40, a, b, FIELD, np.array([0.0, 1.0]), 1.0, nodes=2)


@pytest.mark.parametrize("angle", [0.0, math.pi])
def test_velocity_axis_flip_invariance(ca40, angle):
    a, b = _drives()
    grid = np.linspace(-30.0, 2.0, 33)
    shifts, w = velocity_nodes(3.0, BeamGeometry(angle), 32)
    f = sp._sweep(ca40, a, b, FIELD, grid, doppler=shifts)
    g = sp._sweep(ca40, a, b, FIELD, grid, doppler=-shifts[::-1])
    avg_f = sum(w[k] * f[k] for k in range(w.size))
    avg_g = sum(w[::-1][k] * g[k] for k in range(w.size))
    assert np.max(np.abs(avg_f - avg_g)) <= 1e-14


def test_resonance_positions(ca40):
    assert locate_dark_resonances(ca40, field_=ZeemanField(0.0)) == [0.0] * 4
    got = locate_dark_resonances(ca40, field_=FIELD)
    b = 13996.245 * 4.7e-4
    assert got == pytest.approx([-2.2 * b, -0.6 * b, 0.6 * b, 2.2 * b], abs=1e-12)
    assert got == pytest.approx([-14.47, -3.95, 3.95, 14.47], abs=0.005)


def test_resonances_need_calcium(lam3):
    with pytest.raises(InvalidParameterError):
        locate_dark_resonances(lam3)


@pytest.mark.parametrize("ra, rb, lw", [(12.0, 8.0, 0.0), (6.0, 8.0, 0.0), (20.0, 4.0, 0.0),
                                        (12.0, 8.0, 0.05), (6.0, 3.0, 0.1)])
def test_minima_match_prediction(ca40, ra, rb, lw):
    a, b = _drives((lw, lw), ra, rb)
    grid = resonance_grid(a, b, FIELD)
    s = spectrum_cold(ca40, a, b, FIELD, grid)
    found = grid[local_minima(s.fluorescence)] - a.detuning_mhz
    pred = np.array(locate_dark_resonances(ca40, field_=FIELD))
    assert found.size == 4
    assert np.max(np.abs(found - pred)) <= sp.RESONANCE_GRID_STEP_MHZ + 1e-9


def test_degenerate_error_names_grid_point(ca40):
    a, _ = _drives(lw=(0.0, 0.0))
    b = DriveConfig(0.0, 0.0, 866.0)
    with pytest.raises(DegenerateSteadyStateError, match="-20"):
        spectrum_cold(ca40, a, b, FIELD, np.array([-20.0, -10.0]))


def test_spectrum_validation():
    with pytest.raises(InvalidParameterError):
        Spectrum(np.array([0.0, 0.0]), np.array([0.1, 0.2]), "cold")
    with pytest.raises(InvalidParameterError):
        Spectrum(np.array([0.0, 1.0]), np.array([0.1, np.nan]), "cold")


def test_geometry_validation():
    with pytest.raises(InvalidParameterError):
        BeamGeometry(4.0)
    with pytest.raises(InvalidParameterError):
        BeamGeometry(0.0, mass_amu=0.0)
    g = BeamGeometry.from_drives(DriveConfig(direction=(1.0, 0, 0)),
                                 DriveConfig(wavelength_nm=866.0, direction=(-1.0, 0, 0)))
    assert g.angle_rad == pytest.approx(math.pi)
