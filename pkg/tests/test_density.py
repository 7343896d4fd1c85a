import math

import numpy as np
import pytest
from scipy.integrate import simpson

from dimple_bec import density
from dimple_bec.spectrum import DimpleSpec, SolverSettings, SpectrumError, solve_spectrum

SMALL = SolverSettings(16, 16)
GAUSS_PEAK = 1 / math.sqrt(2 * math.pi)


def gs_for(lam, z1):
    d = DimpleSpec(lam, z1)
    return density.ground_state(d, solve_spectrum(d, SMALL, levels=4))


def piecewise_simpson(gs, lo=-14.0, hi=14.0, k=4001):
    """Independent normalization check: composite Simpson on each side of the kink."""
    z1 = gs.dimple.z1
    total = 0.0
    for a, b in ((lo, z1), (z1, hi)):
        z = np.linspace(a, b, k)
        total += simpson(density.density_profile(gs, z).values, x=z)
    return total


def test_undecorated_gaussian():
    gs = gs_for(0.0, 0.0)
    z = np.round(np.arange(-6, 6.0001, 0.01), 10)
    prof = density.density_profile(gs, z)
    np.testing.assert_allclose(prof.values, GAUSS_PEAK * np.exp(-z * z / 2), rtol=1e-12)
    assert prof.values[600] == pytest.approx(0.3989423, abs=1e-7)
    assert prof.integral() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("lam,z1", [(3.6, 1.0), (3.2, 1.0), (0.7, -2.0), (-2.0, 1.0), (32.0, 0.0)])
def test_normalized(lam, z1):
    gs = gs_for(lam, z1)
    assert density.norm(gs) == pytest.approx(1.0, abs=1e-12)
    # the kink width scales like 1/lam, so sharp dimples need a finer rule
    k = 4001 if abs(lam) < 8 else 40_001
    assert piecewise_simpson(gs, k=k) == pytest.approx(1.0, abs=1e-8)


def test_continuity_at_dimple():
    gs = gs_for(3.6, 1.0)
    left = density.wavefunction(gs, np.array([np.nextafter(1.0, 0.0)]))[0]
    at = density.wavefunction(gs, np.array([1.0]))[0]
    assert left == pytest.approx(at, rel=1e-12)


@pytest.mark.parametrize("lam,z1", [(3.6, 1.0), (1.0, 0.0), (-2.0, 0.5), (8.0, -1.5)])
def test_cusp_condition(lam, z1):
    gs = gs_for(lam, z1)
    jump, psi = density.wavefunction_jump(gs)
    assert jump == pytest.approx(-lam * psi, rel=1e-6)
    # independent one-sided finite differences, second order
    h = 1e-4
    f = lambda z: density.wavefunction(gs, np.array([z]))[0]
    right = (-3 * f(z1) + 4 * f(z1 + h) - f(z1 + 2 * h)) / (2 * h)
    left = (3 * f(z1) - 4 * f(z1 - h) + f(z1 - 2 * h)) / (2 * h)
    assert right - left == pytest.approx(-lam * psi, rel=1e-5)


def test_fig5_peak():
    gs = gs_for(3.6, 1.0)
    z = np.round(np.arange(-6, 6.0001, 0.01), 10)
    prof = density.density_profile(gs, z)
    assert abs(z[np.argmax(prof.values)] - 1.0) <= 0.01
    assert prof.values.max() > GAUSS_PEAK


def test_positive_everywhere():
    for lam, z1 in [(3.6, 1.0), (-2.0, 1.0), (0.3, -4.0)]:
        z = np.linspace(-9, 9, 601)
        assert np.all(density.density_profile(gs_for(lam, z1), z).values > 0)


def test_weak_dimple_limit():
    z = np.linspace(-6, 6, 1201)
    prof = density.density_profile(gs_for(1e-4, 0.8), z)
    assert np.max(np.abs(prof.values - GAUSS_PEAK * np.exp(-z * z / 2))) < 1e-3


def test_mirror():
    z = np.linspace(-5, 5, 1001)
    a = density.density_profile(gs_for(2.5, 1.3), z).values
    b = density.density_profile(gs_for(2.5, -1.3), -z[::-1]).values[::-1]
    np.testing.assert_allclose(a, b, atol=1e-9, rtol=0)


def test_n0_scaling():
    gs = gs_for(3.6, 1.0)
    z = np.linspace(-3, 3, 61)
    base = density.density_profile(gs, z)
    scaled = density.density_profile(gs, z, n0=9000.0)
    np.testing.assert_allclose(scaled.values, 9000.0 * base.values)
    assert scaled.scaled_by_n0


def test_grid_must_increase():
    with pytest.raises(ValueError):
        density.density_profile(gs_for(1.0, 0.0), [0.0, 0.0, 1.0])


def test_rejects_wrong_ground_level():
    d = DimpleSpec(3.6, 1.0)
    spec = solve_spectrum(d, SMALL, levels=4)
    bad = type(spec)(spec.xis + np.array([1e-3, 0, 0, 0]), spec.zones, d, spec.settings)
    with pytest.raises(SpectrumError):
        density.ground_state(d, bad)
    with pytest.raises(ValueError):
        density.ground_state(DimpleSpec(1.0, 1.0), spec)
