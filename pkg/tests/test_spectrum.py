import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimple_bec import specfun, spectrum
from dimple_bec.spectrum import (DimpleSpec, SolverSettings, SpectrumCache, SpectrumError,
                                 TrapConfig, sigma_to_lambda, solve_spectrum, spectrum_oracle)

SMALL = SolverSettings(exact_levels=48, perturbative_levels=96)


def test_undecorated_levels():
    s = solve_spectrum(DimpleSpec(0.0, 0.3), levels=5)
    np.testing.assert_array_equal(s.xis, [0, 1, 2, 3, 4])
    assert s.root_solves == 0


def test_frozen_roots(oracles):
    for lam, z1, n, ref in oracles["roots"]:
        s = solve_spectrum(DimpleSpec(lam, z1), SMALL, levels=12)
        assert s.xis[n] == pytest.approx(ref, abs=2e-10), (lam, z1, n)


def test_centered_closed_form_levels(oracles):
    ref = np.array(oracles["thermo"]["centered32_xi"])
    s = solve_spectrum(DimpleSpec(32.0, 0.0), SMALL, levels=len(ref))
    np.testing.assert_allclose(s.xis, ref, atol=2e-10, rtol=0)


def test_odd_levels_untouched_at_center():
    s = solve_spectrum(DimpleSpec(32.0, 0.0), SMALL, levels=40)
    assert np.all(s.xis[1::2] == np.arange(1, 40, 2))


def test_node_persistence_off_center():
    # H_2(u) = 4u^2 - 2 vanishes at u = 1/sqrt(2), i.e. z1 = 1
    for lam in (0.5, 3.2, -7.0):
        s = solve_spectrum(DimpleSpec(lam, 1.0), SMALL, levels=4)
        assert s.xis[2] == 2.0


def test_deep_well_asymptote():
    s = solve_spectrum(DimpleSpec(32.0, 0.0), SMALL, levels=3)
    assert s.xis[0] == pytest.approx(-256.5, abs=1.0)


def test_weak_dimple_second_order():
    lam = 0.01
    s = solve_spectrum(DimpleSpec(lam, 0.0), SMALL, levels=2)
    phi = specfun.oscillator_functions(200_000, 0.0)
    first = -lam * phi[0] ** 2
    second = -lam**2 * phi[0] ** 2 * np.sum(phi[2::2] ** 2 / np.arange(2, len(phi), 2))
    assert abs(s.xis[0] - first) < 2e-5
    assert s.xis[0] == pytest.approx(first + second, abs=2e-7)


def test_oracle_examples():
    np.testing.assert_allclose(spectrum_oracle(DimpleSpec(0.0, 1.3), 50, 3), [0, 1, 2], atol=1e-12)
    d = DimpleSpec(0.01, 0.0)
    ev = spectrum_oracle(d, 400, 1)
    assert ev[0] == pytest.approx(solve_spectrum(d, SMALL, levels=1).xis[0], abs=1e-5)


def test_oracle_converges_toward_roots():
    d = DimpleSpec(1.0, 1.0)
    exact = solve_spectrum(d, SMALL, levels=6).xis
    errs = [np.max(np.abs(spectrum_oracle(d, b, 6) - exact)) for b in (250, 500, 1000)]
    assert errs[0] > errs[1] > errs[2]


def test_sigma_to_lambda_reference_range():
    trap = TrapConfig.sodium()
    assert sigma_to_lambda(0.0, trap) == 0.0
    assert sigma_to_lambda(1e8, trap) == pytest.approx(320, rel=0.02)
    assert sigma_to_lambda(1e10, trap) == pytest.approx(32000, rel=0.02)


def test_trap_validation():
    with pytest.raises(ValueError):
        TrapConfig(mass=-1.0, omega=1.0, n_particles=10)
    with pytest.raises(ValueError):
        SolverSettings(exact_levels=10, perturbative_levels=5)


def test_zones_layout():
    s = solve_spectrum(DimpleSpec(3.2, 1.0), SolverSettings(8, 20), levels=30)
    assert s.zone_names[7] == "exact-root"
    assert s.zone_names[8] == "perturbative"
    assert s.zone_names[20] == "unperturbed"
    assert s.xis[25] == 25.0
    assert s.root_solves == 8


def test_perturbative_zone_close_to_exact():
    d = DimpleSpec(3.2, 1.0)
    exact = solve_spectrum(d, SolverSettings(700, 700), levels=700)
    pert = solve_spectrum(d, SolverSettings(600, 700), levels=700)
    assert np.max(np.abs(exact.xis[600:] - pert.xis[600:])) < 2e-3


def test_residuals_pass():
    for d in (DimpleSpec(3.2, 1.0), DimpleSpec(-3.0, 1.5), DimpleSpec(32.0, 7.3)):
        s = solve_spectrum(d, SolverSettings(256, 256), levels=256)
        assert spectrum.verify_roots(s).all()
        # literal check |g| <= 1e-8 (1 + |W|) holds for the low levels outright
        assert np.all(spectrum.residuals(s)[:50] <= 1e-8)


def test_literal_char_fn_small_levels():
    d = DimpleSpec(3.2, 1.0)
    s = solve_spectrum(d, SMALL, levels=6)
    for xi in s.xis:
        assert abs(spectrum.char_fn(float(xi), d)) <= 1e-8 * (1 + abs(spectrum.wronskian(float(xi))))


def test_bracket_failure_reports_interval(monkeypatch):
    monkeypatch.setattr(spectrum, "scaled_char_fn", lambda xi, d: np.ones_like(np.atleast_1d(xi)))
    with pytest.raises(SpectrumError, match=r"no sign change on \["):
        solve_spectrum(DimpleSpec(-1.0, 0.5), SMALL, levels=4)


LAMS = st.one_of(st.floats(0.01, 100.0), st.floats(-100.0, -0.01))


@settings(max_examples=25, deadline=None)
@given(LAMS, st.floats(-5, 5))
def test_interlacing_and_mirror(lam, z1):
    s = solve_spectrum(DimpleSpec(lam, z1), SolverSettings(40, 40), levels=40)
    m = solve_spectrum(DimpleSpec(lam, -z1), SolverSettings(40, 40), levels=40)
    n = np.arange(40)
    if lam > 0:
        assert s.xis[0] < 0
        assert np.all((s.xis[1:] > n[1:] - 1) & (s.xis[1:] <= n[1:]))
    else:
        assert np.all((s.xis >= n) & (s.xis < n + 1))
    np.testing.assert_allclose(s.xis, m.xis, atol=1e-9, rtol=0)


@pytest.mark.parametrize("z1", [0.0, 0.7, 2.5])
def test_monotone_in_lambda(z1):
    levels = [solve_spectrum(DimpleSpec(lam, z1), SMALL, levels=20).xis
              for lam in (0, 1, 2, 4, 8)]
    assert np.all(np.diff(np.array(levels), axis=0) <= 1e-12)


def test_cache_roundtrip(tmp_path):
    d = DimpleSpec(3.2, 1.0)
    c1 = SpectrumCache(tmp_path)
    a = c1.get(d, SMALL, 64)
    assert c1.misses == 1
    c2 = SpectrumCache(tmp_path)
    before = spectrum.solve_count()
    b = c2.get(DimpleSpec(3.2, -1.0), SMALL, 64)  # mirror image shares the record
    assert spectrum.solve_count() == before
    assert c2.hits == 1 and b.root_solves == 0
    assert a.xis.tobytes() == b.xis.tobytes()
    assert a.zones.tobytes() == b.zones.tobytes()
    assert SpectrumCache.key(d, SMALL, 64) != SpectrumCache.key(d, SMALL.doubled(), 64)


def test_cache_concurrent_readers(tmp_path):
    cache = SpectrumCache(tmp_path)
    out = []

    def work():
        out.append(cache.get(DimpleSpec(1.0, 0.5), SMALL, 32).xis.copy())

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(out) == 4
    assert all(np.array_equal(o, out[0]) for o in out)
    assert len(list(tmp_path.glob("*.npz"))) == 1
    assert not list(tmp_path.glob("*.tmp"))


def test_settings_digest_stable():
    assert SolverSettings().digest() == SolverSettings().digest()
    assert SolverSettings().digest() != SolverSettings(root_tol=1e-9).digest()
    assert math.isclose(TrapConfig.sodium().omega, 2 * math.pi * 21.0)
