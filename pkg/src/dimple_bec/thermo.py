"""Finite-N ideal Bose gas on a discrete single-particle spectrum.

Internally everything is measured in units of ``hbar omega``: reduced
energies ``e_i = xi_i + 1/2``, reduced temperature ``tau = k_B T / hbar omega``.
Levels beyond the supplied spectrum are the bare oscillator ladder and are
summed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectrum import DimpleSpec, Spectrum, TrapConfig, solve_spectrum

_TERM_CUTOFF = 1e-15
_MAX_BISECT = 400


class ThermoError(ValueError):
    pass


@dataclass(frozen=True)
class ThermoPoint:
    """One state point; ``mu`` and ``temperature`` in SI, ``tau``/``mu_reduced`` in hbar*omega."""

    temperature: float
    beta: float
    mu: float
    n0: float
    fraction: float
    tau: float
    mu_reduced: float
    gap: float  # beta * (eps_0 - mu), kept separately to avoid cancellation
    occupation_total: float


@dataclass(frozen=True)
class CriticalPoint:
    t_c: float
    t_c0: float
    tau_c: float
    tau_c0: float

    @property
    def ratio(self) -> float:
        return self.t_c / self.t_c0


def energies(spec: Spectrum, trap: TrapConfig) -> np.ndarray:
    """Single-particle energies ``(xi + 1/2) hbar omega`` in joules."""
    if spec.level_count == 0:
        raise ValueError("empty spectrum")
    return (np.asarray(spec.xis) + 0.5) * trap.quantum


def _ladder_tail(x_start: float, step: float) -> float:
    """``sum_{n>=0} 1/(exp(x_start + n*step) - 1)`` via the geometric series in n."""
    total = 0.0
    j = 1
    while True:
        term = math.exp(-j * x_start) / -math.expm1(-j * step)
        total += term
        if term <= _TERM_CUTOFF * total or j > 100_000:
            return total
        j += 1


def _occupations(x: np.ndarray) -> float:
    """Sum of ``1/expm1(x)`` over increasing ``x`` with the relative early stop."""
    with np.errstate(over="ignore"):
        terms = 1.0 / np.expm1(x)
    run = np.cumsum(terms)
    stop = np.flatnonzero(terms < _TERM_CUTOFF * run)
    if stop.size:
        return float(run[stop[0]])
    return float(run[-1])


def occupation_sum(levels, mu: float, beta: float, spacing: float | None = None) -> float:
    """``sum_i 1/(exp(beta (eps_i - mu)) - 1)``.

    ``levels`` must be ascending. If ``spacing`` is given, the levels are taken
    to continue beyond the list as the bare ladder ``(n + 1/2) spacing`` and
    that tail is added analytically.
    """
    eps = np.asarray(levels, float)
    if not beta > 0:
        raise ThermoError("beta must be positive")
    if mu >= eps[0]:
        raise ThermoError(f"mu={mu!r} must lie below the lowest level {eps[0]!r}")
    x = beta * (eps - mu)
    total = _occupations(x)
    if spacing is not None:
        start = beta * ((len(eps) + 0.5) * spacing - mu)
        total += _ladder_tail(start, beta * spacing)
    return total


def _reduced_levels(spec: Spectrum) -> np.ndarray:
    return np.asarray(spec.xis, float) + 0.5


def _count(gap: float, excit: np.ndarray, tail_start: float, inv_tau: float) -> tuple[float, float]:
    """Ground occupation and total at ``gap = (e_0 - mu)/tau``."""
    n0 = 1.0 / math.expm1(gap)
    x = gap + excit * inv_tau
    rest = _occupations(x)
    rest += _ladder_tail(gap + tail_start * inv_tau, inv_tau)
    return n0, n0 + rest


def solve_mu_reduced(spec: Spectrum, n_particles: int, tau: float) -> tuple[float, float, float]:
    """``(gap, n0, total)`` with ``gap = (e_0 - mu)/tau`` solving N(mu) = N by bisection."""
    if not tau > 0:
        raise ThermoError("temperature must be positive")
    e = _reduced_levels(spec)
    excit = e[1:] - e[0]
    tail_start = (len(e) + 0.5) - e[0]
    inv_tau = 1.0 / tau
    n = float(n_particles)

    lo = math.log1p(1.0 / n)  # ground state alone already holds N here
    hi = max(2.0 * lo, 1.0)
    for _ in range(2000):
        if _count(hi, excit, tail_start, inv_tau)[1] < n:
            break
        hi *= 2.0
    else:
        raise AssertionError("no upper bracket for the chemical potential")
    # bisection in log(gap); the map gap -> N is strictly decreasing
    n0 = total = math.nan
    for _ in range(_MAX_BISECT):
        mid = math.sqrt(lo * hi)
        n0, total = _count(mid, excit, tail_start, inv_tau)
        if abs(total - n) <= 1e-10 * n:
            return mid, n0, total
        if total > n:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    n0, total = _count(mid, excit, tail_start, inv_tau)
    if abs(total - n) > 1e-9 * n:
        raise AssertionError(f"chemical potential did not converge: N={total!r}")
    return mid, n0, total


def solve_mu(spec: Spectrum, trap: TrapConfig, temperature: float) -> ThermoPoint:
    """Chemical potential and ground occupation at fixed ``N`` and ``T``."""
    if not temperature > 0:
        raise ThermoError("temperature must be positive")
    tau = trap.k_b * temperature / trap.quantum
    gap, n0, total = solve_mu_reduced(spec, trap.n_particles, tau)
    e0 = float(spec.xis[0]) + 0.5
    mu_red = e0 - gap * tau
    return ThermoPoint(
        temperature=temperature,
        beta=1.0 / (trap.k_b * temperature),
        mu=mu_red * trap.quantum,
        n0=n0,
        fraction=n0 / trap.n_particles,
        tau=tau,
        mu_reduced=mu_red,
        gap=gap,
        occupation_total=total,
    )


def critical_tau(spec: Spectrum, n_particles: int) -> float:
    """Reduced ``tau_c`` solving ``N = sum_{i>=1} 1/(exp((e_i - e_0)/tau_c) - 1)``."""
    if n_particles < 2:
        raise ThermoError("critical temperature needs n_particles >= 2")
    e = _reduced_levels(spec)
    excit = e[1:] - e[0]
    tail_start = (len(e) + 0.5) - e[0]
    n = float(n_particles)

    def excited(b: float) -> float:
        return _occupations(b * excit) + _ladder_tail(b * tail_start, b)

    # beta in units of 1/(hbar omega); excited(b) decreases with b
    lo, hi = 1e-12, 1.0
    while excited(hi) > n:
        lo, hi = hi, hi * 2.0
    while excited(lo) < n:
        lo *= 0.5
    for _ in range(_MAX_BISECT):
        mid = math.sqrt(lo * hi)
        if excited(mid) > n:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 2.0 / (lo + hi)


def solve_tc(spec: Spectrum, trap: TrapConfig, reference: Spectrum | None = None) -> CriticalPoint:
    """Critical temperature with ``mu`` pinned to the ground level, and the bare-trap ``T_c^0``.

    ``reference`` defaults to the undecorated spectrum with the same level count.
    """
    if reference is None:
        reference = solve_spectrum(DimpleSpec(0.0, 0.0), spec.settings, spec.level_count)
    tau_c = critical_tau(spec, trap.n_particles)
    tau_c0 = critical_tau(reference, trap.n_particles)
    unit = trap.quantum / trap.k_b
    return CriticalPoint(t_c=tau_c * unit, t_c0=tau_c0 * unit, tau_c=tau_c, tau_c0=tau_c0)


def tc0_estimate(trap: TrapConfig) -> float:
    """Leading finite-N 1D estimate ``N hbar omega / (k_B ln 2N)``."""
    n = trap.n_particles
    return n * trap.quantum / (trap.k_b * math.log(2.0 * n))
