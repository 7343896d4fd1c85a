"""Ground-state wavefunction of the decorated trap and its density profile.

The two branches decaying to the left and right are matched at the dimple:

    psi(z) = C D_xi0(z1)  D_xi0(-z),   z <= z1
    psi(z) = C D_xi0(-z1) D_xi0(z),    z >= z1

which is continuous by construction and carries the derivative jump
``-lam psi(z1)`` exactly when ``xi0`` is an eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import specfun
from .spectrum import DimpleSpec, Spectrum, SpectrumError, solve_spectrum, verify_roots


@dataclass(frozen=True)
class GroundState:
    xi0: float
    dimple: DimpleSpec
    norm_constant: float  # C in the branch formula, before the log offset below
    log_offset: float = 0.0  # psi carries exp(log_offset) to keep C O(1)

    def psi(self, z) -> np.ndarray:
        return wavefunction(self, z)


@dataclass(frozen=True)
class DensityProfile:
    grid: np.ndarray
    values: np.ndarray
    scaled_by_n0: bool = False

    def integral(self) -> float:
        """Trapezoidal integral over the grid; approximate at a cusp."""
        return float(np.trapezoid(self.values, self.grid))


def _log_branch(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign and log-magnitude of ``D_nu(z)`` on an array."""
    return specfun.log_pcf_d_grid(nu, z)


def _unnormalized(xi0: float, z1: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(sign, log|psi/C|)`` for the matched branches."""
    z = np.asarray(z, float)
    left = z <= z1
    s_a, l_a = specfun.log_pcf_d(xi0, z1)
    s_b, l_b = specfun.log_pcf_d(xi0, -z1)
    sign = np.empty(z.shape)
    logv = np.empty(z.shape)
    if left.any():
        s, lv = _log_branch(xi0, -z[left])
        sign[left] = s_a * s
        logv[left] = l_a + lv
    if (~left).any():
        s, lv = _log_branch(xi0, z[~left])
        sign[~left] = s_b * s
        logv[~left] = l_b + lv
    return sign, logv


def _support(xi0: float, z1: float, log_peak: float) -> tuple[float, float]:
    """Interval outside of which ``|psi|^2`` is below ``1e-16`` of its peak."""
    lo, hi = min(z1, 0.0) - 4.0, max(z1, 0.0) + 4.0
    while True:
        _, lv = _unnormalized(xi0, z1, np.array([lo, hi]))
        grow = 2.0 * (lv - log_peak) > math.log(1e-16)
        if not grow.any():
            return lo, hi
        if grow[0]:
            lo -= 2.0
        if grow[1]:
            hi += 2.0


def ground_state(dimple: DimpleSpec, spec: Spectrum | None = None) -> GroundState:
    """Normalized ground state for ``dimple``; ``spec`` supplies ``xi0``."""
    if spec is None:
        spec = solve_spectrum(dimple, levels=1)
    if spec.dimple.lam != dimple.lam or abs(spec.dimple.z1) != abs(dimple.z1):
        raise ValueError("spectrum belongs to a different dimple")
    xi0 = float(spec.xis[0])
    z1 = float(dimple.z1)
    if dimple.lam != 0.0:
        head = Spectrum(spec.xis[:1], spec.zones[:1], dimple, spec.settings)
        if not verify_roots(head)[0]:
            raise SpectrumError(f"ground level {xi0!r} fails the residual check")

    _, log_peak = _unnormalized(xi0, z1, np.array([z1]))
    log_peak = float(log_peak[0])
    lo, hi = _support(xi0, z1, log_peak)

    def dens(z):
        _, lv = _unnormalized(xi0, z1, np.array([z]))
        return math.exp(2.0 * (lv[0] - log_peak))

    # split exactly at the kink so each piece is smooth
    norm = 0.0
    for a, b in ((lo, z1), (z1, hi)):
        val, err = quad(dens, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)
        if err > 1e-10 * max(val, 1e-300):
            raise RuntimeError(f"normalization quadrature on [{a}, {b}] did not converge")
        norm += val
    c = 1.0 / math.sqrt(norm)
    return GroundState(xi0=xi0, dimple=dimple, norm_constant=c, log_offset=-log_peak)


def wavefunction(gs: GroundState, z) -> np.ndarray:
    z = np.asarray(z, float)
    s, lv = _unnormalized(gs.xi0, gs.dimple.z1, z)
    with np.errstate(under="ignore"):
        return gs.norm_constant * s * np.exp(lv + gs.log_offset)


def _log_derivative(nu: float, z: float) -> float:
    """``D_nu'(z) / D_nu(z) = z/2 - D_{nu+1}(z) / D_nu(z)``, formed in logs."""
    s0, l0 = specfun.log_pcf_d(nu, z)
    s1, l1 = specfun.log_pcf_d(nu + 1.0, z)
    return 0.5 * z - s0 * s1 * math.exp(l1 - l0)


def wavefunction_jump(gs: GroundState) -> tuple[float, float]:
    """``(psi'(z1+) - psi'(z1-), psi(z1))`` from the analytic branch derivatives."""
    xi0, z1 = gs.xi0, gs.dimple.z1
    psi1 = float(wavefunction(gs, np.array([z1]))[0])
    # psi'(z1+)/psi = D'(z1)/D(z1); psi'(z1-)/psi = -D'(-z1)/D(-z1)
    ratio = _log_derivative(xi0, z1) + _log_derivative(xi0, -z1)
    return ratio * psi1, psi1


def density_profile(gs: GroundState, grid, n0: float | None = None) -> DensityProfile:
    """``|psi|^2`` on ``grid``; multiplied by ``n0`` when given."""
    grid = np.asarray(grid, float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be one-dimensional and strictly increasing")
    psi = wavefunction(gs, grid)
    vals = psi * psi
    if n0 is not None:
        vals = vals * n0
    return DensityProfile(grid, vals, n0 is not None)


def norm(gs: GroundState) -> float:
    """``int |psi|^2 dz`` by adaptive quadrature split at the dimple."""
    z1 = gs.dimple.z1
    peak = float(wavefunction(gs, np.array([z1]))[0]) ** 2
    lo, hi = _support(gs.xi0, z1, 0.5 * math.log(peak) - gs.log_offset
                      - math.log(gs.norm_constant))

    def dens(z):
        return float(wavefunction(gs, np.array([z]))[0]) ** 2

    return sum(quad(dens, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
               for a, b in ((lo, z1), (z1, hi)))
