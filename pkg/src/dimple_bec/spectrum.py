"""Eigenvalues of a harmonic trap decorated with one Dirac-delta dimple.

In oscillator units (``z = x/x0``, ``x0 = sqrt(hbar / 2 m omega)``,
``E = (xi + 1/2) hbar omega``) the bound states solve

    psi'' + [xi + 1/2 - z^2/4 + lam * delta(z - z1)] psi = 0

and the allowed ``xi`` are the zeros of

    g(xi) = W(xi) - lam * D_xi(z1) * D_xi(-z1),   W(xi) = sqrt(2 pi) / Gamma(-xi).

For ``xi > -1`` the solver works with ``g / Gamma(xi + 1)``, which stays O(1)
up to very high levels; the deep ground state (``xi <= -1``) is located with
``g / (D_xi(z1) D_xi(-z1))`` instead, both factors being positive there.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import constants
from scipy.optimize import brentq
from scipy.optimize.elementwise import find_root

from . import specfun

log = logging.getLogger(__name__)

AMU = constants.physical_constants["atomic mass constant"][0]
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_NUDGE = 1e-9
EPS = np.finfo(float).eps

EXACT, PERTURBATIVE, UNPERTURBED = 0, 1, 2
ZONE_NAMES = {EXACT: "exact-root", PERTURBATIVE: "perturbative", UNPERTURBED: "unperturbed"}


class SpectrumError(RuntimeError):
    """Root bracketing or convergence failure in the eigenvalue solver."""


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap and gas parameters (SI units)."""

    mass: float
    omega: float
    n_particles: int
    hbar: float = constants.hbar
    k_b: float = constants.k

    def __post_init__(self):
        if not (self.mass > 0 and self.omega > 0):
            raise ValueError("mass and omega must be positive")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError("n_particles must be a positive integer")

    @classmethod
    def sodium(cls, n_particles: int = 10_000, freq_hz: float = 21.0) -> "TrapConfig":
        """23Na in a ``2 pi x 21 Hz`` trap."""
        return cls(mass=23.0 * AMU, omega=2.0 * math.pi * freq_hz, n_particles=n_particles)

    @property
    def x0(self) -> float:
        """Length unit ``sqrt(hbar / 2 m omega)``."""
        return math.sqrt(self.hbar / (2.0 * self.mass * self.omega))

    @property
    def quantum(self) -> float:
        """``hbar * omega`` in joules."""
        return self.hbar * self.omega


@dataclass(frozen=True)
class DimpleSpec:
    """Dimensionless delta strength ``lam`` (positive = attractive) and position ``z1``."""

    lam: float
    z1: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.z1)):
            raise ValueError("lam and z1 must be finite")

    @classmethod
    def from_physical(cls, sigma: float, x1: float, trap: TrapConfig) -> "DimpleSpec":
        return cls(lam=sigma_to_lambda(sigma, trap), z1=x1 / trap.x0)


@dataclass(frozen=True)
class SolverSettings:
    exact_levels: int = 512
    perturbative_levels: int = 8192
    root_tol: float = 1e-10
    bracket_refinement: str = "chandrupatla"

    def __post_init__(self):
        if self.exact_levels < 1:
            raise ValueError("exact_levels must be >= 1")
        if self.perturbative_levels < self.exact_levels:
            raise ValueError("perturbative_levels must be >= exact_levels")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")

    def doubled(self) -> "SolverSettings":
        return SolverSettings(2 * self.exact_levels, 2 * self.perturbative_levels,
                              self.root_tol, self.bracket_refinement)

    def digest(self) -> str:
        blob = json.dumps([self.exact_levels, self.perturbative_levels,
                           repr(self.root_tol), self.bracket_refinement])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Lowest ``level_count`` eigenvalues ``xi`` (ascending) with zone tags."""

    xis: np.ndarray
    zones: np.ndarray
    dimple: DimpleSpec
    settings: SolverSettings = field(default_factory=SolverSettings)
    root_solves: int = 0

    @property
    def level_count(self) -> int:
        return len(self.xis)

    @property
    def zone_names(self) -> list[str]:
        return [ZONE_NAMES[int(z)] for z in self.zones]


def sigma_to_lambda(sigma: float, trap: TrapConfig) -> float:
    """Dimensionless strength ``sigma * sqrt(hbar / 2 m omega)``."""
    return sigma * trap.x0


def wronskian(xi: float) -> float:
    return specfun.wronskian(xi)


def char_fn(xi: float, dimple: DimpleSpec) -> float:
    """``W(xi) - lam D_xi(z1) D_xi(-z1)``; zeros are the decorated eigenvalues.

    Unscaled, so it overflows for large ``xi``; the solver uses
    :func:`scaled_char_fn` and :func:`ground_char_fn` instead.
    """
    w = specfun.wronskian(xi)
    if dimple.lam == 0.0:
        return w
    dp = specfun.pcf_d(xi, dimple.z1).value
    dm = specfun.pcf_d(xi, -dimple.z1).value
    return w - dimple.lam * dp * dm


def _pi_trig(xi):
    r = np.round(xi)
    f = xi - r
    sgn = np.where(r % 2, -1.0, 1.0)
    return sgn * np.sin(np.pi * f), sgn * np.cos(np.pi * f)


def scaled_char_fn(xi, dimple: DimpleSpec):
    """``char_fn(xi) / Gamma(xi + 1)`` for ``xi > -1`` (vectorized).

    Equal to ``-sin(pi xi) (sqrt(2/pi) - lam Q) - lam cos(pi xi) P`` with
    ``P = D_xi(z1)^2 / Gamma(xi+1)`` and ``Q = D_xi(z1) V(-xi-1/2, z1)``.
    """
    xi = np.atleast_1d(np.asarray(xi, float))
    p, q = specfun.scaled_products(xi, abs(dimple.z1))
    sn, cs = _pi_trig(xi)
    return -sn * (SQRT_2_OVER_PI - dimple.lam * q) - dimple.lam * cs * p


def ground_char_fn(xi: float, dimple: DimpleSpec) -> float:
    """``char_fn(xi) / (D_xi(z1) D_xi(-z1))`` for ``xi < 0``; same sign as ``char_fn``."""
    if xi == 0.0:
        return -dimple.lam  # W(0) = 0
    z = abs(dimple.z1)
    s1, l1 = specfun.log_pcf_d(xi, z)
    s2, l2 = specfun.log_pcf_d(xi, -z)
    lw = 0.5 * math.log(2.0 * math.pi) - math.lgamma(-xi)
    return math.exp(lw - l1 - l2) - dimple.lam


def _ground_state(dimple: DimpleSpec, tol: float) -> float:
    lam = dimple.lam
    hi = 0.0
    lo = min(-1.0, -0.25 * lam * lam - 1.0)
    f_lo = ground_char_fn(lo, dimple)
    expansions = 0
    while f_lo <= 0.0:
        expansions += 1
        if expansions > 60:
            raise SpectrumError(
                f"ground-state bracket failed for {dimple}: g({lo:.6g})={f_lo:.3g} still <= 0")
        lo = 2.0 * lo
        f_lo = ground_char_fn(lo, dimple)
    f_hi = ground_char_fn(hi, dimple)
    if f_hi >= 0.0:
        raise SpectrumError(
            f"ground-state bracket failed for {dimple}: g({lo:.6g})={f_lo:.3g}, g({hi})={f_hi:.3g}")
    # far-off-centre dimples shift the ground level by ~exp(-z1^2/2), so the
    # tolerance is relative as well as absolute
    return brentq(ground_char_fn, lo, hi, args=(dimple,), xtol=1e-300, rtol=4 * specfun.EPS,
                  maxiter=1000)


def _bracket_roots(dimple: DimpleSpec, left: np.ndarray, tol: float) -> np.ndarray:
    """Roots of ``scaled_char_fn`` between consecutive integers.

    Attractive dimples search ``(left, left+1]``, repulsive ones
    ``[left, left+1)``. A vanishing value at the closed end is a level whose
    oscillator eigenfunction has a node at ``z1``; it is returned exactly.
    At the open end it belongs to the neighbouring level and the end is
    nudged inward.
    """
    ints = np.arange(left.min(), left.max() + 2)
    g_int = scaled_char_fn(ints.astype(float), dimple)
    lo = left.astype(float)
    hi = lo + 1.0
    glo = g_int[left - ints[0]]
    ghi = g_int[left - ints[0] + 1]
    if dimple.lam > 0:
        exact, closed = ghi == 0.0, hi
        nudged = glo == 0.0
        lo = np.where(nudged, lo + _NUDGE, lo)
        glo = np.where(nudged, scaled_char_fn(lo, dimple), glo)
    else:
        exact, closed = glo == 0.0, lo
        nudged = ghi == 0.0
        hi = np.where(nudged, hi - _NUDGE, hi)
        ghi = np.where(nudged, scaled_char_fn(hi, dimple), ghi)
    out = closed.copy()
    todo = ~exact
    bad = todo & (np.sign(glo) == np.sign(ghi))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SpectrumError(
            f"no sign change on [{lo[i]}, {hi[i]}] for {dimple}: "
            f"g={glo[i]:.3g}, {ghi[i]:.3g}")
    if todo.any():
        res = find_root(lambda x: scaled_char_fn(x, dimple), (lo[todo], hi[todo]),
                        tolerances=dict(xatol=min(tol, 1e-300), xrtol=EPS,
                                        fatol=0.0, frtol=0.0),
                        maxiter=200)
        x = np.asarray(res.x, float)
        # stragglers are roots within an ulp or two of an integer; Brent finishes them
        for i in np.flatnonzero(~np.asarray(res.success)):
            a, b = lo[todo][i], hi[todo][i]
            try:
                x[i] = brentq(lambda v: float(scaled_char_fn(v, dimple)[0]), a, b,
                              xtol=1e-300, rtol=4 * EPS, maxiter=500)
            except (RuntimeError, ValueError) as exc:
                raise SpectrumError(
                    f"root solve did not converge on [{a}, {b}] for {dimple}: {exc}") from None
        out[todo] = x
    return out


def _interlace_bounds(n: np.ndarray, lam: float):
    if lam > 0:
        return n - 1.0, n.astype(float)
    return n.astype(float), n + 1.0


def solve_spectrum(dimple: DimpleSpec, settings: SolverSettings | None = None,
                   levels: int | None = None) -> Spectrum:
    """Lowest ``levels`` eigenvalues, three zones deep.

    Levels ``n < exact_levels`` are roots of the characteristic function,
    ``exact_levels <= n < perturbative_levels`` use the first-order shift
    ``n - lam phi_n(z1)^2`` clipped to the interlacing interval, and higher
    levels are left at ``n``.
    """
    settings = settings or SolverSettings()
    if levels is None:
        levels = settings.perturbative_levels
    if levels < 1:
        raise ValueError("levels must be >= 1")
    lam = float(dimple.lam)
    m1 = min(settings.exact_levels, levels)
    m2 = min(settings.perturbative_levels, levels)
    n = np.arange(levels)
    xis = n.astype(float)
    zones = np.full(levels, UNPERTURBED, dtype=np.int8)
    zones[:m1] = EXACT
    zones[m1:m2] = PERTURBATIVE
    if lam == 0.0:
        return Spectrum(xis, zones, dimple, settings, 0)

    z = abs(dimple.z1)
    tol = settings.root_tol
    solves = 0
    if lam > 0:
        xis[0] = _ground_state(dimple, tol)
        solves += 1
        if m1 > 1:
            xis[1:m1] = _bracket_roots(dimple, n[1:m1] - 1, tol)
            solves += m1 - 1
    else:
        xis[:m1] = _bracket_roots(dimple, n[:m1], tol)
        solves += m1

    if m2 > m1:
        phi = specfun.oscillator_functions(m2, z)[m1:m2]
        k = n[m1:m2]
        lo, hi = _interlace_bounds(k, lam)
        pert = k - lam * phi * phi
        # open ends of the interlacing interval stay open
        xis[m1:m2] = np.clip(pert, lo + 1e-9 if lam > 0 else lo, hi - 1e-9 if lam < 0 else hi)

    if np.any(np.diff(xis) <= 0):
        raise SpectrumError(f"spectrum not strictly increasing for {dimple}")
    spec = Spectrum(xis, zones, dimple, settings, solves)
    ok = verify_roots(spec)
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        raise SpectrumError(f"level {i} = {xis[i]!r} fails the residual check for {dimple}")
    _count_solves(solves)
    return spec


def residuals(spec: Spectrum) -> np.ndarray:
    """``|char_fn(xi)| / (1 + |W(xi)|)`` at every exact-zone root.

    Evaluated through the scaled forms so nothing overflows: for ``xi > -1``
    numerator and denominator are both divided by ``Gamma(xi + 1)``, and for
    the bound state by ``D_xi(z1) D_xi(-z1)``.
    """
    ex = spec.xis[spec.zones == EXACT]
    out = np.empty_like(ex)
    lam = spec.dimple.lam
    neg = ex < 0
    for i in np.flatnonzero(neg):
        xi = float(ex[i])
        h = ground_char_fn(xi, spec.dimple)
        _, la = specfun.log_pcf_d(xi, spec.dimple.z1)
        _, lb = specfun.log_pcf_d(xi, -spec.dimple.z1)
        inv_dd = -(la + lb)
        if inv_dd > 700.0:
            out[i] = abs(h) * math.exp(-inv_dd)
        else:
            out[i] = abs(h) / (math.exp(inv_dd) + abs(h + lam))
    if (~neg).any():
        xi = ex[~neg]
        g = scaled_char_fn(xi, spec.dimple)
        sn, _ = _pi_trig(xi)
        rg = np.array([specfun.rgamma_real(x + 1.0) for x in xi])
        den = rg + SQRT_2_OVER_PI * np.abs(sn)
        safe = np.where(den > 0, den, 1.0)
        out[~neg] = np.where(den > 0, np.abs(g) / safe, np.where(g == 0, 0.0, np.inf))
    return out


def verify_roots(spec: Spectrum, tol: float = 1e-8) -> np.ndarray:
    """Boolean mask of exact-zone roots that pass the residual check.

    A root passes when its residual ratio is at most ``tol``, or when the
    characteristic function changes sign between the neighbouring doubles,
    i.e. the root is as accurate as the floating-point grid allows. The second
    clause matters for levels within ~1e-6 of an integer at large ``n``.
    """
    ok = residuals(spec) <= tol
    if ok.all():
        return ok
    ex = spec.xis[spec.zones == EXACT]
    for i in np.flatnonzero(~ok):
        x = float(ex[i])
        lo, hi = np.nextafter(x, -np.inf), np.nextafter(x, np.inf)
        if x < 0:
            a = ground_char_fn(lo, spec.dimple)
            b = ground_char_fn(hi, spec.dimple)
        else:
            a, b = scaled_char_fn(np.array([lo, hi]), spec.dimple)
        ok[i] = a * b <= 0
    return ok


def spectrum_oracle(dimple: DimpleSpec, basis_size: int, levels: int) -> np.ndarray:
    """Lowest eigenvalues of the truncated oscillator-basis Hamiltonian.

    ``H_mn = (m + 1/2) delta_mn - lam phi_m(z1) phi_n(z1)`` for ``m, n < basis_size``,
    diagonalized densely; returns ``eigenvalue - 1/2``.
    """
    from scipy.linalg import eigh

    if basis_size < levels:
        raise ValueError("basis_size must be >= levels")
    phi = specfun.oscillator_functions(basis_size, dimple.z1)
    h = -dimple.lam * np.outer(phi, phi)
    h[np.diag_indices(basis_size)] += np.arange(basis_size) + 0.5
    ev = eigh(h, eigvals_only=True, subset_by_index=[0, levels - 1], overwrite_a=True,
              check_finite=False)
    return np.sort(ev)[:levels] - 0.5


# ---------------------------------------------------------------------------
# solve counter and cache

_solve_lock = threading.Lock()
_solve_count = 0


def _count_solves(k: int) -> None:
    global _solve_count
    with _solve_lock:
        _solve_count += k


def solve_count() -> int:
    """Total exact-zone root solves performed in this process."""
    return _solve_count


class SpectrumCache:
    """Content-addressed store of solved spectra.

    Keys hash ``(lam, z1, settings, levels)``; records are ``.npz`` files holding
    the float64 eigenvalues and int8 zone tags, which round-trip bit-exactly.
    Writes go through a temporary file and an atomic rename, so concurrent
    readers never see partial records and duplicate writers are harmless.
    """

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[str, Spectrum] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(dimple: DimpleSpec, settings: SolverSettings, levels: int) -> str:
        # |z1| because the spectrum is mirror symmetric
        blob = json.dumps([float(dimple.lam).hex(), abs(float(dimple.z1)).hex(),
                           settings.digest(), int(levels)])
        return hashlib.sha256(blob.encode()).hexdigest()[:32]

    def _path(self, key: str) -> Path:
        return self.directory / f"spectrum-{key}.npz"

    def get(self, dimple: DimpleSpec, settings: SolverSettings, levels: int) -> Spectrum:
        key = self.key(dimple, settings, levels)
        with self._lock:
            hit = self._mem.get(key)
        if hit is not None:
            self.hits += 1
            return Spectrum(hit.xis, hit.zones, dimple, settings, 0)
        if self.directory is not None and self._path(key).exists():
            with np.load(self._path(key)) as rec:
                spec = Spectrum(rec["xis"].copy(), rec["zones"].copy(), dimple, settings, 0)
            with self._lock:
                self._mem[key] = spec
            self.hits += 1
            return spec
        self.misses += 1
        spec = solve_spectrum(dimple, settings, levels)
        with self._lock:
            self._mem[key] = spec
        if self.directory is not None:
            self._write(key, spec)
        return spec

    def _write(self, key: str, spec: Spectrum) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, xis=spec.xis, zones=spec.zones)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def harmonic_spectrum(levels: int, settings: SolverSettings | None = None) -> Spectrum:
    return solve_spectrum(DimpleSpec(0.0, 0.0), settings, levels)


__all__ = [
    "TrapConfig", "DimpleSpec", "SolverSettings", "Spectrum", "SpectrumError",
    "SpectrumCache", "char_fn", "scaled_char_fn", "ground_char_fn", "wronskian",
    "solve_spectrum", "spectrum_oracle", "sigma_to_lambda", "residuals",
    "solve_count", "harmonic_spectrum", "verify_roots",
]
