"""Figure pipelines: each returns a FigureDataset of plain columns."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import density, thermo
from .config import RunConfig
from .spectrum import DimpleSpec, Spectrum, SpectrumCache, SpectrumError

CSV_FORMAT = "{:.12g}"

NOTES = {
    1: "critical temperature vs dimple position",
    2: "chemical potential vs temperature, in units of hbar*omega",
    3: "condensate fraction vs temperature at two dimple positions",
    4: ("condensate fraction vs dimple position at T = Tc0; the figure caption "
        "labels the axis as T/Tc0 but the described content is a position sweep"),
    5: ("unit-normalized ground-state density; the figure caption gives lambda=3.6 "
        "while the accompanying text says 3.2, the default here follows the caption"),
}


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FigureDataset:
    figure_id: int
    columns: tuple[str, ...]
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = np.asarray(self.rows, float)
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"rows must be (k, {len(self.columns)}), got {rows.shape}")
        object.__setattr__(self, "rows", rows)
        if "config_digest" not in self.metadata:
            raise ValueError("dataset metadata must carry config_digest")

    @property
    def digest(self) -> str:
        return self.metadata["config_digest"]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            # adding 0.0 folds -0.0 into 0.0
            buf.write(",".join(CSV_FORMAT.format(v + 0.0) for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv())
        return path


class Pipeline:
    """Shared state for the figure runs: config, spectrum cache, bare T_c."""

    def __init__(self, cfg: RunConfig, cache: SpectrumCache | None = None):
        self.cfg = cfg
        self.cache = cache if cache is not None else SpectrumCache(cfg.cache_path)
        self.trap = cfg.trap
        self._tau_c0: float | None = None

    def spectrum(self, lam: float, z1: float) -> Spectrum:
        try:
            return self.cache.get(DimpleSpec(float(lam), float(z1)), self.cfg.solver,
                                  self.cfg.level_count)
        except (SpectrumError, ValueError, ArithmeticError) as exc:
            raise PipelineError(
                f"spectrum failed at lambda={float(lam)!r}, z1={float(z1)!r}: {exc}") from exc

    @property
    def tau_c0(self) -> float:
        if self._tau_c0 is None:
            self._tau_c0 = thermo.critical_tau(self.spectrum(0.0, 0.0), self.cfg.n_particles)
        return self._tau_c0

    @property
    def kelvin_per_tau(self) -> float:
        return self.trap.quantum / self.trap.k_b

    def meta(self, fig: int, **extra) -> dict:
        out = {"config_digest": self.cfg.digest(), "figure": fig, "note": NOTES[fig]}
        out.update(extra)
        return out

    def _guard(self, what: str, fn, *args):
        try:
            return fn(*args)
        except (thermo.ThermoError, ArithmeticError, AssertionError) as exc:
            raise PipelineError(f"{what}: {exc}") from exc

    def fraction_curve(self, spec: Spectrum, taus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(mu_reduced, fraction)`` along ``taus``."""
        n = self.cfg.n_particles
        e0 = float(spec.xis[0]) + 0.5
        mus = np.empty(len(taus))
        frac = np.empty(len(taus))
        for i, tau in enumerate(taus):
            gap, n0, _ = self._guard(f"mu at tau={float(tau)!r}, lambda={spec.dimple.lam!r}, "
                                     f"z1={spec.dimple.z1!r}",
                                     thermo.solve_mu_reduced, spec, n, tau)
            mus[i] = e0 - gap * tau
            frac[i] = n0 / n
        return mus, frac

    # -- figures -----------------------------------------------------------------

    def fig1(self) -> FigureDataset:
        z1s = self.cfg.z1_grid.values()
        tau_c = np.array([
            self._guard(f"T_c at z1={float(z)!r}", thermo.critical_tau,
                        self.spectrum(self.cfg.lam, z), self.cfg.n_particles)
            for z in z1s])
        rows = np.column_stack([z1s, tau_c * self.kelvin_per_tau, tau_c / self.tau_c0])
        return FigureDataset(1, ("z1", "tc_kelvin", "tc_over_tc0"), rows,
                             self.meta(1, lam=self.cfg.lam,
                                       tc0_kelvin=self.tau_c0 * self.kelvin_per_tau))

    def fig2(self) -> FigureDataset:
        ratios = self.cfg.t_grid.values()
        taus = ratios * self.tau_c0
        cols = [ratios, self.fraction_curve(self.spectrum(0.0, 0.0), taus)[0]]
        names = ["t_over_tc0", "mu_lambda0"]
        for z in self.cfg.fig2_positions:
            cols.append(self.fraction_curve(self.spectrum(self.cfg.lam, z), taus)[0])
            names.append("mu_z1_" + CSV_FORMAT.format(z))
        return FigureDataset(2, tuple(names), np.column_stack(cols),
                             self.meta(2, lam=self.cfg.lam, units="hbar*omega"))

    def fig3(self) -> FigureDataset:
        ratios = self.cfg.t_grid.values()
        taus = ratios * self.tau_c0
        cols = [ratios]
        names = ["t_over_tc0"]
        for z in self.cfg.fig2_positions:
            cols.append(self.fraction_curve(self.spectrum(self.cfg.lam, z), taus)[1])
            names.append("fraction_z1_" + CSV_FORMAT.format(z))
        return FigureDataset(3, tuple(names), np.column_stack(cols),
                             self.meta(3, lam=self.cfg.lam))

    def fig4(self) -> FigureDataset:
        z1s = self.cfg.z1_grid.values()
        tau = np.array([self.tau_c0])
        frac = np.array([self.fraction_curve(self.spectrum(self.cfg.lam, z), tau)[1][0]
                         for z in z1s])
        bare = self.fraction_curve(self.spectrum(0.0, 0.0), tau)[1][0]
        return FigureDataset(4, ("z1", "fraction"), np.column_stack([z1s, frac]),
                             self.meta(4, lam=self.cfg.lam, bare_fraction=float(bare)))

    def fig5(self) -> FigureDataset:
        grid = self.cfg.z_grid.values()
        lam, z1 = self.cfg.fig5_lam, self.cfg.fig5_z1
        try:
            gs = density.ground_state(DimpleSpec(lam, z1), self.spectrum(lam, z1))
            bare = density.ground_state(DimpleSpec(0.0, 0.0), self.spectrum(0.0, 0.0))
        except (SpectrumError, RuntimeError) as exc:
            raise PipelineError(f"ground state at lambda={lam!r}, z1={z1!r}: {exc}") from exc
        rows = np.column_stack([grid, density.density_profile(gs, grid).values,
                                density.density_profile(bare, grid).values])
        return FigureDataset(5, ("z", "rho_decorated", "rho_harmonic"), rows,
                             self.meta(5, lam=lam, z1=z1, xi0=gs.xi0))

    def figure(self, fig: int) -> FigureDataset:
        runners = {1: self.fig1, 2: self.fig2, 3: self.fig3, 4: self.fig4, 5: self.fig5}
        if fig not in runners:
            raise PipelineError(f"unknown figure {fig!r}; expected 1..5")
        return runners[fig]()


def run_fig1(cfg: RunConfig, cache: SpectrumCache | None = None) -> FigureDataset:
    return Pipeline(cfg, cache).fig1()


def run_fig2(cfg: RunConfig, cache: SpectrumCache | None = None) -> FigureDataset:
    return Pipeline(cfg, cache).fig2()


def run_fig3(cfg: RunConfig, cache: SpectrumCache | None = None) -> FigureDataset:
    return Pipeline(cfg, cache).fig3()


def run_fig4(cfg: RunConfig, cache: SpectrumCache | None = None) -> FigureDataset:
    return Pipeline(cfg, cache).fig4()


def run_fig5(cfg: RunConfig, cache: SpectrumCache | None = None) -> FigureDataset:
    return Pipeline(cfg, cache).fig5()
