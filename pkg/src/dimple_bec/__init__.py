"""Ideal Bose gas in a 1D harmonic trap decorated with a Dirac-delta dimple."""

from .config import ConfigError, Grid, RunConfig
from .density import DensityProfile, GroundState, density_profile, ground_state
from .figures import (FigureDataset, Pipeline, run_fig1, run_fig2, run_fig3, run_fig4,
                      run_fig5)
from .spectrum import (DimpleSpec, SolverSettings, Spectrum, SpectrumCache, SpectrumError,
                       TrapConfig, char_fn, sigma_to_lambda, solve_spectrum,
                       spectrum_oracle, wronskian)
from .thermo import (CriticalPoint, ThermoError, ThermoPoint, energies, occupation_sum,
                     solve_mu, solve_tc)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "Grid", "RunConfig", "DensityProfile", "GroundState", "density_profile",
    "ground_state", "FigureDataset", "Pipeline", "run_fig1", "run_fig2", "run_fig3",
    "run_fig4", "run_fig5", "DimpleSpec", "SolverSettings", "Spectrum", "SpectrumCache",
    "SpectrumError", "TrapConfig", "char_fn", "sigma_to_lambda", "solve_spectrum",
    "spectrum_oracle", "wronskian", "CriticalPoint", "ThermoError", "ThermoPoint",
    "energies", "occupation_sum", "solve_mu", "solve_tc",
]
