"""Decay laws of a two-level emitter at the edge of a dephasing photonic lattice.

Solvers for the dephasing master equation, its stochastic unraveling,
the dephasing-free limit (wavefunction and band-integral routes), the
single-cavity Jaynes-Cummings limit, and the strong-dephasing classical
walk, plus fitting tools for exponential, power-law, and plateau decay
diagnostics.
"""

from importlib.metadata import PackageNotFoundError, version

from .analysis import FitReport, envelope, fit_exponential, fit_power_law, plateau_check
from .coherent import (
    build_hamiltonian,
    evolve_coherent,
    spectral_density,
    survival_spectral,
    zeno_edge_times,
)
from .curves import DecayCurve, read_curve, write_curve
from .jaynes_cummings import (
    JCSpectrum,
    JCState,
    eigenvector_coalescence_gap,
    evolve_jc,
    exceptional_point,
    jc_rate_approx,
    jc_spectrum,
    relaxation_matrix,
)
from .master import DensityState, IntegratorOptions, evolve_master, initial_state, master_rhs
from .model import (
    DerivedRates,
    ModelParams,
    default_step,
    derive_rates,
    diffusive_truncation,
    load_config,
    recommended_truncation,
)
from .stepping import QuadratureError, SolverError, StepUnderflowError, TraceDriftError
from .trajectories import EnsembleResult, PureState, run_ensemble, trajectory_step
from .walk import WalkKernel, evolve_walk, walk_asymptotic, walk_exact

try:
    __version__ = version("decaylab")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "DecayCurve",
    "DensityState",
    "DerivedRates",
    "EnsembleResult",
    "FitReport",
    "IntegratorOptions",
    "JCSpectrum",
    "JCState",
    "ModelParams",
    "PureState",
    "QuadratureError",
    "SolverError",
    "StepUnderflowError",
    "TraceDriftError",
    "WalkKernel",
    "build_hamiltonian",
    "default_step",
    "derive_rates",
    "diffusive_truncation",
    "eigenvector_coalescence_gap",
    "envelope",
    "evolve_coherent",
    "evolve_jc",
    "evolve_master",
    "evolve_walk",
    "exceptional_point",
    "fit_exponential",
    "fit_power_law",
    "initial_state",
    "jc_rate_approx",
    "jc_spectrum",
    "load_config",
    "master_rhs",
    "plateau_check",
    "read_curve",
    "recommended_truncation",
    "relaxation_matrix",
    "run_ensemble",
    "spectral_density",
    "survival_spectral",
    "trajectory_step",
    "walk_asymptotic",
    "walk_exact",
    "write_curve",
    "zeno_edge_times",
]
