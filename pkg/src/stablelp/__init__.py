"""Numerics for symmetric stable processes, subordinated extensions and
Littlewood-Paley type functionals."""

from .grid import GridFunction, TimeGrid, convolve, fourier, inverse_fourier, lp_norm, make_grid
from .density import (
    DensityTable, ExitLaw, StableParams, check_two_sided, density_derivative, mu_moment_bounds,
    psi, qt_kernel, stable_density, subordination_density,
)
from .extension import ExtensionField, extend, extend_by_subordination
from .functionals import (
    FunctionalReport, LPFunctionals, compute_functionals, hl_maximal, n_alpha_maximal,
)
from .multiplier import CertificationReport, KernelSpec, apply_T, certify
from .montecarlo import McConfig, PathBatch, PathRecord, run_paths, sample_stable

__version__ = "0.1.0"
