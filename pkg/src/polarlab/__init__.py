"""Polarization and second-eigenpair lab for the Dirichlet p-Laplacian on polar grids."""

from .grid import (
    BoundarySet,
    DomainError,
    DomainMask,
    PolarGrid,
    RadialProfile,
    boundary_of,
    build_grid,
    cell_distance,
    mask_from_profile,
)
from .lab import ExperimentConfig, run
from .nodal import (
    NodalReport,
    moving_polarization_experiment,
    nodal_boundary_distance,
    nodal_sets,
    normal_derivative_probe,
    theta_of_point,
    theta_star,
)
from .polarization import (
    GridFunction,
    PolarizationPlane,
    is_circularly_symmetric,
    plane,
    polarize_function,
    polarize_mask,
    reflect_point,
    split_signs,
    support_of,
)
from .spectral import (
    EigenpairResult,
    EnergyConfig,
    SolverConfig,
    energy,
    mass,
    rayleigh,
    solve_first,
    solve_second,
    weak_residual,
)

__version__ = "0.1.0"
