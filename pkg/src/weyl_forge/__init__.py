"""Numerical laboratory for static axisymmetric (Weyl) vacuum metrics.

The package generates Weyl metrics from Newtonian axis measures or harmonic
potentials, computes the Bartnik boundary data (induced metric and mean
curvature) of axisymmetric surfaces, reconstructs surfaces from prescribed
metric data, and inverts the boundary map by nonlinear least squares.
"""

from .axis_measure import AxisMeasure, PointMass, Rod, potential_eval, total_mass
from .constraints import hamiltonian_residual, momentum_residual, surface_jet
from .embedding import (
    EmbeddingConfig,
    MetricProfile,
    classify_chi,
    dirichlet_map,
    embed_profile,
    embed_profile_general,
)
from .errors import WeylForgeError
from .harmonic_field import HarmonicField, solve_exterior_dirichlet
from .inverse_solver import (
    BartnikTarget,
    InverseConfig,
    SolveReport,
    UnknownVector,
    bartnik_forward,
    h_scaling_scan,
    small_h_probe,
    solve_bartnik_inverse,
)
from .io import tool_version
from .masses import hawking_mass, horizon_equiv_mass, mass_report
from .profile_geometry import BoundaryData, ProfileCurve, flat_boundary_data, induced_boundary_data
from .weyl_metric import SolutionConfig, WeylSolution, adm_mass, lambda_eval

__version__ = tool_version()

__all__ = [
    "AxisMeasure", "PointMass", "Rod", "potential_eval", "total_mass",
    "hamiltonian_residual", "momentum_residual", "surface_jet",
    "EmbeddingConfig", "MetricProfile", "classify_chi", "dirichlet_map",
    "embed_profile", "embed_profile_general",
    "WeylForgeError",
    "HarmonicField", "solve_exterior_dirichlet",
    "BartnikTarget", "InverseConfig", "SolveReport", "UnknownVector",
    "bartnik_forward", "h_scaling_scan", "small_h_probe", "solve_bartnik_inverse",
    "hawking_mass", "horizon_equiv_mass", "mass_report",
    "BoundaryData", "ProfileCurve", "flat_boundary_data", "induced_boundary_data",
    "SolutionConfig", "WeylSolution", "adm_mass", "lambda_eval",
    "__version__",
]
