"""Mass functionals (geometric units G = c = 1)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import spectral
from .profile_geometry import BoundaryData, ProfileCurve, induced_boundary_data

UNITS = "G = c = 1"


@dataclass(frozen=True)
class MassReport:
    adm: float
    hawking: float
    boundary_area: float
    horizon_equiv_mass: float
    units: str = UNITS

    def to_dict(self):
        return asdict(self)


def boundary_area(data: BoundaryData) -> float:
    # dv_gamma = alpha beta dtheta dphi, the phi integral gives 2 pi
    return 2.0 * np.pi * spectral.integrate(data.alpha * data.beta)


def hawking_mass(data: BoundaryData) -> float:
    """sqrt(area / 16 pi) * (1 - (1 / 16 pi) * int H^2 dv_gamma)."""
    area = boundary_area(data)
    willmore = 2.0 * np.pi * spectral.integrate(data.H**2 * data.alpha * data.beta)
    return float(np.sqrt(area / (16.0 * np.pi)) * (1.0 - willmore / (16.0 * np.pi)))


def horizon_equiv_mass(area: float) -> float:
    """Mass of the Schwarzschild horizon with the given area."""
    return float(np.sqrt(area / (16.0 * np.pi)))


def mass_report(solution, curve: ProfileCurve) -> MassReport:
    data = induced_boundary_data(solution, curve)
    area = boundary_area(data)
    return MassReport(
        adm=float(solution.adm_mass()),
        hawking=hawking_mass(data),
        boundary_area=float(area),
        horizon_equiv_mass=horizon_equiv_mass(area),
    )
