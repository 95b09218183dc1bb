"""Critical fractional Sobolev spaces: Moser-Trudinger constants, seminorm quadrature and Poincare-type bounds."""

from .constants import CriticalParams, alpha_star, bbm_constant, gamma_series, surface_measure
from .funcspace import (
    GridFunction2D,
    PiecewiseFunction1D,
    QuadratureSpec,
    RadialProfile,
    gagliardo_1d,
    gagliardo_radial,
    moser_profile,
    rearrange,
)
from .poincare import IntervalUnionDomain, analytic_lower_bound_1d, rayleigh_estimate

__version__ = "0.1.0"

__all__ = [
    "CriticalParams",
    "GridFunction2D",
    "IntervalUnionDomain",
    "PiecewiseFunction1D",
    "QuadratureSpec",
    "RadialProfile",
    "alpha_star",
    "analytic_lower_bound_1d",
    "bbm_constant",
    "gagliardo_1d",
    "gagliardo_radial",
    "gamma_series",
    "moser_profile",
    "rayleigh_estimate",
    "rearrange",
    "surface_measure",
]
