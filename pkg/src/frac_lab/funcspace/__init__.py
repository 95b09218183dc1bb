"""Function representations, norms, seminorm quadrature and rearrangement."""

from .constructions import (
    DecayReport,
    TruncationReport,
    critical_point_t2,
    elementary_inequality_gap,
    radial_decay_bound,
    radial_decay_check,
    split_radius,
    truncation_beta,
    truncation_split,
)
from .planar import GridFunction2D, direct_seminorm_2d, directional_seminorm
from .profiles import (
    PiecewiseFunction1D,
    RadialProfile,
    dilate,
    even_extension,
    lq_norm,
    moser_profile,
    read_function_csv,
    read_profile_csv,
    translate_dilate,
    write_function_csv,
    write_profile_csv,
)
from .quadrature import QuadratureError, QuadratureSpec
from .rearrange import distribution_function, rearrange
from .seminorm import gagliardo_1d, gagliardo_radial

__all__ = [
    "DecayReport",
    "GridFunction2D",
    "PiecewiseFunction1D",
    "QuadratureError",
    "QuadratureSpec",
    "RadialProfile",
    "TruncationReport",
    "critical_point_t2",
    "dilate",
    "direct_seminorm_2d",
    "directional_seminorm",
    "distribution_function",
    "elementary_inequality_gap",
    "even_extension",
    "gagliardo_1d",
    "gagliardo_radial",
    "lq_norm",
    "moser_profile",
    "radial_decay_bound",
    "radial_decay_check",
    "read_function_csv",
    "read_profile_csv",
    "rearrange",
    "split_radius",
    "translate_dilate",
    "truncation_beta",
    "truncation_split",
    "write_function_csv",
    "write_profile_csv",
]
