"""Field reduction in finite projective spaces: spreads, Singer cycles, subspreads, linear sets."""

__version__ = "0.1.0"

from .gf import ExtFieldCtx, Fe, FieldError, build_ext_field, field_of_order, find_generator  # noqa: E402
from .reduction import VfrMap, blowup, compose_vfr, standard_vfr  # noqa: E402
from .semilinear import ProjSemilinear, SemilinearMap, compose, inverse, scalar_map  # noqa: E402

__all__ = [
    "ExtFieldCtx",
    "Fe",
    "FieldError",
    "ProjSemilinear",
    "SemilinearMap",
    "VfrMap",
    "blowup",
    "build_ext_field",
    "compose",
    "compose_vfr",
    "field_of_order",
    "find_generator",
    "inverse",
    "scalar_map",
    "standard_vfr",
]
