"""Finite categories, wreath products and the duality between Θ_n and Joyal disks."""
from .fincat import (
    CategoryError,
    FiniteCategory,
    FunctorData,
    FunctorError,
    NaturalTransformation,
    check_functor,
    opposite,
    validate_category,
)
from .sites import materialize, site_hom
from .wreath import M_of, Mop_of, cowreath, duality_iso, theta, wreath

__version__ = "0.1.0"

__all__ = [
    "CategoryError",
    "FiniteCategory",
    "FunctorData",
    "FunctorError",
    "M_of",
    "Mop_of",
    "NaturalTransformation",
    "check_functor",
    "cowreath",
    "duality_iso",
    "materialize",
    "opposite",
    "site_hom",
    "theta",
    "validate_category",
    "wreath",
]
