"""Exact field, polynomial and linear algebra kernels."""

from .field import (
    DEFAULT_PRIME,
    FieldError,
    PrimeField,
    QQ,
    RationalField,
    field_from_json,
    is_prime,
    parse_field_flag,
)
from .poly import (
    HomPoly,
    PolyError,
    UniPoly,
    VARS_L,
    VARS_PAIR,
    VARS_ST,
    VARS_X,
    VARS_XI,
    mono_basis,
    mono_count,
    mono_index,
    parse_poly,
)
from .matrix import (
    ExactMatrix,
    MatrixError,
    Subquotient,
    det_generic,
    fp_det,
    fp_kernel,
    fp_rank,
    fp_rref,
    fp_solve,
    scalar_det,
    scalar_rank_kernel,
    scalar_solve,
)
from .interp import (
    InterpError,
    binary_form_coeffs,
    binary_resultant,
    fit_homogeneous,
    ord_at,
    restrict_to_pencil,
    scheme_length,
)

__all__ = [
    "DEFAULT_PRIME",
    "FieldError",
    "PrimeField",
    "QQ",
    "RationalField",
    "field_from_json",
    "is_prime",
    "parse_field_flag",
    "HomPoly",
    "PolyError",
    "UniPoly",
    "VARS_L",
    "VARS_PAIR",
    "VARS_ST",
    "VARS_X",
    "VARS_XI",
    "mono_basis",
    "mono_count",
    "mono_index",
    "parse_poly",
    "ExactMatrix",
    "MatrixError",
    "Subquotient",
    "det_generic",
    "fp_det",
    "fp_kernel",
    "fp_rank",
    "fp_rref",
    "fp_solve",
    "scalar_det",
    "scalar_rank_kernel",
    "scalar_solve",
    "InterpError",
    "binary_form_coeffs",
    "binary_resultant",
    "fit_homogeneous",
    "ord_at",
    "restrict_to_pencil",
    "scheme_length",
]
