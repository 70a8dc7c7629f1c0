"""Interpolation of vanishing ideals, root orders, and small elimination helpers."""

from __future__ import annotations

from .field import FieldError
from .matrix import ExactMatrix, MatrixError, scalar_rank_kernel, scalar_det
from .poly import HomPoly, PolyError, UniPoly, mono_basis, mono_count


class InterpError(ValueError):
    pass


def fit_homogeneous(field, points, d: int, nvars: int = None, vars_=None):
    """Basis of the degree-d forms vanishing at every given point.

    Points are nonzero coordinate tuples; the result is echelonized against
    the graded-lex monomial order and each polynomial has leading
    coefficient 1.  Deterministic for a fixed input order.
    """
    if d < 0:
        raise InterpError("degree must be non-negative")
    if vars_ is None:
        raise InterpError("variable names are required")
    nvars = len(vars_)
    basis = mono_basis(nvars, d)
    rows = []
    for pt in points:
        if len(pt) != nvars:
            raise InterpError(f"point {pt} has wrong length")
        if all(field.is_zero(field.normalize(c)) for c in pt):
            raise InterpError("points must be nonzero")
        row = []
        for m in basis:
            v = field.one
            for x, e in zip(pt, m):
                for _ in range(e):
                    v = field.mul(v, field.normalize(x))
            row.append(v)
        rows.append(row)
    if not rows:
        polys = []
        for j in range(len(basis)):
            vec = [field.zero] * len(basis)
            vec[j] = field.one
            polys.append(HomPoly.from_coeff_vector(field, vars_, d, vec))
        return polys
    _, kernel = scalar_rank_kernel(field, rows)
    return [HomPoly.from_coeff_vector(field, vars_, d, vec) for vec in kernel]


def ord_at(p: UniPoly, t0) -> int:
    """Multiplicity of t0 as a root of a univariate restriction.

    An identically-zero restriction signals that the whole probe family
    lies inside the locus, which the caller must treat as an error.
    """
    if p.is_zero():
        raise InterpError("restriction is identically zero (probe inside locus)")
    return p.ord_at(t0)


def restrict_to_pencil(poly: HomPoly, base, direction) -> UniPoly:
    """Restriction of a form to the affine pencil base + t*direction."""
    return poly.restrict_pencil(
        [poly.field.normalize(v) for v in base],
        [poly.field.normalize(v) for v in direction],
    )


def scheme_length(field, gens, vars_, degrees=None) -> int:
    """Length of the zero-dimensional scheme cut out by the given forms.

    Computes dim (S/I)_d for consecutive degrees d and requires the value to
    stabilize; the stable value is the length (points counted with
    multiplicity).  Raises if the dimensions keep moving (positive
    dimensional or degree window too small).
    """
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise InterpError("no generators")
    nv = len(vars_)
    maxdeg = max(g.degree for g in gens)
    if degrees is None:
        lo = maxdeg + nv + 1
        degrees = (lo, lo + 1, lo + 2)
    vals = []
    for d in degrees:
        cols = []
        for g in gens:
            shift = d - g.degree
            if shift < 0:
                continue
            for m in mono_basis(nv, shift):
                mono = HomPoly(field, vars_, shift, {m: field.one})
                cols.append((g * mono).coeff_vector())
        if not cols:
            vals.append(mono_count(nv, d))
            continue
        rows = [[col[i] for col in cols] for i in range(mono_count(nv, d))]
        rank, _ = scalar_rank_kernel(field, rows)
        vals.append(mono_count(nv, d) - rank)
    if len(set(vals)) != 1:
        raise InterpError(f"scheme length did not stabilize: {vals} at degrees {degrees}")
    return vals[0]


def binary_form_coeffs(p: HomPoly):
    """Coefficients [c_0..c_d] of a binary form sum c_i s^(d-i) t^i."""
    if len(p.vars) != 2:
        raise InterpError("expected a binary form")
    d = p.degree
    out = [p.field.zero] * (d + 1)
    for (es, et), c in p.coeffs.items():
        out[et] = c
    return out


def binary_resultant(field, a_coeffs, b_coeffs):
    """Resultant of two binary forms given by coefficient lists."""
    m = len(a_coeffs) - 1
    n = len(b_coeffs) - 1
    if m < 0 or n < 0:
        raise InterpError("resultant of empty form")
    size = m + n
    if size == 0:
        return field.one
    rows = []
    for i in range(n):
        rows.append(
            [field.zero] * i + list(a_coeffs) + [field.zero] * (size - i - m - 1)
        )
    for i in range(m):
        rows.append(
            [field.zero] * i + list(b_coeffs) + [field.zero] * (size - i - n - 1)
        )
    return scalar_det(field, rows)
