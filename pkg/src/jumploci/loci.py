"""Jumping lines and jumping conics: detection, closed-form locus
polynomials, interpolated loci, multiplicity probes, and the predicates
special to each example family.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field as dc_field

from .algebra.field import PrimeField
from .algebra.interp import fit_homogeneous, ord_at, scheme_length
from .algebra.matrix import ExactMatrix, scalar_det, scalar_rank_kernel, scalar_solve
from .algebra.poly import (
    HomPoly,
    UniPoly,
    VARS_L,
    VARS_PAIR,
    VARS_ST,
    VARS_X,
    VARS_XI,
    mono_basis,
)
from .cohom import (
    CohomError,
    P1Sections,
    P2Cohomology,
    h0_on_conic_divisor,
    splitting_of,
    stability_check,
)
from .sheafkit import (
    BundleFamily,
    ConicForm,
    P1,
    P2,
    Presentation,
    SheafError,
    TYPE02,
    TYPE03G,
    TYPE03NG,
    TYPEM12,
    XI_PAIRS,
    cross,
    line_param,
    random_line,
    random_point,
    split_conic,
    sym2_resolution,
    two_points_on_line,
)


class LociError(ValueError):
    pass


class PencilInLocus(LociError):
    pass


def rng_stream(seed: int, task: str, index: int = 0) -> random.Random:
    """A per-task random stream fanned out from a master seed."""
    digest = hashlib.sha256(f"{seed}:{task}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# ---------------------------------------------------------------------------
# locus polynomials and pencils
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocusPolynomial:
    variables: tuple
    poly: HomPoly
    provenance: str  # determinant | interpolated | closed_form

    def __post_init__(self):
        if self.poly.is_zero():
            raise LociError("a locus polynomial must be nonzero")
        object.__setattr__(self, "poly", self.poly.lead_normalized())

    @property
    def degree(self):
        return self.poly.degree

    def value_at(self, coords):
        return self.poly.evaluate(list(coords))

    def vanishes_at(self, coords) -> bool:
        return self.poly.field.is_zero(self.value_at(coords))

    def to_json(self):
        return {
            "degree": self.degree,
            "poly": self.poly.to_json(),
            "provenance": self.provenance,
            "variables": list(self.variables),
        }


@dataclass
class PencilProbe:
    """A line in the space of conics, with recorded jump data per parameter."""

    xi0: ConicForm
    xi1: ConicForm
    samples: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        f = self.xi0.field
        rows = [list(self.xi0.xi), list(self.xi1.xi)]
        rank, _ = scalar_rank_kernel(f, rows)
        if rank != 2:
            raise LociError("pencil endpoints must be independent conics")

    def conic_at(self, t):
        f = self.xi0.field
        xi = tuple(
            f.add(a, f.mul(f.normalize(t), b))
            for a, b in zip(self.xi0.xi, self.xi1.xi)
        )
        return ConicForm(f, xi)


# ---------------------------------------------------------------------------
# splitting-based jump tests
# ---------------------------------------------------------------------------

def _model(e: BundleFamily) -> P2Cohomology:
    if "_model" not in e.extra:
        e.extra["_model"] = P2Cohomology(e.pres)
    return e.extra["_model"]


def line_splitting(e: BundleFamily, l):
    return splitting_of(e.pres.pullback(line_param(e.field, tuple(l))))


def line_is_jumping(e: BundleFamily, l) -> bool:
    return line_splitting(e, l).parts[0] > 0


def conic_splitting(e: BundleFamily, xi: ConicForm):
    param = xi.param if xi.param is not None else xi.parameterize()
    return splitting_of(e.pres.pullback(param))


def jump_size_conic(e: BundleFamily, xi: ConicForm):
    """(is_jumping, jump_size) of a conic; jump size is None off the smooth case.

    Smooth conics are tested through the splitting of the parameterized
    restriction; reducible conics with c1 = 0 through their component
    lines; everything with c1 = -1 through sections on the divisor.
    """
    if e.c1 == 0:
        if xi.is_smooth():
            parts = conic_splitting(e, xi).parts
            a = parts[0]
            return a > 0, a
        return _reducible_jump_c0(e, xi), None
    # c1 = -1: a conic is jumping exactly when its divisor carries sections
    h = h0_on_conic_divisor(_model(e), xi, 0)
    if xi.is_smooth():
        parts = conic_splitting(e, xi).parts
        a = parts[0] + 1
        if (h > 0) != (a >= 1):
            raise LociError("divisor sections disagree with the splitting")
        return h > 0, a
    return h > 0, None


def _reducible_jump_c0(e: BundleFamily, xi: ConicForm) -> bool:
    kind, *rest = split_conic(xi)
    if kind == "double":
        return line_is_jumping(e, rest[0])
    if kind == "pair":
        return line_is_jumping(e, rest[0]) or line_is_jumping(e, rest[1])
    # conjugate component lines: they jump together, so test whether the
    # jumping-line polynomial shares a root with the intersection quadric
    z, tparam, quad = rest
    j1 = j1_poly_c0(e)
    f = e.field
    lam = j1.poly.substitute(
        VARS_ST, [_cross_param(f, z, tparam, i) for i in range(3)]
    )
    if lam.is_zero():
        return True
    from .algebra.interp import binary_form_coeffs, binary_resultant

    res = binary_resultant(f, binary_form_coeffs(lam), list(quad))
    return f.is_zero(res)


def _cross_param(field, z, tparam, i):
    """Component i of cross(z, g(s,t)) as a binary form of degree one."""
    j, k = {0: (1, 2), 1: (2, 0), 2: (0, 1)}[i]
    return tparam[k].scale(z[j]) - tparam[j].scale(z[k])


# ---------------------------------------------------------------------------
# locus polynomials from determinants
# ---------------------------------------------------------------------------

def _symbolic_det(field, mats, vars_, monos=None):
    """det(sum of coordinate * matrix) as a polynomial in the coordinates."""
    n = len(mats[0])
    if any(len(m) != n or (n and len(m[0]) != n) for m in mats):
        raise LociError("determinant needs square multiplication models")
    entries = []
    for r in range(n):
        row = []
        for c in range(n):
            coeffs = {}
            for v, m in enumerate(mats):
                val = m[r][c]
                if field.is_zero(val):
                    continue
                exp = [0] * len(vars_)
                if monos is None:
                    exp[v] = 1
                    coeffs[tuple(exp)] = val
                else:
                    coeffs[monos[v]] = val
            row.append(HomPoly(field, vars_, 1, coeffs))
        entries.append(row)
    return ExactMatrix(field, entries).det()


def j1_poly_c0(e: BundleFamily) -> LocusPolynomial:
    """The jumping-line polynomial of a semistable bundle with c1 = 0:
    the determinant of multiplication H^1(E(-2)) -> H^1(E(-1)), degree c2."""
    if "_j1" in e.extra:
        return e.extra["_j1"]
    if e.c1 != 0:
        raise LociError("the determinant line locus needs c1 = 0")
    if stability_check(e.pres) == "unstable":
        raise LociError("unstable bundle: jumping lines are not a divisor")
    f = e.field
    model = _model(e)
    mats = [
        model.h1_mult(HomPoly.variable(f, VARS_X, i), -2) for i in range(3)
    ]
    det = _symbolic_det(f, mats, VARS_L)
    if det.is_zero():
        raise LociError("all lines jumping (non-semistable or degenerate input)")
    out = LocusPolynomial(VARS_L, det, "determinant")
    if out.degree != e.c2:
        raise LociError(f"line locus has degree {out.degree}, expected {e.c2}")
    e.extra["_j1"] = out
    return out


def j2_det_cm1(e: BundleFamily) -> LocusPolynomial:
    """The jumping-conic polynomial for c1 = -1: the determinant of
    multiplication by the conic form H^1(E(-2)) -> H^1(E), degree c2 - 1."""
    if "_j2det" in e.extra:
        return e.extra["_j2det"]
    if e.c1 != -1:
        raise LociError("the determinant conic locus needs c1 = -1")
    if stability_check(e.pres) != "stable":
        raise LociError("the determinant conic locus needs a stable bundle")
    f = e.field
    model = _model(e)
    mats = model.xi_mult_mats(-2)
    det = _symbolic_det(f, mats, VARS_XI)
    if det.is_zero():
        raise LociError("conic determinant vanishes identically")
    out = LocusPolynomial(VARS_XI, det, "determinant")
    if out.degree != e.c2 - 1:
        raise LociError(f"conic locus has degree {out.degree}, expected {e.c2 - 1}")
    e.extra["_j2det"] = out
    return out


def second_kind_curve(e: BundleFamily) -> LocusPolynomial:
    """Restriction of the conic locus to double lines: substitute the square
    of a linear form; a curve of degree 2(c2-1) in line coordinates."""
    jd = j2_det_cm1(e)
    f = e.field
    l = [HomPoly.variable(f, VARS_L, i) for i in range(3)]
    two = f.normalize(2)
    images = [
        l[0] * l[0],
        (l[0] * l[1]).scale(two),
        (l[0] * l[2]).scale(two),
        l[1] * l[1],
        (l[1] * l[2]).scale(two),
        l[2] * l[2],
    ]
    sub = jd.poly.substitute(VARS_L, images)
    if sub.is_zero():
        raise LociError("second-kind curve degenerates to zero")
    return LocusPolynomial(VARS_L, sub, "determinant")


def jlines_cm1(e: BundleFamily):
    """All rational jumping lines of a stable bundle with c1 = -1.

    Detected as rank drops of the c2 x (c2-1) pencil of multiplication
    models; for c2 = 2 the two linear minors are solved exactly, for larger
    c2 the rational solutions are found by elimination and root scans.
    Each candidate is confirmed by its splitting.
    """
    if e.c1 != -1:
        raise LociError("finite jumping-line lists need c1 = -1")
    if stability_check(e.pres) != "stable":
        raise LociError("jumping-line lists need a stable bundle")
    f = e.field
    model = _model(e)
    mats = [model.h1_mult(HomPoly.variable(f, VARS_X, i), -2) for i in range(3)]
    nrows = len(mats[0])
    ncols = len(mats[0][0]) if nrows else 0
    if ncols == 0:
        raise LociError("degenerate model")
    if ncols == 1 and nrows == 2:
        # two linear equations in the line coordinates
        rows = [[mats[v][r][0] for v in range(3)] for r in range(nrows)]
        rank, kernel = scalar_rank_kernel(f, rows)
        if rank < 2:
            raise LociError("non-generic: jumping lines form a curve")
        lines = [tuple(kernel[0])]
    else:
        lines = _jlines_by_elimination(f, mats, nrows, ncols)
    for l in lines:
        if not line_is_jumping(e, l):
            raise LociError(f"candidate line {l} fails its splitting check")
    return sorted(lines)


def _jlines_by_elimination(f, mats, nrows, ncols):
    if not isinstance(f, PrimeField):
        raise LociError("line scans need a prime field")
    entries = []
    for r in range(nrows):
        row = []
        for c in range(ncols):
            coeffs = {}
            for v in range(3):
                val = mats[v][r][c]
                if not f.is_zero(val):
                    exp = [0, 0, 0]
                    exp[v] = 1
                    coeffs[tuple(exp)] = val
            row.append(HomPoly(f, VARS_L, 1, coeffs))
        entries.append(row)
    import itertools

    minors = []
    for rowset in itertools.combinations(range(nrows), ncols):
        sub = ExactMatrix(f, [entries[r] for r in rowset])
        d = sub.det()
        if not d.is_zero():
            minors.append(d)
    if len(minors) < 2:
        raise LociError("non-generic: jumping lines form a curve")
    # eliminate the last coordinate between two minors, then scan the rest
    res = _resultant_l2(f, minors[0], minors[1])
    if res is None or res.is_zero():
        raise LociError("non-generic: jumping lines form a curve")
    u = UniPoly(f, _binary_coeff_list(f, res))
    heads = [(f.one, f.normalize(r)) for r in u.roots_fp()]
    if f.is_zero(u.coeffs[-1] if u.coeffs else f.one):
        heads.append((f.zero, f.one))
    candidates = set()
    for l0, l1 in heads:
        uni = _restrict_l2(f, minors[0], l0, l1)
        scan = uni.roots_fp() if not uni.is_zero() else range(f.p)
        for l2 in scan:
            cand = (l0, l1, f.normalize(l2))
            if all(f.is_zero(m.evaluate(list(cand))) for m in minors):
                candidates.add(_norm_proj(f, cand))
    lines = set()
    for cand in candidates:
        rows = [
            [
                sum((f.mul(cand[v], mats[v][r][c]) for v in range(3)), f.zero)
                for c in range(ncols)
            ]
            for r in range(nrows)
        ]
        rank, _ = scalar_rank_kernel(f, rows)
        if rank < ncols:
            lines.add(cand)
    return sorted(lines)


def _norm_proj(f, vec):
    lead = next(v for v in vec if not f.is_zero(v))
    inv = f.inv(lead)
    return tuple(f.mul(v, inv) for v in vec)


def _binary_coeff_list(f, form: HomPoly):
    out = [f.zero] * (form.degree + 1)
    for (e0, e1, e2), c in form.coeffs.items():
        if e2 != 0:
            raise LociError("not a binary form in l0, l1")
        out[e1] = c
    return out


def _resultant_l2(f, a: HomPoly, b: HomPoly):
    """Resultant of two forms in (l0,l1,l2) with respect to l2."""
    from .algebra.interp import binary_resultant

    def coeffs_in_l2(p):
        d = p.degree
        by_pow = {}
        for (e0, e1, e2), c in p.coeffs.items():
            by_pow.setdefault(e2, {})[(e0, e1, 0)] = c
        return d, by_pow

    from .algebra.interp import binary_resultant as bres

    da_all, ca = coeffs_in_l2(a)
    db_all, cb = coeffs_in_l2(b)
    da, db = max(ca), max(cb)
    if da == 0 or db == 0:
        return None
    # interpolate the eliminant as a binary form; overshoot the degree bound
    deg = a.degree * db + b.degree * da
    pts = []
    vals = []
    for i in range(2 * deg + 8):
        l0, l1 = f.normalize(i + 1), f.one
        au = _restrict_l2(f, a, l0, l1)
        bu = _restrict_l2(f, b, l0, l1)
        if au.is_zero() or bu.is_zero() or au.degree != da or bu.degree != db:
            continue
        r = bres(f, list(reversed(au.coeffs)), list(reversed(bu.coeffs)))
        pts.append((l0, l1))
        vals.append(r)
        if len(pts) >= deg + 2:
            break
    if len(pts) < deg + 1:
        return None
    rows = []
    for l0, l1 in pts:
        row = []
        for j in range(deg + 1):
            v = f.one
            for _ in range(deg - j):
                v = f.mul(v, l0)
            for _ in range(j):
                v = f.mul(v, l1)
            row.append(v)
        rows.append(row)
    sol = scalar_solve(f, rows, [vals])
    if sol is None:
        return None
    coeffs = {}
    for j, c in enumerate(sol[0]):
        coeffs[(deg - j, j, 0)] = c
    return HomPoly(f, VARS_L, deg, coeffs)


def _restrict_l2(f, p: HomPoly, l0, l1) -> UniPoly:
    """p(l0, l1, t) as a univariate polynomial in t."""
    acc = UniPoly(f, [])
    for (e0, e1, e2), c in p.coeffs.items():
        v = c
        for _ in range(e0):
            v = f.mul(v, l0)
        for _ in range(e1):
            v = f.mul(v, l1)
        acc = acc + UniPoly.monomial(f, v, e2)
    return acc


# ---------------------------------------------------------------------------
# the symmetric-square membership model and interpolated conic loci (c1 = 0)
# ---------------------------------------------------------------------------

class AlphaModel:
    """Fast membership test for jumping conics of a c1 = 0 bundle via the
    symmetric square: a conic jumps exactly when the multiplication model
    H^1(S^2 E(-2)) -> H^1(S^2 E) fails to be surjective at it."""

    def __init__(self, e: BundleFamily):
        if e.c1 != 0:
            raise LociError("the symmetric-square membership test needs c1 = 0")
        self.family = e
        self.field = e.field
        res = sym2_resolution(e.pres)
        self.model = P2Cohomology(res)
        self.mats = self.model.xi_mult_mats(-2)
        self.target_dim = self.model.h1(0)
        self.source_dim = self.model.h1(-2)

    def matrix_at(self, xi6):
        f = self.field
        rows = []
        for r in range(self.target_dim):
            row = []
            for c in range(self.source_dim):
                row.append(
                    sum(
                        (f.mul(f.normalize(xi6[v]), self.mats[v][r][c]) for v in range(6)),
                        f.zero,
                    )
                )
            rows.append(row)
        return rows

    def corank_at(self, xi6) -> int:
        rows = self.matrix_at(xi6)
        rank, _ = scalar_rank_kernel(self.field, rows)
        return self.target_dim - rank

    def is_jumping(self, xi6) -> bool:
        return self.corank_at(xi6) > 0


def _alpha(e: BundleFamily) -> AlphaModel:
    if "_alpha" not in e.extra:
        e.extra["_alpha"] = AlphaModel(e)
    return e.extra["_alpha"]


def sample_jumping_conics(e: BundleFamily, target: int, seed: int, cross_check=True):
    """Jumping conics of a c1 = 0 bundle, sampled along random pencils.

    Scans each pencil by interpolating minors of the membership model,
    verifies every candidate by an exact corank computation, and (by
    default) checks smooth samples against the splitting test.
    """
    f = e.field
    if not isinstance(f, PrimeField):
        raise LociError("sampling needs a prime field")
    alpha = _alpha(e)
    points = {}
    attempts = 0
    pencil_idx = 0
    checked_smooth = 0
    while len(points) < target:
        pencil_idx += 1
        attempts += 1
        if attempts > 400 + 20 * target:
            raise LociError(
                f"sampling exhausted after {attempts} pencils with {len(points)} points"
            )
        rng = rng_stream(seed, "jconic-pencil", pencil_idx)
        xi_a = tuple(f.rand(rng) for _ in range(6))
        xi_b = tuple(f.rand(rng) for _ in range(6))
        if all(f.is_zero(v) for v in xi_a) or all(f.is_zero(v) for v in xi_b):
            continue
        mat_a = alpha.matrix_at(xi_a)
        mat_b = alpha.matrix_at(xi_b)
        candidates = _pencil_rank_drops(f, mat_a, mat_b, alpha.target_dim, rng)
        if candidates is None:
            continue
        for t in candidates:
            xi = tuple(f.add(a, f.mul(t, b)) for a, b in zip(xi_a, xi_b))
            if all(f.is_zero(v) for v in xi):
                continue
            if alpha.corank_at(xi) == 0:
                continue
            cf = ConicForm(f, xi)
            if cross_check and cf.is_smooth() and checked_smooth < 40:
                jumping, _ = jump_size_conic(e, cf)
                if not jumping:
                    raise LociError(
                        "membership model disagrees with the splitting test"
                    )
                checked_smooth += 1
            points[cf.normalized_key()] = cf
            if len(points) >= target:
                break
    return list(points.values())


def _pencil_rank_drops(f, mat_a, mat_b, size, rng):
    """Parameters where a square subminor of A + tB drops rank, or None if
    the pencil looks degenerate."""
    nrows = len(mat_a)
    ncols = len(mat_a[0]) if nrows else 0
    if nrows == 0 or ncols < size:
        return None
    for _ in range(6):
        col_subset = sorted(rng.sample(range(ncols), size))
        det_vals = []
        ts = []
        for i in range(size + 1):
            t = f.normalize(i)
            rows = [
                [
                    f.add(mat_a[r][c], f.mul(t, mat_b[r][c]))
                    for c in col_subset
                ]
                for r in range(size)
            ]
            det_vals.append(scalar_det(f, rows))
            ts.append(t)
        poly = _interp_unipoly(f, ts, det_vals)
        if not poly.is_zero():
            return poly.roots_fp()
    return None


def _interp_unipoly(f, xs, ys) -> UniPoly:
    rows = []
    for x in xs:
        row = []
        v = f.one
        for _ in range(len(xs)):
            row.append(v)
            v = f.mul(v, x)
        rows.append(row)
    sol = scalar_solve(f, rows, [list(ys)])
    if sol is None:
        raise LociError("interpolation failed")
    return UniPoly(f, list(sol[0]))


def fit_j2_c0(e: BundleFamily, seed: int, sample_target: int = None) -> LocusPolynomial:
    """The jumping-conic hypersurface of a c1 = 0 bundle, interpolated
    through sampled jumping conics; degree c2 with a one-dimensional fit."""
    if e.c1 != 0:
        raise LociError("interpolated conic loci are for c1 = 0")
    if stability_check(e.pres) == "unstable":
        raise LociError("jumping conics of unstable bundles are not a divisor")
    f = e.field
    if sample_target is None:
        sample_target = max(60, 3 * len(mono_basis(6, e.c2)))
    pts = sample_jumping_conics(e, sample_target, seed)
    coords = [p.xi for p in pts]
    for d in range(1, e.c2 + 1):
        basis = fit_homogeneous(f, coords, d, vars_=VARS_XI)
        if not basis:
            continue
        if len(basis) != 1:
            raise LociError(
                f"insufficient samples: fit space at degree {d} has dimension {len(basis)}"
            )
        if d != e.c2:
            raise LociError(f"fitted degree {d} differs from the expected {e.c2}")
        out = LocusPolynomial(VARS_XI, basis[0], "interpolated")
        e.extra.setdefault("_fit_j2", {})[seed] = (out, len(coords))
        return out
    raise LociError(f"no vanishing polynomial found through degree {e.c2}")


# ---------------------------------------------------------------------------
# pencil multiplicities
# ---------------------------------------------------------------------------

def pencil_multiplicity(e: BundleFamily, locus: LocusPolynomial, probe: PencilProbe, t0):
    """Intersection order of the locus with the pencil at t0.

    Verifies the lower bound by the jump size at smooth parameters, and for
    determinant loci of c1 = -1 bundles that the orders over the rational
    roots account for the full degree.
    """
    f = e.field
    if locus.variables != VARS_XI:
        raise LociError("pencil probes run in conic coordinates")
    restricted = locus.poly.restrict_pencil(list(probe.xi0.xi), list(probe.xi1.xi))
    if restricted.is_zero():
        raise PencilInLocus("pencil lies inside the locus")
    t0 = f.normalize(t0)
    if not f.is_zero(restricted.evaluate(t0)):
        return 0
    order = ord_at(restricted, t0)
    cf = probe.conic_at(t0)
    jumping, a = jump_size_conic(e, cf)
    probe.samples[t0] = {"order": order, "jumping": jumping, "jump_size": a}
    if jumping and a is not None and order < a:
        raise LociError(
            f"intersection order {order} below the jump size {a} at t = {t0}"
        )
    if e.c1 == -1 and locus.provenance == "determinant":
        if isinstance(f, PrimeField):
            total = sum(restricted.ord_at(f.normalize(r)) for r in restricted.roots_fp())
            if total != locus.degree:
                raise LociError(
                    "rational roots do not account for the full locus degree"
                )
    return order


def pencil_report(e: BundleFamily, locus: LocusPolynomial, probe: PencilProbe, t0):
    order = pencil_multiplicity(e, locus, probe, t0)
    data = dict(probe.samples[e.field.normalize(t0)])
    data["order"] = order
    return data


# ---------------------------------------------------------------------------
# the (0,2) family: wedge predicates and Schubert data
# ---------------------------------------------------------------------------

class Type02Predicates:
    def __init__(self, e: BundleFamily):
        if e.tag != TYPE02:
            raise LociError("these predicates need a (0,2) family")
        self.family = e
        self.field = e.field
        self.f_rows = e.extra["f"]  # 4x2 matrix of linear forms

    def _f_columns_at(self, pt):
        f = self.field
        return [
            [self.f_rows[i][j].evaluate(pt) for i in range(4)] for j in range(2)
        ]

    def wedge_value(self, p, q):
        f = self.field
        rows_p = self._f_columns_at(p)
        rows_q = self._f_columns_at(q)
        mat = [
            [rows_p[0][i], rows_p[1][i], rows_q[0][i], rows_q[1][i]]
            for i in range(4)
        ]
        return scalar_det(f, mat)

    def line_test(self, p, q) -> bool:
        f = self.field
        rank, _ = scalar_rank_kernel(f, [list(p), list(q)])
        if rank != 2:
            raise LociError("the wedge test needs two distinct points")
        return f.is_zero(self.wedge_value(p, q))

    def conic_eq(self, u, v) -> ConicForm:
        """The jumping conic cut out by a pencil of sections: the quadric
        det[u, v, f1(x), f2(x)]."""
        f = self.field
        vars_ = VARS_X
        entries = []
        for i in range(4):
            entries.append(
                [
                    HomPoly.constant(f, vars_, u[i]),
                    HomPoly.constant(f, vars_, v[i]),
                    self.f_rows[i][0],
                    self.f_rows[i][1],
                ]
            )
        quad = ExactMatrix(f, entries).det()
        if quad.is_zero():
            raise LociError("degenerate section pencil")
        return ConicForm.from_poly(quad)

    def j1_conic(self, seed: int = 17) -> LocusPolynomial:
        """The degree-2 line locus interpolated against the wedge test."""
        f = self.field
        samples = {}
        idx = 0
        while len(samples) < 14:
            idx += 1
            if idx > 400:
                raise LociError("could not sample enough jumping lines")
            rng = rng_stream(seed, "wedge-pencil", idx)
            la = random_line(f, rng)
            lb = random_line(f, rng)
            for t in self._wedge_pencil_roots(la, lb):
                l = tuple(f.add(a, f.mul(t, b)) for a, b in zip(la, lb))
                if all(f.is_zero(v) for v in l):
                    continue
                try:
                    p, q = two_points_on_line(f, l)
                except SheafError:
                    continue
                if self.line_test(p, q):
                    samples[_norm_proj(f, l)] = l
        basis = fit_homogeneous(f, list(samples.values()), 2, vars_=VARS_L)
        if len(basis) != 1:
            raise LociError("wedge-line interpolation was not one-dimensional")
        return LocusPolynomial(VARS_L, basis[0], "interpolated")

    def _wedge_pencil_roots(self, la, lb):
        f = self.field
        # canonical points on the moving line, polynomial in the parameter
        e_list = [
            (f.one, f.zero, f.zero),
            (f.zero, f.one, f.zero),
            (f.zero, f.zero, f.one),
        ]
        for ea, eb in ((e_list[0], e_list[1]), (e_list[0], e_list[2]), (e_list[1], e_list[2])):
            ts, vals = [], []
            for i in range(10):
                t = f.normalize(i)
                l = tuple(f.add(a, f.mul(t, b)) for a, b in zip(la, lb))
                p = cross(f, l, ea)
                q = cross(f, l, eb)
                if all(f.is_zero(c) for c in p) or all(f.is_zero(c) for c in q):
                    break
                ts.append(t)
                vals.append(self.wedge_value(p, q))
            else:
                poly = _interp_unipoly(f, ts, vals)
                if poly.is_zero():
                    continue
                return poly.roots_fp()
        return []

    def section_zero_length(self, w) -> int:
        """Length of the zero scheme of the section attached to w (the
        second Schubert-cycle integral)."""
        f = self.field
        import itertools

        vars_ = VARS_X
        mat_cols = [
            [HomPoly.constant(f, vars_, w[i]) for i in range(4)],
            [self.f_rows[i][0] for i in range(4)],
            [self.f_rows[i][1] for i in range(4)],
        ]
        gens = []
        for rows in itertools.combinations(range(4), 3):
            entries = [[mat_cols[c][r] for c in range(3)] for r in rows]
            d = ExactMatrix(f, entries).det()
            if not d.is_zero():
                gens.append(d)
        return scheme_length(f, gens, vars_)

    def plane_cycle_length(self, eta) -> int:
        """Length of the preimage of the cycle of lines inside a hyperplane
        of sections (the third Schubert-cycle integral)."""
        f = self.field
        vars_ = VARS_X
        eta_f1 = HomPoly.zero(f, vars_, 1)
        eta_f2 = HomPoly.zero(f, vars_, 1)
        for i in range(4):
            eta_f1 = eta_f1 + self.f_rows[i][0].scale(eta[i])
            eta_f2 = eta_f2 + self.f_rows[i][1].scale(eta[i])
        gens = []
        for i in range(4):
            g = self.f_rows[i][1] * eta_f1 - self.f_rows[i][0] * eta_f2
            if not g.is_zero():
                gens.append(g)
        return scheme_length(f, gens, vars_)


def type02_predicates(e: BundleFamily) -> Type02Predicates:
    return Type02Predicates(e)


# ---------------------------------------------------------------------------
# the (0,3) general family: ramification geometry
# ---------------------------------------------------------------------------

class Type03Geometry:
    def __init__(self, e: BundleFamily):
        if e.tag != TYPE03G:
            raise LociError("ramification geometry needs a general (0,3) family")
        self.family = e
        self.field = e.field
        self.quadrics = e.extra["quadrics"]
        self.jacobian = e.extra["jacobian"]

    def ram_cubic(self) -> LocusPolynomial:
        det = ExactMatrix(self.field, [list(r) for r in self.jacobian]).det()
        if det.is_zero():
            raise LociError("degenerate branching data")
        return LocusPolynomial(VARS_X, det, "determinant")

    def jline_from_ram(self, p):
        """The jumping line attached to a smooth point of the branch curve:
        the line through p in the kernel direction of the differential."""
        f = self.field
        val = [[entry.evaluate(p) for entry in row] for row in self.jacobian]
        rank, kernel = scalar_rank_kernel(f, val)
        if rank != 2:
            raise LociError("rank of the differential is not 1 at this point")
        w = kernel[0]
        l = cross(f, p, w)
        if all(f.is_zero(c) for c in l):
            raise LociError("kernel direction coincides with the point")
        return _norm_proj(f, l)

    def sample_ram_points(self, count: int, seed: int):
        """Rational points of the branch cubic where the differential has
        rank 2, sampled on random pencils."""
        f = self.field
        cubic = self.ram_cubic()
        pts = {}
        idx = 0
        while len(pts) < count:
            idx += 1
            if idx > 200 * (count // 10 + 1):
                raise LociError("could not sample the branch curve")
            rng = rng_stream(seed, "ram-pencil", idx)
            base = random_point(f, rng)
            direction = random_point(f, rng)
            uni = cubic.poly.restrict_pencil(list(base), list(direction))
            if uni.is_zero():
                continue
            for r in uni.roots_fp():
                pt = tuple(
                    f.add(b, f.mul(f.normalize(r), d)) for b, d in zip(base, direction)
                )
                if all(f.is_zero(c) for c in pt):
                    continue
                val = [[entry.evaluate(pt) for entry in row] for row in self.jacobian]
                rank, _ = scalar_rank_kernel(f, val)
                if rank == 2:
                    pts[_norm_proj(f, pt)] = pt
                if len(pts) >= count:
                    break
        return list(pts.values())

    def section_span_solve(self, xi: ConicForm):
        """Express the conic form in the span of the defining quadrics, if
        possible: the witness that the conic is a wedge of two sections."""
        f = self.field
        rows = [[q.coeff_vector(2)[m] for q in self.quadrics] for m in range(6)]
        target = [xi.poly().coeff_vector(2)]
        cols = [[rows[m][j] for m in range(6)] for j in range(3)]
        sol = scalar_solve(f, rows, [target[0]])
        if sol is None:
            return None
        return tuple(sol[0])

    def classify(self, xi: ConicForm):
        """Classification of a smooth conic by the splitting of the twisted
        restriction: generic (case 3), jump one (case 4), or a wedge conic
        of jump two (case 5, with a section-pair witness)."""
        if not xi.is_smooth():
            raise LociError("classification expects a smooth conic")
        parts = conic_splitting(self.family, xi).twist(2).parts
        a = (parts[0] - parts[1]) // 2
        if a == 0:
            return {"case": 3, "jump_size": 0, "splitting": parts}
        if a == 1:
            return {"case": 4, "jump_size": 1, "splitting": parts}
        w = self.section_span_solve(xi)
        if w is None:
            raise LociError("jump-two conic without a section-pair witness")
        f = self.field
        _, kernel = scalar_rank_kernel(f, [list(w)])
        u, v = kernel[0], kernel[1]
        return {
            "case": 5,
            "jump_size": a,
            "splitting": parts,
            "witness": {"w": w, "u": u, "v": v},
        }

    def line_case(self, l):
        parts = line_splitting(self.family, l).twist(1).parts
        return {"case": 1 if parts[0] == 1 else 2, "splitting": parts}


def type03_geometry(e: BundleFamily) -> Type03Geometry:
    return Type03Geometry(e)


# ---------------------------------------------------------------------------
# modification families: kernel-line tests on conics
# ---------------------------------------------------------------------------

def _pair_embed(field, form: HomPoly, which: int) -> HomPoly:
    """A binary form in (s,t) as a form in the pair variables."""
    coeffs = {}
    for (es, et), c in form.coeffs.items():
        exp = [0, 0, 0, 0]
        exp[2 * which] = es
        exp[2 * which + 1] = et
        coeffs[tuple(exp)] = c
    return HomPoly(field, VARS_PAIR, form.degree, coeffs)


def symmetric_pair_value(field, sym: HomPoly, quad_coeffs):
    """Evaluate a symmetric pair form at the root pair of a binary quadric.

    sym must be symmetric of equal bidegree d in the two point slots; it is
    rewritten in the elementary-pair forms u = s1 s2, v = s1 t2 + t1 s2,
    w = t1 t2 and evaluated at (q2, -q1, q0) for quad = q0 s^2 + q1 st + q2 t^2.
    """
    if sym.is_zero():
        return field.zero
    d2 = sym.degree
    if d2 % 2:
        raise LociError("pair form has odd total degree")
    d = d2 // 2
    uvw = []
    s1 = HomPoly.variable(field, VARS_PAIR, 0)
    t1 = HomPoly.variable(field, VARS_PAIR, 1)
    s2 = HomPoly.variable(field, VARS_PAIR, 2)
    t2 = HomPoly.variable(field, VARS_PAIR, 3)
    u = s1 * s2
    v = s1 * t2 + t1 * s2
    w = t1 * t2
    monos = mono_basis(3, d)
    cols = []
    for (eu, ev, ew) in monos:
        term = HomPoly.constant(field, VARS_PAIR, field.one)
        for _ in range(eu):
            term = term * u
        for _ in range(ev):
            term = term * v
        for _ in range(ew):
            term = term * w
        cols.append(term)
    ambient = sorted({m for c in cols for m in c.coeffs} | set(sym.coeffs))
    amb_idx = {m: i for i, m in enumerate(ambient)}
    rows = [[field.zero] * len(cols) for _ in ambient]
    for j, col in enumerate(cols):
        for m, c in col.coeffs.items():
            rows[amb_idx[m]][j] = c
    target = [field.zero] * len(ambient)
    for m, c in sym.coeffs.items():
        target[amb_idx[m]] = c
    sol = scalar_solve(field, rows, [target])
    if sol is None:
        raise LociError("pair form is not symmetric")
    q0, q1, q2 = quad_coeffs
    value = field.zero
    for (eu, ev, ew), c in zip(monos, sol[0]):
        term = c
        for _ in range(eu):
            term = field.mul(term, q2)
        for _ in range(ev):
            term = field.mul(term, field.neg(q1))
        for _ in range(ew):
            term = field.mul(term, q0)
        value = field.add(value, term)
    return value


def _kernel_rows_on_conic(e: BundleFamily, param):
    """The two functional rows lambda_b(s,t) used by the kernel-line test."""
    f = e.field
    if e.tag == TYPEM12:
        psi = e.extra["psi"]
        return [p.substitute(VARS_ST, list(param)) for p in psi], None
    if e.tag != TYPE03NG:
        raise LociError("kernel-line tests exist for the modification families")
    # sections of the restricted twisted tangent bundle via the pulled-back
    # Euler presentation
    x = [HomPoly.variable(f, VARS_X, i) for i in range(3)]
    euler = Presentation.coker(
        f, P2, (0,), (1, 1, 1), ((x[0],), (x[1],), (x[2],))
    )
    pulled = euler.pullback(param).twist(-3)
    sections = P1Sections(pulled, 0)
    if sections.dim != 2:
        raise LociError("restricted tangent sections have unexpected dimension")
    return sections, pulled


def modification_conic_tests(e: BundleFamily, xi: ConicForm) -> bool:
    """The kernel-line test for the modification families on a smooth conic:
    transverse intersections compare the kernels at the two points, a
    tangency compares the kernel with its first-order deformation.  Both
    cases are evaluated through one symmetric reduction, so conjugate
    intersection points need no field extension."""
    f = e.field
    if e.tag not in (TYPEM12, TYPE03NG):
        raise LociError("kernel-line tests exist for the modification families")
    if not xi.is_smooth():
        raise LociError("the kernel-line test expects a smooth conic")
    l = e.extra["line"]
    param = xi.param if xi.param is not None else xi.parameterize()
    quad = l.substitute(VARS_ST, list(param))
    if quad.is_zero():
        raise LociError("the modification line lies on the conic")
    qc = [f.zero] * 3
    for (_, et), c in quad.coeffs.items():
        qc[et] = c

    if e.tag == TYPEM12:
        lam, _ = _kernel_rows_on_conic(e, param)
        rows = lam
    else:
        sections, pulled = _kernel_rows_on_conic(e, param)
        # eta coprime to the intersection points
        eta = _eta_coprime(f, sections.e, qc)
        lifts = sections.lift_vectors(eta)
        psit = e.extra["psi_tilde"]
        psit_c = [p.substitute(VARS_ST, list(param)) for p in psit]
        rows = []
        for lift in lifts:
            acc = HomPoly.zero(f, VARS_ST)
            for i in range(3):
                acc = acc + psit_c[i] * lift[i]
            rows.append(acc)
    d1 = _pair_embed(f, rows[0], 0) * _pair_embed(f, rows[1], 1)
    d2 = _pair_embed(f, rows[1], 0) * _pair_embed(f, rows[0], 1)
    dmat = d1 - d2
    if dmat.is_zero():
        return True
    delta = HomPoly(
        f,
        VARS_PAIR,
        2,
        {(1, 0, 0, 1): f.one, (0, 1, 1, 0): f.neg(f.one)},
    )
    sym = dmat.divide_exact(delta)
    value = symmetric_pair_value(f, sym, qc)
    return f.is_zero(value)


def _eta_coprime(f, e_deg, qc):
    if e_deg == 0:
        return HomPoly.constant(f, VARS_ST, f.one)
    s = HomPoly.variable(f, VARS_ST, 0)
    t = HomPoly.variable(f, VARS_ST, 1)
    # mu = t has root (1,0); mu = s has root (0,1); mu = s - c*t has root (c,1)
    if not f.is_zero(qc[0]):
        mu = t
    elif not f.is_zero(qc[2]):
        mu = s
    else:
        q_rev = UniPoly(f, [qc[2], qc[1], qc[0]])  # value at (c,1)
        c = f.one
        while f.is_zero(q_rev.evaluate(c)):
            c = f.add(c, f.one)
        mu = s - t.scale(c)
    out = HomPoly.constant(f, VARS_ST, f.one)
    for _ in range(e_deg):
        out = out * mu
    return out


def m12_hyperplane_coeffs(e: BundleFamily):
    """The closed-form coefficients (a00, a01, a11) of the conic-locus
    hyperplane of a (-1,2) modification, in terms of the pair of quadrics
    restricted to the modification line x2 = 0."""
    if e.tag != TYPEM12:
        raise LociError("hyperplane coefficients are for the (-1,2) family")
    f = e.field
    psi = e.extra["psi"]

    def coeff(p, i, j):
        exp = [0, 0, 0]
        exp[i] += 1
        exp[j] += 1
        return p.coeffs.get(tuple(exp), f.zero)

    p100, p101, p111 = coeff(psi[0], 0, 0), coeff(psi[0], 0, 1), coeff(psi[0], 1, 1)
    p200, p201, p211 = coeff(psi[1], 0, 0), coeff(psi[1], 0, 1), coeff(psi[1], 1, 1)
    a00 = f.sub(f.mul(p101, p211), f.mul(p111, p201))
    a01 = f.sub(f.mul(p111, p200), f.mul(p100, p211))
    a11 = f.sub(f.mul(p100, p201), f.mul(p101, p200))
    return a00, a01, a11


def curve_singular_points(locus: LocusPolynomial):
    """Rational singular points of a plane curve in line coordinates, with
    the stabilized length of its singular scheme as a completeness
    certificate (the length bounds the number of singular points over the
    closure, counted with their Jacobian multiplicities)."""
    f = locus.poly.field
    if len(locus.variables) != 3:
        raise LociError("singular points are computed for plane curves")
    grads = [locus.poly.diff(i) for i in range(3)]
    grads = [g for g in grads if not g.is_zero()]
    if len(grads) < 2:
        raise LociError("degenerate curve")
    length = scheme_length(f, grads, locus.variables)
    pts = set()
    res = _resultant_l2(f, grads[0], grads[1])
    heads = []
    if res is not None and not res.is_zero():
        u = UniPoly(f, _binary_coeff_list(f, res))
        heads = [(f.one, f.normalize(r)) for r in u.roots_fp()]
        if f.is_zero(u.coeffs[-1] if u.coeffs else f.one):
            heads.append((f.zero, f.one))
    for l0, l1 in heads:
        uni = _restrict_l2(f, grads[0], l0, l1)
        scan = uni.roots_fp() if not uni.is_zero() else []
        if uni.is_zero():
            uni2 = _restrict_l2(f, grads[1], l0, l1)
            scan = uni2.roots_fp() if not uni2.is_zero() else []
        for l2 in scan:
            cand = (l0, l1, f.normalize(l2))
            if all(f.is_zero(g.evaluate(list(cand))) for g in grads):
                pts.add(_norm_proj(f, cand))
    # the heads miss candidates with l0 = l1 = 0
    cand = (f.zero, f.zero, f.one)
    if all(f.is_zero(g.evaluate(list(cand))) for g in grads):
        pts.add(cand)
    return sorted(pts), length


# ---------------------------------------------------------------------------
# sampling statistics (generic splitting checks)
# ---------------------------------------------------------------------------

def splitting_statistics(e: BundleFamily, n: int, seed: int, curve: str = "conic"):
    """Splitting histogram over random smooth conics or random lines."""
    counts = Counter()
    f = e.field
    for i in range(n):
        rng = rng_stream(seed, f"stats-{curve}", i)
        if curve == "conic":
            cf = ConicForm.random_smooth(f, rng)
            st = splitting_of(e.pres.pullback(cf.param))
        else:
            st = line_splitting(e, random_line(f, rng))
        counts[st.parts] += 1
    modal, _ = counts.most_common(1)[0]
    return {"counts": counts, "modal": modal}
