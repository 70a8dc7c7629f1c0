"""Presentations of rank-2 bundles by sums of line bundles, the example
families, restriction to rational curves, and Chern bookkeeping.

A bundle is always given by a finite presentation:

  * coker:  0 -> F1 -> F0 -> E -> 0                (two terms)
  * coker3: 0 -> G2 -> G1 -> G0 -> E -> 0          (right resolution)
  * monad:  A -> B -> C with E the middle cohomology

with every term a sum of twisted line bundles on P^2 or P^1.  All
cohomology then reduces to finite matrices of multiplication maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .algebra.field import FieldError, PrimeField, QQ, field_from_json
from .algebra.poly import (
    HomPoly,
    PolyError,
    UniPoly,
    VARS_ST,
    VARS_X,
    parse_poly,
)
from .algebra.matrix import ExactMatrix, MatrixError, scalar_rank_kernel


class SheafError(ValueError):
    """Invalid presentation or constructor input."""


P2, P1 = "P2", "P1"
COKER, COKER3, MONAD = "coker", "coker3", "monad"

_VALIDATION_SAMPLES = 64


def ambient_vars(ambient):
    return VARS_X if ambient == P2 else VARS_ST


@dataclass(frozen=True)
class TwistList:
    """Twists of the line-bundle summands of one term, in declared order."""

    degrees: tuple
    space: str

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if self.space not in (P2, P1):
            raise SheafError(f"unknown space {self.space!r}")

    def __len__(self):
        return len(self.degrees)

    def twist(self, k):
        return TwistList(tuple(d + k for d in self.degrees), self.space)

    def scale(self, m, space):
        return TwistList(tuple(d * m for d in self.degrees), space)


def _check_map(field, ambient, rows, tgt: TwistList, src: TwistList, name):
    vars_ = ambient_vars(ambient)
    if len(rows) != len(tgt) or any(len(r) != len(src) for r in rows):
        raise SheafError(f"{name}: map shape {len(rows)}x? does not match terms")
    out = []
    for i, row in enumerate(rows):
        new_row = []
        for j, e in enumerate(row):
            if not isinstance(e, HomPoly):
                raise SheafError(f"{name}: entry ({i},{j}) is not a polynomial")
            if e.field != field or e.vars != vars_:
                raise SheafError(f"{name}: entry ({i},{j}) is in the wrong ring")
            want = tgt.degrees[i] - src.degrees[j]
            if not e.is_zero() and e.degree != want:
                raise SheafError(
                    f"{name}: entry ({i},{j}) has degree {e.degree}, template needs {want}"
                )
            new_row.append(e)
        out.append(tuple(new_row))
    return tuple(out)


def _compose(field, ambient, m_later, m_first, tgt, mid, src):
    """Matrix product of polynomial maps (entries of m_later . m_first)."""
    vars_ = ambient_vars(ambient)
    rows = []
    for i in range(len(tgt)):
        row = []
        for j in range(len(src)):
            acc = HomPoly.zero(field, vars_, tgt.degrees[i] - src.degrees[j])
            for k in range(len(mid)):
                term = m_later[i][k] * m_first[k][j]
                if term.is_zero():
                    continue
                acc = acc + term
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


class Presentation:
    """A bounded complex of sums of line bundles presenting a bundle."""

    __slots__ = ("field", "ambient", "kind", "terms", "maps")

    def __init__(self, field, ambient, kind, terms, maps):
        if ambient not in (P2, P1):
            raise SheafError(f"unknown ambient {ambient!r}")
        if kind not in (COKER, COKER3, MONAD):
            raise SheafError(f"unknown presentation kind {kind!r}")
        self.field = field
        self.ambient = ambient
        self.kind = kind
        self.terms = tuple(terms)
        want_terms = 2 if kind == COKER else 3
        if len(self.terms) != want_terms or len(maps) != want_terms - 1:
            raise SheafError(f"{kind} presentation needs {want_terms} terms")
        for t in self.terms:
            if t.space != ambient:
                raise SheafError("term twists live in the wrong space")
        checked = []
        names = {COKER: ("F1->F0",), COKER3: ("G2->G1", "G1->G0"), MONAD: ("A->B", "B->C")}
        for idx, m in enumerate(maps):
            src, tgt = self.terms[idx], self.terms[idx + 1]
            checked.append(_check_map(field, ambient, m, tgt, src, names[kind][idx]))
        self.maps = tuple(checked)

    # -- convenience constructors ------------------------------------------
    @classmethod
    def coker(cls, field, ambient, f1_twists, f0_twists, rows):
        return cls(
            field,
            ambient,
            COKER,
            (TwistList(tuple(f1_twists), ambient), TwistList(tuple(f0_twists), ambient)),
            (rows,),
        )

    @classmethod
    def monad(cls, field, ambient, a_twists, b_twists, c_twists, m_ab, m_bc):
        return cls(
            field,
            ambient,
            MONAD,
            (
                TwistList(tuple(a_twists), ambient),
                TwistList(tuple(b_twists), ambient),
                TwistList(tuple(c_twists), ambient),
            ),
            (m_ab, m_bc),
        )

    @classmethod
    def line_bundle_sum(cls, field, ambient, degrees):
        """The split bundle O(d1) + ... + O(dr) as a coker with no relations."""
        return cls.coker(field, ambient, (), tuple(degrees), tuple(() for _ in degrees))

    # -- basic invariants ----------------------------------------------------
    @property
    def rank(self):
        sizes = [len(t) for t in self.terms]
        if self.kind == COKER:
            return sizes[1] - sizes[0]
        if self.kind == COKER3:
            return sizes[2] - sizes[1] + sizes[0]
        return sizes[1] - sizes[0] - sizes[2]

    def term_signs(self):
        """(TwistList, sign) pairs for additive invariants."""
        if self.kind == COKER:
            return ((self.terms[1], 1), (self.terms[0], -1))
        if self.kind == COKER3:
            return ((self.terms[2], 1), (self.terms[1], -1), (self.terms[0], 1))
        return ((self.terms[1], 1), (self.terms[0], -1), (self.terms[2], -1))

    def twist(self, k: int) -> "Presentation":
        if k == 0:
            return self
        return Presentation(
            self.field,
            self.ambient,
            self.kind,
            tuple(t.twist(k) for t in self.terms),
            self.maps,
        )

    def substitute_coords(self, a_rows) -> "Presentation":
        """Apply the linear change of coordinates x -> A*x to all entries."""
        vars_ = ambient_vars(self.ambient)
        f = self.field
        images = []
        for i in range(len(vars_)):
            images.append(
                HomPoly.linear_form(f, vars_, [a_rows[i][j] for j in range(len(vars_))])
            )
        new_maps = []
        for m in self.maps:
            new_maps.append(
                tuple(tuple(e.substitute(vars_, images) for e in row) for row in m)
            )
        return Presentation(f, self.ambient, self.kind, self.terms, tuple(new_maps))

    # -- restriction to rational curves ---------------------------------------
    def pullback(self, g) -> "Presentation":
        """Restrict along a parameterized line or conic g: P^1 -> P^2.

        g is a triple of binary forms of common degree 1 or 2; twists scale
        by that degree.
        """
        if self.ambient != P2:
            raise SheafError("pullback is defined for presentations on P2")
        g = tuple(g)
        if len(g) != 3:
            raise SheafError("parameterization needs three components")
        degs = {h.degree for h in g if not h.is_zero()}
        if len(degs) != 1 or degs.pop() not in (1, 2):
            raise SheafError("parameterization must have common degree 1 or 2")
        gdeg = next(h.degree for h in g if not h.is_zero())
        coeff_rows = [h.coeff_vector(gdeg) for h in g]
        rank, _ = scalar_rank_kernel(self.field, coeff_rows)
        if rank < 2:
            raise SheafError("parameterization factors through a point")
        new_terms = tuple(t.scale(gdeg, P1) for t in self.terms)
        new_maps = []
        for m in self.maps:
            new_maps.append(
                tuple(tuple(e.substitute(VARS_ST, g) for e in row) for row in m)
            )
        return Presentation(self.field, P1, self.kind, new_terms, tuple(new_maps))

    # -- validation -------------------------------------------------------------
    def validate(self, rng) -> None:
        """Exact template/composite checks plus pointwise sampling witnesses."""
        f = self.field
        vars_ = ambient_vars(self.ambient)
        pts = _sample_points(f, len(vars_), rng)
        if self.kind in (COKER3, MONAD):
            comp = _compose(
                f, self.ambient, self.maps[1], self.maps[0],
                self.terms[2], self.terms[1], self.terms[0],
            )
            for row in comp:
                for e in row:
                    if not e.is_zero():
                        raise SheafError("composite of consecutive maps is nonzero")
        if self.kind == COKER:
            self._check_pointwise(self.maps[0], pts, "injective")
        elif self.kind == COKER3:
            self._check_pointwise(self.maps[0], pts, "injective")
            self._check_middle_exact(pts)
        else:
            self._check_pointwise(self.maps[0], pts, "injective")
            self._check_pointwise(self.maps[1], pts, "surjective")

    def _check_pointwise(self, m, pts, mode):
        f = self.field
        ncols = len(m[0]) if m else 0
        nrows = len(m)
        if ncols == 0:
            return
        for pt in pts:
            num = [[e.evaluate(pt) for e in row] for row in m]
            rank, _ = scalar_rank_kernel(f, num)
            if mode == "injective" and rank < ncols:
                raise SheafError(f"not a bundle presentation: rank drop at {pt}")
            if mode == "surjective" and rank < nrows:
                raise SheafError(f"map not pointwise surjective at {pt}")

    def _check_middle_exact(self, pts):
        f = self.field
        m2, m1 = self.maps
        mid = len(self.terms[1])
        for pt in pts:
            n2 = [[e.evaluate(pt) for e in row] for row in m2]
            n1 = [[e.evaluate(pt) for e in row] for row in m1]
            r2, _ = scalar_rank_kernel(f, n2)
            r1, _ = scalar_rank_kernel(f, n1)
            if r2 + r1 != mid:
                raise SheafError(f"three-term complex not exact in the middle at {pt}")

    def __repr__(self):
        shape = " -> ".join(str(list(t.degrees)) for t in self.terms)
        return f"Presentation({self.kind} on {self.ambient}: {shape})"


def _sample_points(field, nvars, rng):
    pts = []
    for i in range(nvars):
        e = [field.zero] * nvars
        e[i] = field.one
        pts.append(tuple(e))
    for _ in range(_VALIDATION_SAMPLES):
        pts.append(tuple(field.rand(rng) for _ in range(nvars)))
    return [p for p in pts if any(not field.is_zero(c) for c in p)]


# ---------------------------------------------------------------------------
# Chern classes and Euler characteristics
# ---------------------------------------------------------------------------

def _series_mul(a, b):
    return (
        a[0] * b[0],
        a[0] * b[1] + a[1] * b[0],
        a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
    )


def _series_inv(a):
    if a[0] != 1:
        raise SheafError("total Chern series must start with 1")
    return (Fraction(1), -a[1], a[1] * a[1] - a[2])


def chern(p: Presentation):
    """(c1, c2) of the presented sheaf, by multiplicativity over the complex."""
    if p.ambient != P2:
        raise SheafError("Chern classes are computed on P2")
    total = (Fraction(1), Fraction(0), Fraction(0))
    for term, sign in p.term_signs():
        for d in term.degrees:
            factor = (Fraction(1), Fraction(d), Fraction(0))
            total = _series_mul(total, factor if sign > 0 else _series_inv(factor))
    c1, c2 = total[1], total[2]
    if c1.denominator != 1 or c2.denominator != 1:
        raise SheafError("non-integral Chern classes")
    return int(c1), int(c2)


def degree_p1(p: Presentation) -> int:
    if p.ambient != P1:
        raise SheafError("degree is for presentations on P1")
    return sum(sign * sum(t.degrees) for t, sign in p.term_signs())


def _chi_line(ambient, d):
    if ambient == P2:
        return (d + 1) * (d + 2) // 2
    return d + 1


def euler_char(p: Presentation, k: int) -> int:
    """chi(E(k)), additive over the line-bundle summands of the complex."""
    chi = 0
    for term, sign in p.term_signs():
        for d in term.degrees:
            chi += sign * _chi_line(p.ambient, d + k)
    if p.ambient == P2 and p.rank == 2:
        c1, c2 = chern(p)
        if c1 == 0:
            closed = (k + 2) * (k + 1) - c2
        elif c1 == -1:
            closed = (k + 2) * (k + 1) - k - 1 - c2
        else:
            closed = None
        if closed is not None and closed != chi:
            raise SheafError(f"Euler characteristic mismatch: {chi} vs closed form {closed}")
    return chi


def normalizing_twist(c1: int) -> int:
    """The twist k with c1 + 2k in {0, -1}."""
    return -((c1 + 1) // 2) if c1 % 2 else -(c1 // 2)


# ---------------------------------------------------------------------------
# symmetric square
# ---------------------------------------------------------------------------

def sym2_resolution(p: Presentation) -> Presentation:
    """Right resolution Lambda^2 F1 -> F1 (x) F0 -> S^2 F0 of S^2 E.

    Requires a two-term coker presentation of a rank-2 bundle.
    """
    if p.kind != COKER or p.rank != 2:
        raise SheafError("symmetric square needs a rank-2 coker presentation")
    f = p.field
    vars_ = ambient_vars(p.ambient)
    f1, f0 = p.terms
    m = p.maps[0]
    n1, n0 = len(f1), len(f0)
    pairs_w = [(j, jj) for j in range(n1) for jj in range(j + 1, n1)]
    pairs_t = [(j, i) for j in range(n1) for i in range(n0)]
    pairs_s = [(i, ii) for i in range(n0) for ii in range(i, n0)]
    g2 = TwistList(tuple(f1.degrees[j] + f1.degrees[jj] for j, jj in pairs_w), p.ambient)
    g1 = TwistList(tuple(f1.degrees[j] + f0.degrees[i] for j, i in pairs_t), p.ambient)
    g0 = TwistList(tuple(f0.degrees[i] + f0.degrees[ii] for i, ii in pairs_s), p.ambient)
    t_index = {pr: a for a, pr in enumerate(pairs_t)}
    s_index = {pr: a for a, pr in enumerate(pairs_s)}

    def zero(deg):
        return HomPoly.zero(f, vars_, deg)

    # m2: e_j ^ e_jj  |->  e_j (x) M(e_jj) - e_jj (x) M(e_j)
    m2 = [[zero(g1.degrees[r] - g2.degrees[c]) for c in range(len(pairs_w))]
          for r in range(len(pairs_t))]
    for c, (j, jj) in enumerate(pairs_w):
        for i in range(n0):
            r = t_index[(j, i)]
            m2[r][c] = m2[r][c] + m[i][jj]
            r = t_index[(jj, i)]
            m2[r][c] = m2[r][c] - m[i][j]
    # m1: e_j (x) e_i  |->  M(e_j) . e_i in the symmetric algebra
    m1 = [[zero(g0.degrees[r] - g1.degrees[c]) for c in range(len(pairs_t))]
          for r in range(len(pairs_s))]
    for c, (j, i) in enumerate(pairs_t):
        for ii in range(n0):
            r = s_index[(min(i, ii), max(i, ii))]
            m1[r][c] = m1[r][c] + m[ii][j]
    res = Presentation(
        f, p.ambient, COKER3, (g2, g1, g0),
        (tuple(tuple(r) for r in m2), tuple(tuple(r) for r in m1)),
    )
    if p.ambient == P2:
        c1, c2 = chern(p)
        sc1, sc2 = chern(res)
        if c1 == 0 and (sc1 != 0 or sc2 != 4 * c2):
            raise SheafError("symmetric square fails its Chern identity")
    return res


# ---------------------------------------------------------------------------
# conics
# ---------------------------------------------------------------------------

XI_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


class ConicForm:
    """A conic on P^2 given by the 6 coefficients of sum xi_ij x_i x_j (i<=j),
    with an optional quadratic parameterization for smooth conics."""

    __slots__ = ("field", "xi", "param")

    def __init__(self, field, xi, param=None):
        self.field = field
        self.xi = tuple(field.normalize(v) for v in xi)
        if len(self.xi) != 6:
            raise SheafError("a conic needs 6 coefficients")
        if all(field.is_zero(v) for v in self.xi):
            raise SheafError("the zero form is not a conic")
        self.param = tuple(param) if param is not None else None
        if self.param is not None:
            self._check_param()

    def _check_param(self):
        g = self.param
        if len(g) != 3 or any(h.vars != VARS_ST or (not h.is_zero() and h.degree != 2) for h in g):
            raise SheafError("parameterization must be three binary quadrics")
        comp = self.poly().substitute(VARS_ST, list(g))
        if not comp.is_zero():
            raise SheafError("parameterization does not satisfy the conic equation")
        rows = [h.coeff_vector(2) for h in g]
        rank, _ = scalar_rank_kernel(self.field, rows)
        if rank < 3:
            raise SheafError("degenerate parameterization")

    def poly(self) -> HomPoly:
        coeffs = {}
        for (i, j), c in zip(XI_PAIRS, self.xi):
            e = [0, 0, 0]
            e[i] += 1
            e[j] += 1
            coeffs[tuple(e)] = c
        return HomPoly(self.field, VARS_X, 2, coeffs)

    def sym_matrix(self):
        """Rows of the symmetric matrix S with x^T S x the conic form."""
        f = self.field
        half = f.div(f.one, f.normalize(2))
        s = [[f.zero] * 3 for _ in range(3)]
        for (i, j), c in zip(XI_PAIRS, self.xi):
            if i == j:
                s[i][i] = c
            else:
                s[i][j] = f.mul(c, half)
                s[j][i] = s[i][j]
        return s

    def det(self):
        from .algebra.matrix import scalar_det

        return scalar_det(self.field, self.sym_matrix())

    def is_smooth(self) -> bool:
        return not self.field.is_zero(self.det())

    def rank(self) -> int:
        rank, _ = scalar_rank_kernel(self.field, self.sym_matrix())
        return rank

    def normalized_key(self):
        f = self.field
        lead = next(v for v in self.xi if not f.is_zero(v))
        inv = f.inv(lead)
        return tuple(f.mul(v, inv) for v in self.xi)

    # -- construction helpers ---------------------------------------------
    @classmethod
    def from_poly(cls, q: HomPoly, param=None):
        if q.vars != VARS_X or q.degree != 2:
            raise SheafError("conic form must be a quadric in x0,x1,x2")
        xi = []
        for i, j in XI_PAIRS:
            e = [0, 0, 0]
            e[i] += 1
            e[j] += 1
            xi.append(q.coeffs.get(tuple(e), q.field.zero))
        return cls(q.field, xi, param)

    @classmethod
    def product_of_lines(cls, field, l1, l2):
        p1 = HomPoly.linear_form(field, VARS_X, list(l1))
        p2 = HomPoly.linear_form(field, VARS_X, list(l2))
        return cls.from_poly(p1 * p2)

    @classmethod
    def veronese(cls, field, l):
        return cls.product_of_lines(field, l, l)

    @classmethod
    def random_smooth(cls, field, rng):
        """A random smooth conic, parameterized by construction as the image
        of (s^2, st, t^2) under a random invertible coordinate change."""
        while True:
            a = [[field.rand(rng) for _ in range(3)] for _ in range(3)]
            try:
                ainv = _invert3(field, a)
            except MatrixError:
                continue
            # standard conic y0 y2 - y1^2 composed with y = A^{-1} x
            y = [HomPoly.linear_form(field, VARS_X, row) for row in ainv]
            q = y[0] * y[2] - y[1] * y[1]
            s = HomPoly.variable(field, VARS_ST, 0)
            t = HomPoly.variable(field, VARS_ST, 1)
            basis = (s * s, s * t, t * t)
            param = tuple(
                _lincomb_poly(field, a[i], basis) for i in range(3)
            )
            return cls.from_poly(q, param)

    def parameterize(self, rng=None):
        """A quadratic parameterization of a smooth conic.

        Over F_p a rational point always exists and is found by scanning;
        over Q a stored parameterization (or a small search) is required.
        """
        if self.param is not None:
            return self.param
        if not self.is_smooth():
            raise SheafError("only smooth conics admit a quadratic parameterization")
        pt = self._rational_point()
        if pt is None:
            raise SheafError("no rational point found on the conic")
        f = self.field
        s_mat = self.sym_matrix()

        def pair(u, v):
            return sum(
                (f.mul(f.mul(u[i], s_mat[i][j]), v[j]) for i in range(3) for j in range(3)),
                f.zero,
            )

        # complete pt to a basis with the unit vectors away from its pivot
        pivot = next(i for i in range(3) if not f.is_zero(pt[i]))
        d1, d2 = (
            tuple(f.one if k == i else f.zero for k in range(3))
            for i in range(3)
            if i != pivot
        )
        # second intersection of the line pt + u*D with the conic:
        #   g = <D,D> pt - 2 <pt,D> D,  D = s*d1 + t*d2
        s = HomPoly.variable(f, VARS_ST, 0)
        t = HomPoly.variable(f, VARS_ST, 1)
        dd = (
            (s * s).scale(pair(d1, d1))
            + (s * t).scale(f.mul(f.normalize(2), pair(d1, d2)))
            + (t * t).scale(pair(d2, d2))
        )
        pd_lin = _lincomb_st(f, [pair(pt, d1), pair(pt, d2)])
        comp = []
        for i in range(3):
            di = _lincomb_st(f, [d1[i], d2[i]])
            comp.append(dd.scale(pt[i]) - pd_lin * di * HomPoly.constant(f, VARS_ST, 2))
        param = tuple(comp)
        self_copy = ConicForm(self.field, self.xi, param)
        return self_copy.param

    def _rational_point(self):
        f = self.field
        q = self.poly()
        # roots on the line x2 = 0 come from a binary quadric
        u = UniPoly(f, [self.xi[0], self.xi[1], self.xi[3]])
        if isinstance(f, PrimeField):
            if not u.is_zero():
                roots = u.roots_fp()
                if roots:
                    return (f.one, f.normalize(roots[0]), f.zero)
            if f.is_zero(self.xi[3]):
                return (f.zero, f.one, f.zero)
            span = range(f.p)
        else:
            span = range(-50, 51)
            for a in span:
                if f.is_zero(q.evaluate([f.one, f.normalize(a), f.zero])):
                    return (f.one, f.normalize(a), f.zero)
            if f.is_zero(self.xi[3]) and not all(
                f.is_zero(v) for v in (self.xi[0], self.xi[1])
            ):
                return (f.zero, f.one, f.zero)
        # solve the quadratic in x2 along points (1, a, x2)
        c22 = self.xi[5]
        for a in span:
            aa = f.normalize(a)
            c_const = q.evaluate([f.one, aa, f.zero])
            c_lin = f.add(self.xi[2], f.mul(self.xi[4], aa))
            if f.is_zero(c22):
                if not f.is_zero(c_lin):
                    x2 = f.div(f.neg(c_const), c_lin)
                    return (f.one, aa, x2)
                continue
            disc = f.sub(f.mul(c_lin, c_lin), f.mul(f.normalize(4), f.mul(c22, c_const)))
            r = f.sqrt(disc)
            if r is not None:
                x2 = f.div(f.sub(r, c_lin), f.mul(f.normalize(2), c22))
                return (f.one, aa, x2)
        return None

    def to_json(self):
        return [self.field.coeff_str(v) for v in self.xi]

    def __repr__(self):
        return f"ConicForm({', '.join(self.field.coeff_str(v) for v in self.xi)})"


def _lincomb_poly(field, coeffs, polys):
    acc = None
    for c, p in zip(coeffs, polys):
        term = p.scale(c)
        acc = term if acc is None else acc + term
    return acc


def _lincomb_st(field, pair):
    return HomPoly.linear_form(field, VARS_ST, list(pair))


def _invert3(field, rows):
    from .algebra.matrix import scalar_det

    det = scalar_det(field, rows)
    if field.is_zero(det):
        raise MatrixError("singular matrix")
    inv_det = field.inv(det)
    cof = [[field.zero] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            sub = [
                [rows[r][c] for c in range(3) if c != j]
                for r in range(3)
                if r != i
            ]
            minor = field.sub(
                field.mul(sub[0][0], sub[1][1]), field.mul(sub[0][1], sub[1][0])
            )
            sign = field.one if (i + j) % 2 == 0 else field.neg(field.one)
            cof[j][i] = field.mul(field.mul(sign, minor), inv_det)
    return cof


# -- small projective geometry helpers --------------------------------------

def cross(field, u, v):
    return (
        field.sub(field.mul(u[1], v[2]), field.mul(u[2], v[1])),
        field.sub(field.mul(u[2], v[0]), field.mul(u[0], v[2])),
        field.sub(field.mul(u[0], v[1]), field.mul(u[1], v[0])),
    )


def two_points_on_line(field, l):
    """Two independent points on the line sum l_i x_i = 0."""
    candidates = []
    basis = [
        (field.one, field.zero, field.zero),
        (field.zero, field.one, field.zero),
        (field.zero, field.zero, field.one),
        (field.one, field.one, field.zero),
        (field.one, field.zero, field.one),
        (field.zero, field.one, field.one),
    ]
    for pt in basis:
        val = sum((field.mul(a, b) for a, b in zip(l, pt)), field.zero)
        if field.is_zero(val):
            candidates.append(pt)
        else:
            # project pt onto the line using any index where l is nonzero
            i = next(k for k in range(3) if not field.is_zero(l[k]))
            if not field.is_zero(pt[i]) and all(
                field.is_zero(pt[k]) for k in range(3) if k != i
            ):
                continue
            moved = list(pt)
            moved[i] = field.div(
                field.neg(sum((field.mul(l[k], pt[k]) for k in range(3) if k != i), field.zero)),
                l[i],
            )
            candidates.append(tuple(moved))
        if len(candidates) >= 2:
            rows = [list(candidates[0]), list(candidates[-1])]
            rank, _ = scalar_rank_kernel(field, rows)
            if rank == 2:
                return candidates[0], candidates[-1]
    raise SheafError(f"could not find two points on line {l}")


def line_param(field, l):
    """A linear parameterization of the line l as a triple of binary forms."""
    p, q = two_points_on_line(field, l)
    return tuple(_lincomb_st(field, [p[i], q[i]]) for i in range(3))


def random_point(field, rng):
    while True:
        pt = tuple(field.rand(rng) for _ in range(3))
        if any(not field.is_zero(c) for c in pt):
            return pt


def random_line(field, rng):
    return random_point(field, rng)


def split_conic(cf: ConicForm):
    """Decompose a singular conic into lines.

    Returns one of
      ("double", l)                    rank 1, the double line,
      ("pair", l1, l2)                 rank 2 with rational components,
      ("conjugate", z, tparam, quad)   rank 2 with conjugate components:
          z is the singular point, tparam a parameterized auxiliary line and
          quad the binary quadric cutting the two intersection points on it.
    """
    f = cf.field
    s = cf.sym_matrix()
    rank, kernel = scalar_rank_kernel(f, s)
    if rank == 3:
        raise SheafError("smooth conics do not split")
    if rank == 1:
        row = next(r for r in s if any(not f.is_zero(v) for v in r))
        return ("double", tuple(row))
    z = kernel[0]
    # an auxiliary line avoiding the singular point
    for cand in (
        (f.one, f.zero, f.zero),
        (f.zero, f.one, f.zero),
        (f.zero, f.zero, f.one),
        (f.one, f.one, f.one),
    ):
        val = sum((f.mul(a, b) for a, b in zip(cand, z)), f.zero)
        if not f.is_zero(val):
            aux = cand
            break
    tparam = line_param(f, aux)
    quad = cf.poly().substitute(VARS_ST, list(tparam))
    coeffs = [f.zero] * 3
    for (_, et), c in quad.coeffs.items():
        coeffs[et] = c
    u = UniPoly(f, coeffs)
    roots = []
    if isinstance(f, PrimeField):
        if not u.is_zero():
            roots = [(f.one, f.normalize(r)) for r in u.roots_fp()]
        if f.is_zero(coeffs[2]):
            roots.append((f.zero, f.one))
    else:
        # rational roots of a rational quadratic, if any
        if not f.is_zero(coeffs[2]):
            disc = f.sub(f.mul(coeffs[1], coeffs[1]), f.mul(f.normalize(4), f.mul(coeffs[2], coeffs[0])))
            r = f.sqrt(disc)
            if r is not None:
                two_a = f.mul(f.normalize(2), coeffs[2])
                roots = [
                    (f.one, f.div(f.sub(r, coeffs[1]), two_a)),
                    (f.one, f.div(f.sub(f.neg(r), coeffs[1]), two_a)),
                ]
        elif not f.is_zero(coeffs[1]):
            roots = [(f.one, f.div(f.neg(coeffs[0]), coeffs[1])), (f.zero, f.one)]
    # a rank-2 conic meets the auxiliary line in two distinct points, so the
    # quadric has either two rational roots or a conjugate pair
    if len(roots) >= 2:
        pts = [tuple(h.evaluate(r) for h in tparam) for r in roots[:2]]
        return ("pair", cross(f, z, pts[0]), cross(f, z, pts[1]))
    return ("conjugate", z, tparam, tuple(coeffs))


# ---------------------------------------------------------------------------
# the example families
# ---------------------------------------------------------------------------

TYPE02, TYPE03G, TYPE03NG, TYPEM12, GENERIC = (
    "type02",
    "type03g",
    "type03ng",
    "m12",
    "generic",
)

_REQUIRED_CHERN = {TYPE02: (0, 2), TYPE03G: (0, 3), TYPE03NG: (0, 3), TYPEM12: (-1, 2)}


@dataclass
class BundleFamily:
    """A validated bundle, normalized so that c1 is 0 or -1.

    pres presents E itself; extra holds family-specific data (the defining
    matrices, and for the modification families the original monad).
    """

    tag: str
    field: object
    pres: Presentation
    c1: int
    c2: int
    extra: dict

    def e1_presentation(self) -> Presentation:
        return self.pres.twist(1)

    def __repr__(self):
        return f"BundleFamily({self.tag}, c=({self.c1},{self.c2}))"


def _rng_for_validation(field):
    import random

    return random.Random(0xC0FFEE)


def make_type02(field, f_rows, rng=None) -> BundleFamily:
    """The (0,2) family: E(1) = coker of a 4x2 matrix of linear forms."""
    rng = rng or _rng_for_validation(field)
    rows = _coerce_rows(field, VARS_X, f_rows, 4, 2)
    e1 = Presentation.coker(field, P2, (-1, -1), (0, 0, 0, 0), rows)
    try:
        e1.validate(rng)
    except SheafError as exc:
        raise SheafError(f"not a bundle presentation: {exc}") from exc
    pres = e1.twist(-1)
    c1, c2 = chern(pres)
    if (c1, c2) != (0, 2):
        raise SheafError(f"wrong Chern classes {(c1, c2)} for a (0,2) bundle")
    from .cohom import h0_h1_p2

    if h0_h1_p2(pres, 0)[0] != 0:
        raise SheafError("unstable input: the bundle has sections")
    # the paper-level dimension count dim W = 4 is built into the shape
    return BundleFamily(TYPE02, field, pres, c1, c2, {"f": rows, "e1": e1})


def make_type03_general(field, quadrics, rng=None) -> BundleFamily:
    """The general (0,3) family: E(1) = coker(O(-2) -> O^3) for a triple of
    quadrics with no common zero."""
    rng = rng or _rng_for_validation(field)
    q = _coerce_vector(field, VARS_X, quadrics, 3, 2)
    jac = tuple(tuple(q[i].diff(j) for j in range(3)) for i in range(3))
    det_f = ExactMatrix(field, [list(r) for r in jac]).det()
    if det_f.is_zero():
        raise SheafError("map not finite: the Jacobian determinant vanishes")
    rows = tuple((q[i],) for i in range(3))
    e1 = Presentation.coker(field, P2, (-2,), (0, 0, 0), rows)
    try:
        e1.validate(rng)
    except SheafError as exc:
        raise SheafError(f"map not finite: common zero of the quadrics ({exc})") from exc
    pres = e1.twist(-1)
    c1, c2 = chern(pres)
    if (c1, c2) != (0, 3):
        raise SheafError(f"wrong Chern classes {(c1, c2)} for a (0,3) bundle")
    _check_general_type(field, q, rng)
    return BundleFamily(
        TYPE03G, field, pres, c1, c2, {"quadrics": q, "jacobian": jac, "e1": e1}
    )


def _check_general_type(field, q, rng):
    """Witness that zero sets of sections have no three collinear points.

    Samples sections, locates their rational zeros (solving f(x) ~ w along
    one component conic of the pencil), and tests collinearity.
    """
    from .algebra.matrix import scalar_det

    checked = 0
    for _ in range(40):
        if checked >= 4:
            break
        w = random_point(field, rng)
        comps = []
        for i in range(3):
            for j in range(i + 1, 3):
                comps.append(q[i].scale(w[j]) - q[j].scale(w[i]))
        comps = [c for c in comps if not c.is_zero()]
        if len(comps) < 2:
            continue
        # parameterized rational curves covering the zero set of comps[0]
        params = []
        try:
            cf = ConicForm.from_poly(comps[0])
        except SheafError:
            continue
        if cf.is_smooth():
            try:
                params.append(cf.parameterize())
            except SheafError:
                continue
        else:
            kind, *rest = split_conic(cf)
            if kind == "double":
                params.append(line_param(field, rest[0]))
            elif kind == "pair":
                params.append(line_param(field, rest[0]))
                params.append(line_param(field, rest[1]))
            else:
                continue
        pts = []
        for par in params:
            test = comps[1].substitute(VARS_ST, list(par))
            if test.is_zero():
                continue
            for r in _binary_roots(field, test):
                pt = tuple(h.evaluate(r) for h in par)
                if all(field.is_zero(c) for c in pt):
                    continue
                if all(field.is_zero(c.evaluate(pt)) for c in comps):
                    pts.append(pt)
        # deduplicate projectively
        uniq = {}
        for pt in pts:
            lead = next(v for v in pt if not field.is_zero(v))
            inv = field.inv(lead)
            uniq[tuple(field.mul(v, inv) for v in pt)] = pt
        pts = list(uniq.values())
        if len(pts) < 3:
            continue
        checked += 1
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                for c in range(b + 1, len(pts)):
                    d = scalar_det(field, [list(pts[a]), list(pts[b]), list(pts[c])])
                    if field.is_zero(d):
                        raise SheafError(
                            "non-general type input: a section has three collinear zeros"
                        )


def _binary_roots(field, form: HomPoly):
    """Rational roots (s,t) of a nonzero binary form."""
    if not isinstance(field, PrimeField):
        raise SheafError("binary root scan needs F_p")
    coeffs = [field.zero] * (form.degree + 1)
    for (es, et), c in form.coeffs.items():
        coeffs[et] = c
    u = UniPoly(field, coeffs)
    roots = [(field.one, field.normalize(r)) for r in u.roots_fp()] if not u.is_zero() else []
    if field.is_zero(coeffs[-1]):
        roots.append((field.zero, field.one))
    return roots


def make_type03_nongeneral(field, line, psi_tilde, rng=None) -> BundleFamily:
    """The non-general (0,3) family, an elementary modification of the
    tangent bundle along a line; presented by an explicit monad and
    converted to a two-term presentation."""
    rng = rng or _rng_for_validation(field)
    l = _coerce_one(field, VARS_X, line, 1)
    psi = _coerce_vector(field, VARS_X, psi_tilde, 3, 3)
    x = [HomPoly.variable(field, VARS_X, i) for i in range(3)]
    total = x[0] * psi[0] + x[1] * psi[1] + x[2] * psi[2]
    try:
        v = total.divide_exact(l).__neg__() if not total.is_zero() else HomPoly.zero(field, VARS_X, 3)
    except PolyError as exc:
        raise SheafError(
            "incompatible lift: sum x_i psi_i is not divisible by the line"
        ) from exc
    lparam = line_param(field, _line_coeffs(field, l))
    restricted = [p.substitute(VARS_ST, list(lparam)) for p in psi]
    if _common_zero_binary(field, [r for r in restricted]):
        raise SheafError("modification map not surjective on the line")
    m_ab = ((v,), (x[0],), (x[1],), (x[2],))
    m_bc = ((l, psi[0], psi[1], psi[2]),)
    e1_monad = Presentation.monad(field, P2, (0,), (3, 1, 1, 1), (4,), m_ab, m_bc)
    e1_monad.validate(rng)
    c1, c2 = chern(e1_monad.twist(-1))
    if (c1, c2) != (0, 3):
        raise SheafError(f"wrong Chern classes {(c1, c2)} for a (0,3) bundle")
    from .cohom import monad_to_coker

    e1 = monad_to_coker(e1_monad)
    pres = e1.twist(-1)
    if chern(pres) != (0, 3):
        raise SheafError("converted presentation has wrong Chern classes")
    return BundleFamily(
        TYPE03NG,
        field,
        pres,
        0,
        3,
        {"line": l, "psi_tilde": psi, "v": v, "monad_e1": e1_monad, "e1": e1},
    )


def make_m12(field, line, psi_pair, rng=None) -> BundleFamily:
    """The (-1,2) family, an elementary modification of the trivial rank-2
    bundle along a line by a pair of quadrics."""
    rng = rng or _rng_for_validation(field)
    l = _coerce_one(field, VARS_X, line, 1)
    psi = _coerce_vector(field, VARS_X, psi_pair, 2, 2)
    lparam = line_param(field, _line_coeffs(field, l))
    restricted = [p.substitute(VARS_ST, list(lparam)) for p in psi]
    if _common_zero_binary(field, restricted):
        raise SheafError("psi not surjective: common zero on the line")
    rows = ((l,), (psi[0],), (psi[1],))
    e1 = Presentation.coker(field, P2, (-2,), (-1, 0, 0), rows)
    e1.validate(rng)
    pres = e1.twist(-1)
    c1, c2 = chern(pres)
    if (c1, c2) != (-1, 2):
        raise SheafError(f"wrong Chern classes {(c1, c2)} for a (-1,2) bundle")
    from .cohom import stability_check

    if stability_check(pres) != "stable":
        raise SheafError("unstable modification data")
    return BundleFamily(
        TYPEM12, field, pres, c1, c2, {"line": l, "psi": psi, "e1": e1}
    )


def make_generic(field, pres: Presentation, rng=None) -> BundleFamily:
    rng = rng or _rng_for_validation(field)
    pres.validate(rng)
    if pres.ambient != P2:
        raise SheafError("bundle families live on P2")
    c1, c2 = chern(pres)
    k = normalizing_twist(c1)
    norm = pres.twist(k)
    nc1, nc2 = chern(norm)
    return BundleFamily(GENERIC, field, norm, nc1, nc2, {"original": pres, "twist": k})


def _common_zero_binary(field, forms):
    """Whether nonzero binary forms share a projective root (over the closure)."""
    forms = [f_ for f_ in forms if not f_.is_zero()]
    if not forms:
        return True
    polys, s_mult = [], []
    for f_ in forms:
        coeffs = [field.zero] * (f_.degree + 1)
        for (_, et), c in f_.coeffs.items():
            coeffs[et] = c
        u = UniPoly(field, coeffs)  # never zero for a nonzero form
        polys.append(u)
        s_mult.append(f_.degree - u.degree)
    if all(m >= 1 for m in s_mult):
        return True  # common root at (0,1)
    g = polys[0]
    for u in polys[1:]:
        g = _unipoly_gcd(field, g, u)
        if g.degree == 0:
            return False
    return g.degree is not None and g.degree >= 1


def _unipoly_gcd(field, a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero():
        a, b = b, _unipoly_mod(field, a, b)
    if a.is_zero():
        return a
    lead_inv = field.inv(a.coeffs[-1])
    return a * lead_inv


def _unipoly_mod(field, a: UniPoly, b: UniPoly) -> UniPoly:
    r = a
    while not r.is_zero() and r.degree >= b.degree:
        shift = r.degree - b.degree
        factor = field.div(r.coeffs[-1], b.coeffs[-1])
        sub = UniPoly.monomial(field, factor, shift) * b
        r = r - sub
    return r


def _line_coeffs(field, l: HomPoly):
    return tuple(
        l.coeffs.get(tuple(1 if k == i else 0 for k in range(3)), field.zero)
        for i in range(3)
    )


def _coerce_one(field, vars_, value, degree):
    p = parse_poly(field, vars_, value) if isinstance(value, str) else value
    if p.is_zero() or p.degree != degree:
        raise SheafError(f"expected a nonzero form of degree {degree}")
    return p


def _coerce_vector(field, vars_, values, n, degree):
    if len(values) != n:
        raise SheafError(f"expected {n} forms")
    return tuple(_coerce_one(field, vars_, v, degree) for v in values)


def _coerce_rows(field, vars_, rows, nrows, ncols):
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise SheafError(f"expected a {nrows}x{ncols} matrix")
    out = []
    for r in rows:
        row = []
        for e in r:
            p = parse_poly(field, vars_, e) if isinstance(e, str) else e
            row.append(p)
        out.append(tuple(row))
    return tuple(out)


# ---------------------------------------------------------------------------
# bundle-spec files
# ---------------------------------------------------------------------------

def load_bundle_spec(obj_or_path, rng=None) -> BundleFamily:
    """Load a bundle from a spec dict or a JSON file path."""
    if isinstance(obj_or_path, (str,)):
        with open(obj_or_path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SheafError(f"invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    else:
        obj = obj_or_path
    for key in ("field", "family", "data"):
        if key not in obj:
            raise SheafError(f"bundle spec is missing the {key!r} field")
    field = field_from_json(obj["field"])
    family = obj["family"]
    data = obj["data"]
    try:
        if family == "type02":
            return make_type02(field, data["f"], rng)
        if family == "type03g":
            return make_type03_general(field, data["q"], rng)
        if family == "type03ng":
            return make_type03_nongeneral(field, data["line"], data["psi"], rng)
        if family == "m12":
            return make_m12(field, data["line"], data["psi"], rng)
        if family == "generic":
            return make_generic(field, _presentation_from_json(field, data), rng)
    except KeyError as exc:
        raise SheafError(f"bundle spec data is missing {exc.args[0]!r}") from exc
    raise SheafError(f"unknown family {family!r}")


def _presentation_from_json(field, data) -> Presentation:
    ambient = data.get("ambient", P2)
    vars_ = ambient_vars(ambient)
    kind = data.get("kind", COKER)
    twists = data["twists"]

    def rows_of(key, tgt, src):
        raw = data["maps"][key]
        return tuple(
            tuple(parse_poly(field, vars_, e) for e in row) for row in raw
        )

    if kind == COKER:
        f1, f0 = twists["f1"], twists["f0"]
        return Presentation.coker(field, ambient, f1, f0, rows_of("m", f0, f1))
    if kind == MONAD:
        a, b, c = twists["a"], twists["b"], twists["c"]
        return Presentation.monad(
            field, ambient, a, b, c, rows_of("ab", b, a), rows_of("bc", c, b)
        )
    raise SheafError(f"unknown presentation kind {kind!r}")


def bundle_spec_to_json(tag, field, data) -> dict:
    return {"field": field.to_json(), "family": tag, "data": data}


def presentation_to_json(pres: Presentation) -> dict:
    def rows_str(m):
        return [[str(e) for e in row] for row in m]

    if pres.kind == COKER:
        f1, f0 = pres.terms
        return {
            "kind": COKER,
            "ambient": pres.ambient,
            "twists": {"f1": list(f1.degrees), "f0": list(f0.degrees)},
            "maps": {"m": rows_str(pres.maps[0])},
        }
    if pres.kind == MONAD:
        a, b, c = pres.terms
        return {
            "kind": MONAD,
            "ambient": pres.ambient,
            "twists": {"a": list(a.degrees), "b": list(b.degrees), "c": list(c.degrees)},
            "maps": {"ab": rows_str(pres.maps[0]), "bc": rows_str(pres.maps[1])},
        }
    raise SheafError("three-term resolutions are internal and not serialized")


def family_to_spec(fam: BundleFamily) -> dict:
    """The canonical bundle-spec dict for a family (spec round-trips)."""
    if fam.tag == TYPE02:
        data = {"f": [[str(e) for e in row] for row in fam.extra["f"]]}
    elif fam.tag == TYPE03G:
        data = {"q": [str(q) for q in fam.extra["quadrics"]]}
    elif fam.tag == TYPE03NG:
        data = {
            "line": str(fam.extra["line"]),
            "psi": [str(p) for p in fam.extra["psi_tilde"]],
        }
    elif fam.tag == TYPEM12:
        data = {"line": str(fam.extra["line"]), "psi": [str(p) for p in fam.extra["psi"]]}
    else:
        data = presentation_to_json(fam.extra["original"])
    return bundle_spec_to_json(fam.tag, fam.field, data)
