"""Exact sheaf cohomology of presentations, splitting types, stability,
and rank tests for families of bundles on the projective line.

Every cohomology group is modeled by two finite matrices per twist: a
global-section multiplication block, and a Serre-dual block (transposed
multiplication) standing in for H^2 on the plane or H^1 on the line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra.field import PrimeField
from .algebra.matrix import Subquotient, det_generic, scalar_rank_kernel, scalar_solve
from .algebra.poly import HomPoly, UniPoly, mono_basis, mono_count, mono_index
from .sheafkit import (
    COKER,
    COKER3,
    MONAD,
    P1,
    P2,
    Presentation,
    SheafError,
    ambient_vars,
    chern,
    degree_p1,
    euler_char,
)


class CohomError(ValueError):
    pass


class WindowTooSmall(CohomError):
    """Signals that a twist window cannot determine the splitting."""


# ---------------------------------------------------------------------------
# graded coordinate spaces and multiplication blocks
# ---------------------------------------------------------------------------

class GradedSpace:
    """Concatenated monomial coordinates for H^0 of a sum of line bundles."""

    __slots__ = ("field", "ambient", "degrees", "offsets", "dim", "nvars")

    def __init__(self, field, ambient, degrees):
        self.field = field
        self.ambient = ambient
        self.nvars = 3 if ambient == P2 else 2
        self.degrees = tuple(degrees)
        self.offsets = []
        total = 0
        for d in self.degrees:
            self.offsets.append(total)
            total += mono_count(self.nvars, d)
        self.dim = total

    def polys_to_vec(self, polys):
        f = self.field
        vec = [f.zero] * self.dim
        for slot, (p, d) in enumerate(zip(polys, self.degrees)):
            if p.is_zero():
                continue
            if p.degree != d:
                raise CohomError(f"slot {slot} expects degree {d}, got {p.degree}")
            idx = mono_index(self.nvars, d)
            base = self.offsets[slot]
            for m, c in p.coeffs.items():
                vec[base + idx[m]] = c
        return vec

    def vec_to_polys(self, vec, vars_):
        f = self.field
        out = []
        for slot, d in enumerate(self.degrees):
            base = self.offsets[slot]
            n = mono_count(self.nvars, d)
            coeffs = dict(zip(mono_basis(self.nvars, d), vec[base : base + n]))
            out.append(HomPoly(f, vars_, max(d, 0), coeffs) if n else HomPoly.zero(f, vars_, d if d >= 0 else None))
        return out

    def mult_into(self, rows, tgt: "GradedSpace", tgt_slot, src_slot, poly):
        """Accumulate the multiplication block S_d(src) -> S_d'(tgt) by poly."""
        if poly.is_zero():
            return
        f = self.field
        d_src = self.degrees[src_slot]
        if d_src < 0:
            return
        d_tgt = tgt.degrees[tgt_slot]
        if d_tgt < 0:
            return
        src_base = self.offsets[src_slot]
        tgt_base = tgt.offsets[tgt_slot]
        tgt_idx = mono_index(tgt.nvars, d_tgt)
        for col, m_src in enumerate(mono_basis(self.nvars, d_src)):
            for m_e, c in poly.coeffs.items():
                m_t = tuple(a + b for a, b in zip(m_src, m_e))
                row = tgt_base + tgt_idx[m_t]
                cur = rows[row][src_base + col]
                rows[row][src_base + col] = f.add(cur, c)


def _zero_rows(field, nrows, ncols):
    return [[field.zero] * ncols for _ in range(nrows)]


def h0_space(field, ambient, twists, k):
    return GradedSpace(field, ambient, [d + k for d in twists.degrees])


def dual_space(field, ambient, twists, k):
    """Serre-dual coordinates: H^2(O(d)) on P^2, H^1(O(d)) on P^1."""
    shift = -3 if ambient == P2 else -2
    return GradedSpace(field, ambient, [-(d + k) + shift for d in twists.degrees])


def h0_block(field, ambient, m_rows, src_space, tgt_space):
    """Matrix of the multiplication map between graded section spaces."""
    rows = _zero_rows(field, tgt_space.dim, src_space.dim)
    for i, row in enumerate(m_rows):
        for j, entry in enumerate(row):
            src_space.mult_into(rows, tgt_space, i, j, entry)
    return rows


def _transpose(field, rows, nrows, ncols):
    """Transpose with explicit shapes so empty matrices keep their shape."""
    if nrows == 0 or ncols == 0:
        return _zero_rows(field, ncols, nrows)
    return [[rows[i][j] for i in range(nrows)] for j in range(ncols)]


def dual_block(field, ambient, m_rows, src_dual, tgt_dual):
    """Serre-dual block of a map: the transposed multiplication matrix.

    src_dual/tgt_dual are the dual coordinate spaces of the map's source and
    target terms; the returned matrix maps src_dual -> tgt_dual coordinates.
    """
    # multiplication runs tgt_dual -> src_dual on the dual side
    rows = _zero_rows(field, src_dual.dim, tgt_dual.dim)
    for i, row in enumerate(m_rows):
        for j, entry in enumerate(row):
            tgt_dual.mult_into(rows, src_dual, j, i, entry)
    return _transpose(field, rows, src_dual.dim, tgt_dual.dim)


def dual_diag_mult(field, ambient, twists, k, poly):
    """Serre-dual block of multiplication by a form on a sum of line bundles."""
    src_dual = dual_space(field, ambient, twists, k)
    tgt_dual = dual_space(field, ambient, twists, k + poly.degree)
    rows = _zero_rows(field, src_dual.dim, tgt_dual.dim)
    for slot in range(len(twists.degrees)):
        tgt_dual.mult_into(rows, src_dual, slot, slot, poly)
    return _transpose(field, rows, src_dual.dim, tgt_dual.dim)


def _rank(field, rows):
    if not rows or not rows[0]:
        return 0
    r, _ = scalar_rank_kernel(field, rows)
    return r


def _kernel(field, rows, ncols):
    if ncols == 0:
        return []
    if not rows:
        return [tuple(field.one if i == j else field.zero for i in range(ncols)) for j in range(ncols)]
    _, vecs = scalar_rank_kernel(field, rows)
    return vecs


# ---------------------------------------------------------------------------
# cohomology of presentations on P^2
# ---------------------------------------------------------------------------

class P2Cohomology:
    """Per-twist cohomology models of a presentation on the plane."""

    def __init__(self, pres: Presentation):
        if pres.ambient != P2:
            raise CohomError("this model is for presentations on P2")
        self.pres = pres
        self.field = pres.field
        self._dims = {}
        self._h1 = {}
        self._h0model = {}

    # -- dimensions -------------------------------------------------------
    def dims(self, k):
        if k in self._dims:
            return self._dims[k]
        p, f = self.pres, self.field
        if p.kind == COKER:
            f1, f0 = p.terms
            m = p.maps[0]
            s_src = h0_space(f, P2, f1, k)
            s_tgt = h0_space(f, P2, f0, k)
            r0 = _rank(f, h0_block(f, P2, m, s_src, s_tgt))
            d_src = dual_space(f, P2, f1, k)
            d_tgt = dual_space(f, P2, f0, k)
            r2 = _rank(f, dual_block(f, P2, m, d_src, d_tgt))
            out = (s_tgt.dim - r0, d_src.dim - r2, d_tgt.dim - r2)
        elif p.kind == MONAD:
            a, b, c = p.terms
            m_ab, m_bc = p.maps
            sa, sb, sc = (h0_space(f, P2, t, k) for t in (a, b, c))
            beta = h0_block(f, P2, m_bc, sb, sc)
            alpha = h0_block(f, P2, m_ab, sa, sb)
            r_beta = _rank(f, beta)
            r_alpha = _rank(f, alpha)
            ker_beta = sb.dim - r_beta
            da, db, dc = (dual_space(f, P2, t, k) for t in (a, b, c))
            beta2 = dual_block(f, P2, m_bc, db, dc)
            alpha2 = dual_block(f, P2, m_ab, da, db)
            r_beta2 = _rank(f, beta2)
            r_alpha2 = _rank(f, alpha2)
            h0 = ker_beta - r_alpha
            h1 = (sc.dim - r_beta) + (da.dim - r_alpha2)
            h2 = (db.dim - r_beta2) - r_alpha2
            out = (h0, h1, h2)
        else:  # COKER3
            g2, g1, g0 = p.terms
            m2, m1 = p.maps
            s1 = h0_space(f, P2, g1, k)
            s0 = h0_space(f, P2, g0, k)
            r01 = _rank(f, h0_block(f, P2, m1, s1, s0))
            d2, d1, d0 = (dual_space(f, P2, t, k) for t in (g2, g1, g0))
            m2_dual = dual_block(f, P2, m2, d2, d1)
            m1_dual = dual_block(f, P2, m1, d1, d0)
            r2_2 = _rank(f, m2_dual)
            r2_1 = _rank(f, m1_dual)
            h0 = (s0.dim - r01) + (d2.dim - r2_2)
            h1 = (d1.dim - r2_1) - r2_2
            h2 = d0.dim - r2_1
            out = (h0, h1, h2)
        chi = euler_char(p, k)
        if out[0] - out[1] + out[2] != chi:
            raise CohomError(
                f"cohomology does not match the Euler characteristic at twist {k}"
            )
        self._dims[k] = out
        return out

    def h0(self, k):
        return self.dims(k)[0]

    def h1(self, k):
        return self.dims(k)[1]

    def h2(self, k):
        return self.dims(k)[2]

    # -- H^1 models (coker and coker3 kinds) --------------------------------
    def h1_model(self, k) -> Subquotient:
        if k in self._h1:
            return self._h1[k]
        p, f = self.pres, self.field
        if p.kind == COKER:
            f1, f0 = p.terms
            d_src = dual_space(f, P2, f1, k)
            d_tgt = dual_space(f, P2, f0, k)
            block = dual_block(f, P2, p.maps[0], d_src, d_tgt)
            kernel = _kernel(f, block, d_src.dim)
            model = Subquotient(f, d_src.dim, kernel, [])
        elif p.kind == COKER3:
            g2, g1, g0 = p.terms
            m2, m1 = p.maps
            d2, d1, d0 = (dual_space(f, P2, t, k) for t in (g2, g1, g0))
            m1_dual = dual_block(f, P2, m1, d1, d0)
            kernel = _kernel(f, m1_dual, d1.dim)
            m2_dual = dual_block(f, P2, m2, d2, d1)
            image = [tuple(r[j] for r in m2_dual) for j in range(d2.dim)] if d2.dim else []
            image = [c for c in image if any(not f.is_zero(v) for v in c)]
            model = Subquotient(f, d1.dim, kernel, image)
        else:
            raise CohomError("H^1 multiplication models need a coker-style presentation")
        if model.dim != self.h1(k):
            raise CohomError("H^1 model dimension mismatch")
        self._h1[k] = model
        return model

    def _h1_dual_term(self):
        return self.pres.terms[0] if self.pres.kind == COKER else self.pres.terms[1]

    def h1_mult(self, poly: HomPoly, k):
        """Matrix of multiplication H^1(E(k)) -> H^1(E(k + deg)) in model bases."""
        src = self.h1_model(k)
        tgt = self.h1_model(k + poly.degree)
        f = self.field
        if src.dim == 0 or tgt.dim == 0:
            return _zero_rows(f, tgt.dim, src.dim)
        diag = dual_diag_mult(f, P2, self._h1_dual_term(), k, poly)
        cols = []
        for a in range(src.dim):
            amb = src.lift(tuple(f.one if i == a else f.zero for i in range(src.dim)))
            moved = [
                sum((f.mul(diag[r][c], amb[c]) for c in range(len(amb))), f.zero)
                for r in range(len(diag))
            ]
            cols.append(tgt.to_model(moved))
        return [[cols[c][r] for c in range(src.dim)] for r in range(tgt.dim)]

    def xi_mult_mats(self, k):
        """The six multiplication matrices H^1(E(k)) -> H^1(E(k+2)) by x_i x_j."""
        f = self.field
        vars_ = ambient_vars(P2)
        mats = []
        from .sheafkit import XI_PAIRS

        for i, j in XI_PAIRS:
            e = [0, 0, 0]
            e[i] += 1
            e[j] += 1
            mono = HomPoly(f, vars_, 2, {tuple(e): f.one})
            mats.append(self.h1_mult(mono, k))
        return mats

    # -- H^0 models (sections with multiplication; coker and monad kinds) ----
    def h0_model(self, k):
        """Sections as a subquotient of the middle/top term's section space."""
        if k in self._h0model:
            return self._h0model[k]
        p, f = self.pres, self.field
        if p.kind == COKER:
            f1, f0 = p.terms
            s_src = h0_space(f, P2, f1, k)
            s_tgt = h0_space(f, P2, f0, k)
            block = h0_block(f, P2, p.maps[0], s_src, s_tgt)
            image = [tuple(r[j] for r in block) for j in range(s_src.dim)]
            image = [c for c in image if any(not f.is_zero(v) for v in c)]
            full = [
                tuple(f.one if i == a else f.zero for i in range(s_tgt.dim))
                for a in range(s_tgt.dim)
            ]
            model = Subquotient(f, s_tgt.dim, full, image)
            space = s_tgt
        elif p.kind == MONAD:
            a, b, c = p.terms
            m_ab, m_bc = p.maps
            sa, sb, sc = (h0_space(f, P2, t, k) for t in (a, b, c))
            beta = h0_block(f, P2, m_bc, sb, sc)
            alpha = h0_block(f, P2, m_ab, sa, sb)
            kernel = _kernel(f, beta, sb.dim)
            image = [tuple(r[j] for r in alpha) for j in range(sa.dim)]
            image = [col for col in image if any(not f.is_zero(v) for v in col)]
            model = Subquotient(f, sb.dim, kernel, image)
            space = sb
        else:
            raise CohomError("section models support coker and monad kinds")
        if model.dim != self.h0(k):
            raise CohomError("section model dimension mismatch")
        self._h0model[k] = (model, space)
        return self._h0model[k]

    def h0_mult(self, poly: HomPoly, k):
        """Multiplication H^0(E(k)) -> H^0(E(k+deg)) in the section models."""
        f = self.field
        src, s_space = self.h0_model(k)
        tgt, t_space = self.h0_model(k + poly.degree)
        vars_ = ambient_vars(P2)
        cols = []
        for a in range(src.dim):
            amb = src.lift(tuple(f.one if i == a else f.zero for i in range(src.dim)))
            polys = s_space.vec_to_polys(amb, vars_)
            moved = [q * poly for q in polys]
            cols.append(tgt.to_model(t_space.polys_to_vec(moved)))
        return [[cols[c][r] for c in range(src.dim)] for r in range(tgt.dim)]


def h0_h1_p2(pres: Presentation, k: int):
    """(h^0, h^1) of the presented sheaf twisted by k."""
    model = P2Cohomology(pres)
    d = model.dims(k)
    return d[0], d[1]


def stability_check(pres: Presentation) -> str:
    """Classify a normalized rank-2 bundle as stable / semistable / unstable.

    Uses the section criteria: with c1 = 0, stable means no sections and
    semistable means no sections after twisting down once; with c1 = -1 the
    two notions coincide and amount to having no sections.
    """
    c1, _ = chern(pres)
    if c1 not in (0, -1):
        raise CohomError("normalize first: c1 must be 0 or -1")
    model = P2Cohomology(pres)
    if c1 == 0:
        if model.h0(-1) > 0:
            return "unstable"
        return "stable" if model.h0(0) == 0 else "semistable"
    return "stable" if model.h0(0) == 0 else "unstable"


# ---------------------------------------------------------------------------
# profiles and splitting types on P^1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CohomProfile:
    """h^0/h^1 per twist over a window, with h0-h1 = chi baked in."""

    window: tuple
    h0: dict
    h1: dict

    def to_json(self):
        return {
            "window": [self.window[0], self.window[1]],
            "h0": {str(k): v for k, v in sorted(self.h0.items())},
            "h1": {str(k): v for k, v in sorted(self.h1.items())},
        }


@dataclass(frozen=True)
class SplittingType:
    """Sorted twists (a_1 >= ... >= a_r) of a split bundle on P^1."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(sorted(self.parts, reverse=True)))

    @property
    def degree(self):
        return sum(self.parts)

    @property
    def gap(self):
        return max(
            (self.parts[i] - self.parts[i + 1] for i in range(len(self.parts) - 1)),
            default=0,
        )

    def h0_at(self, k):
        return sum(max(0, a + k + 1) for a in self.parts)

    def twist(self, k):
        return SplittingType(tuple(a + k for a in self.parts))

    def to_json(self):
        return {"parts": list(self.parts)}


def _h0_p1_coker(pres, k):
    f = pres.field
    f1, f0 = pres.terms
    m = pres.maps[0]
    s_src = h0_space(f, P1, f1, k)
    s_tgt = h0_space(f, P1, f0, k)
    coker_dim = s_tgt.dim - _rank(f, h0_block(f, P1, m, s_src, s_tgt))
    d_src = dual_space(f, P1, f1, k)
    d_tgt = dual_space(f, P1, f0, k)
    ker_dim = d_src.dim - _rank(f, dual_block(f, P1, m, d_src, d_tgt))
    return coker_dim + ker_dim


def h0_profile_p1(pres: Presentation, window=None) -> CohomProfile:
    """Exact h^0/h^1 profile of a presentation on P^1 over a twist window."""
    if pres.ambient != P1:
        raise CohomError("profiles are computed on P1")
    if pres.kind != COKER:
        raise CohomError(
            "profiles need a two-term presentation; convert monads first"
        )
    if window is None:
        deg, r = degree_p1(pres), pres.rank
        mid = deg // max(r, 1)
        window = (mid - 6, mid + 4)
    lo, hi = window
    if lo > hi:
        raise CohomError("empty window")
    h0 = {k: _h0_p1_coker(pres, k) for k in range(lo, hi + 1)}
    h1 = {k: h0[k] - euler_char(pres, k) for k in range(lo, hi + 1)}
    if any(v < 0 for v in h1.values()):
        raise CohomError("negative h^1; presentation is inconsistent")
    prev = None
    for k in range(lo, hi + 1):
        if prev is not None and h0[k] < prev:
            raise CohomError("h^0 must be non-decreasing in the twist")
        prev = h0[k]
    return CohomProfile((lo, hi), h0, h1)


def splitting_type(profile: CohomProfile) -> SplittingType:
    """Recover the splitting from first differences of the h^0 profile."""
    lo, hi = profile.window
    if profile.h0[lo] != 0:
        raise WindowTooSmall("window must start where h^0 vanishes")
    incs = {k: profile.h0[k] - profile.h0[k - 1] for k in range(lo + 1, hi + 1)}
    if hi - lo < 2:
        raise WindowTooSmall("window too short")
    rank = incs[hi]
    if incs[hi - 1] != rank:
        raise WindowTooSmall("increments have not stabilized")
    parts = []
    prev = 0
    for k in range(lo + 1, hi + 1):
        n = incs[k]
        if n < prev:
            raise CohomError("not a profile of a sum of line bundles")
        parts.extend([-k] * (n - prev))
        prev = n
    st = SplittingType(tuple(parts))
    for k in range(lo, hi + 1):
        if st.h0_at(k) != profile.h0[k]:
            raise CohomError("not a profile of a sum of line bundles")
    return st


def splitting_of(pres: Presentation) -> SplittingType:
    """Splitting type of a presentation on P^1, with adaptive windowing."""
    deg, r = degree_p1(pres), pres.rank
    if r <= 0:
        raise CohomError("splitting needs positive rank")
    mid = deg // r
    lo, hi = mid - r - 4, mid + 3
    for _ in range(8):
        profile = h0_profile_p1(pres, (lo, hi))
        try:
            st = splitting_type(profile)
            if len(st.parts) == r and st.degree == deg:
                return st
            hi += 4  # increments stabilized too early
        except WindowTooSmall:
            if profile.h0[lo] != 0:
                lo -= 8
            else:
                hi += 4
    raise CohomError("could not stabilize a splitting window")


# ---------------------------------------------------------------------------
# restriction to conic divisors
# ---------------------------------------------------------------------------

def h0_on_conic_divisor(model_or_pres, xi, k: int) -> int:
    """h^0 of the restriction to the conic divisor of xi, at twist k.

    Computed from the twisted multiplication sequence
    0 -> E(k-2) -> E(k) -> E(k)|_Z -> 0.  Because E is locally free,
    multiplication by the conic form is injective on E(k-2) whatever the
    conic looks like (smooth, two lines, or a double line), so the same
    formula covers every divisor class without special cases.
    """
    model = (
        model_or_pres
        if isinstance(model_or_pres, P2Cohomology)
        else P2Cohomology(model_or_pres)
    )
    f = model.field
    q = xi.poly() if hasattr(xi, "poly") else xi
    sect = model.h0(k) - model.h0(k - 2)
    mult = model.h1_mult(q, k - 2)
    src_dim = model.h1(k - 2)
    ker = src_dim - _rank(f, mult)
    return sect + ker


# ---------------------------------------------------------------------------
# transition-matrix rank tests for families over a disc
# ---------------------------------------------------------------------------

class GammaMatrix:
    """The Toeplitz matrix of off-diagonal transition coefficients a_j(x)
    for a family of bundles on P^1 near a point where it splits as
    O(k) + O(-k); its rank at x determines the splitting there."""

    __slots__ = ("field", "k", "coeffs")

    def __init__(self, field, k, coeffs):
        if k < 0:
            raise CohomError("the normal-form exponent k must be non-negative")
        self.field = field
        self.k = k
        clean = {}
        for j, c in coeffs.items():
            if not isinstance(c, UniPoly):
                c = UniPoly(field, c if isinstance(c, (list, tuple)) else [c])
            if c.is_zero():
                continue
            if not (-k + 1 <= j <= k - 1):
                raise CohomError(f"coefficient index {j} outside [-k+1, k-1]")
            clean[j] = c
        if k == 0 and clean:
            raise CohomError("k = 0 forces an identically zero perturbation")
        self.coeffs = clean

    def entry(self, i, j) -> UniPoly:
        return self.coeffs.get(j - i, UniPoly.zero(self.field))

    def matrix_rows(self):
        return [[self.entry(i, j) for j in range(self.k)] for i in range(self.k)]

    def det(self) -> UniPoly:
        f = self.field
        if self.k == 0:
            return UniPoly(f, [f.one])
        one = UniPoly(f, [f.one])
        return det_generic(
            self.matrix_rows(), one, lambda a, b: a + b, lambda a, b: a * b,
            lambda a: -a,
        )

    def rank_at(self, x0) -> int:
        f = self.field
        if self.k == 0:
            return 0
        num = [[e.evaluate(x0) for e in row] for row in self.matrix_rows()]
        r, _ = scalar_rank_kernel(f, num)
        return r

    def jump_size_at(self, x0) -> int:
        return self.k - self.rank_at(x0)


def gamma_split(field, k: int, coeffs) -> tuple:
    """Assemble the rank-test matrix; returns it with its splitting rule."""
    gamma = GammaMatrix(field, k, coeffs)
    return gamma, gamma.jump_size_at


def elem_mod_step(gamma: GammaMatrix):
    """One elementary-modification step: divide all coefficients by x.

    Returns the new matrix for the quotient coefficients together with the
    exactly verified determinant identity det G_p = x^k det G_q.
    """
    f = gamma.field
    q_coeffs = {}
    for j, c in gamma.coeffs.items():
        if c.is_zero():
            continue
        if not f.is_zero(c.coeffs[0]):
            raise CohomError("coefficients are not all divisible by x")
        q_coeffs[j] = UniPoly(f, c.coeffs[1:])
    reduced = GammaMatrix(f, gamma.k, q_coeffs)
    det_p = gamma.det()
    det_q = reduced.det()
    xk = UniPoly.monomial(f, f.one, gamma.k)
    if det_p != xk * det_q:
        raise CohomError("determinant identity failed for the reduction step")
    return reduced, {"det_p": det_p, "det_q": det_q, "exponent": gamma.k}


# ---------------------------------------------------------------------------
# explicit section spaces on P^1 (for kernel-line comparisons)
# ---------------------------------------------------------------------------

class P1Sections:
    """H^0(E(k)) of a two-term presentation on P^1 as explicit data.

    Sections are modeled as balanced maps from binary forms of an auxiliary
    degree e into a saturated graded piece; this realizes sections whose
    classes are invisible to the plain graded cokernel.  Each basis section
    can be handed back as a vector of forms lifting s * eta for a chosen
    eta coprime to the points of interest.
    """

    def __init__(self, pres: Presentation, k: int):
        if pres.ambient != P1 or pres.kind != COKER:
            raise CohomError("section spaces need a two-term presentation on P1")
        self.pres = pres
        self.field = f = pres.field
        self.k = k
        f1, f0 = pres.terms
        e = 0
        if len(f1):
            e = max(0, max(-(a + k) - 1 for a in f1.degrees))
        self.e = e
        self._space_ke = h0_space(f, P1, f0, k + e)
        self._space_k2e = h0_space(f, P1, f0, k + 2 * e)
        self._piece_ke = self._module_piece(k + e)
        self._piece_k2e = self._module_piece(k + 2 * e)
        self._solve()

    def _module_piece(self, d):
        f = self.field
        f1, f0 = self.pres.terms
        s_src = h0_space(f, P1, f1, d)
        s_tgt = h0_space(f, P1, f0, d)
        block = h0_block(f, P1, self.pres.maps[0], s_src, s_tgt)
        image = [tuple(r[j] for r in block) for j in range(s_src.dim)]
        image = [c for c in image if any(not f.is_zero(v) for v in c)]
        full = [
            tuple(f.one if i == a else f.zero for i in range(s_tgt.dim))
            for a in range(s_tgt.dim)
        ]
        return Subquotient(f, s_tgt.dim, full, image)

    def _solve(self):
        from .sheafkit import VARS_ST

        f = self.field
        e = self.e
        etas = mono_basis(2, e)
        piece, space = self._piece_ke, self._space_ke
        dim_m = piece.dim
        n_eta = len(etas)
        # transfer[b][m] = class of eta_b * lift(basis_m) in the saturated piece
        transfer = []
        for b_exp in etas:
            eta_poly = HomPoly(f, VARS_ST, e, {b_exp: f.one})
            row = []
            for a in range(dim_m):
                amb = piece.lift(tuple(f.one if i == a else f.zero for i in range(dim_m)))
                polys = space.vec_to_polys(amb, VARS_ST)
                moved = [q * eta_poly for q in polys]
                row.append(self._piece_k2e.to_model(self._space_k2e.polys_to_vec(moved)))
            transfer.append(row)
        rows = []
        dim_out = self._piece_k2e.dim
        for alpha in range(n_eta):
            for beta in range(alpha + 1, n_eta):
                for out_coord in range(dim_out):
                    row = [f.zero] * (dim_m * n_eta)
                    for m in range(dim_m):
                        row[m * n_eta + alpha] = f.add(
                            row[m * n_eta + alpha], transfer[beta][m][out_coord]
                        )
                        row[m * n_eta + beta] = f.sub(
                            row[m * n_eta + beta], transfer[alpha][m][out_coord]
                        )
                    rows.append(row)
        self.basis = _kernel(f, rows, dim_m * n_eta)
        self.dim = len(self.basis)
        if self.dim != _h0_p1_coker(self.pres, self.k):
            raise CohomError("balanced section count disagrees with the profile")

    def lift_vectors(self, eta: HomPoly):
        """For each basis section s, a form vector representing s * eta."""
        from .sheafkit import VARS_ST

        f = self.field
        if eta.degree != self.e:
            raise CohomError(f"eta must have degree {self.e}")
        etas = mono_basis(2, self.e)
        out = []
        for sol in self.basis:
            acc = [f.zero] * self._space_ke.dim
            for b, b_exp in enumerate(etas):
                c_eta = eta.coeffs.get(b_exp, f.zero)
                if f.is_zero(c_eta):
                    continue
                model_vec = [sol[m * len(etas) + b] for m in range(self._piece_ke.dim)]
                amb = self._piece_ke.lift(tuple(model_vec))
                for i in range(len(acc)):
                    acc[i] = f.add(acc[i], f.mul(c_eta, amb[i]))
            out.append(self._space_ke.vec_to_polys(acc, VARS_ST))
        return out


# ---------------------------------------------------------------------------
# monad -> two-term conversion on P^2
# ---------------------------------------------------------------------------

def monad_to_coker(monad: Presentation, k_lo=-2, k_span=9) -> Presentation:
    """A two-term presentation of the middle cohomology of a monad on P^2.

    Finds minimal generators of the section module, then minimal generators
    of its (free) relation module, by graded linear algebra; the result is
    validated against the monad's cohomology before being returned.
    """
    if monad.kind != MONAD or monad.ambient != P2:
        raise CohomError("conversion expects a monad on P2")
    f = monad.field
    vars_ = ambient_vars(P2)
    model = P2Cohomology(monad)
    xs = [HomPoly.variable(f, vars_, i) for i in range(3)]

    k_start = None
    for k in range(k_lo, k_lo + k_span):
        if model.h0(k) > 0:
            k_start = k
            break
    if k_start is None:
        raise CohomError("no sections found in the generator window")

    gens = []  # (degree, ambient section-space vector)
    prev_empty = 0
    k = k_start
    while True:
        mod, space = model.h0_model(k)
        span_rows = []
        if k > k_start:
            prev_mod, prev_space = model.h0_model(k - 1)
            for a in range(prev_mod.dim):
                amb = prev_mod.lift(
                    tuple(f.one if i == a else f.zero for i in range(prev_mod.dim))
                )
                polys = prev_space.vec_to_polys(amb, vars_)
                for x in xs:
                    moved = [q * x for q in polys]
                    span_rows.append(list(mod.to_model(space.polys_to_vec(moved))))
        new_coords = _complement_coords(f, span_rows, mod.dim)
        for c in new_coords:
            vec = tuple(f.one if i == c else f.zero for i in range(mod.dim))
            gens.append((k, space.vec_to_polys(mod.lift(vec), vars_)))
        prev_empty = prev_empty + 1 if not new_coords else 0
        k += 1
        if prev_empty >= 2 and gens:
            break
        if k > k_start + k_span:
            raise CohomError("generator search did not terminate")

    gen_degs = [d for d, _ in gens]
    c1, c2 = chern(monad)
    f0_twists = tuple(-d for d in gen_degs)

    # relation module: kernels of evaluation against the generators
    def kernel_basis(d):
        mod, space = model.h0_model(d)
        f0_space = GradedSpace(f, P2, [d - g for g in gen_degs])
        cols = []
        col_monos = []
        for gi, (gd, gpolys) in enumerate(gens):
            shift = d - gd
            if shift < 0:
                continue
            for mexp in mono_basis(3, shift):
                mono = HomPoly(f, vars_, shift, {mexp: f.one})
                moved = [q * mono for q in gpolys]
                cols.append(list(mod.to_model(space.polys_to_vec(moved))))
                col_monos.append((gi, mexp))
        if not cols:
            return f0_space, []
        rows = [[col[r] for col in cols] for r in range(mod.dim)]
        vecs = _kernel(f, rows, len(cols))
        # express kernel vectors in the graded coordinates of F0(d)
        out = []
        for v in vecs:
            amb = [f.zero] * f0_space.dim
            for (gi, mexp), c in zip(col_monos, v):
                if f.is_zero(f.normalize(c)):
                    continue
                idx = mono_index(3, d - gen_degs[gi])
                amb[f0_space.offsets[gi] + idx[mexp]] = f.normalize(c)
            out.append(tuple(amb))
        return f0_space, out

    syzygies = []
    d = min(gen_degs)
    empty_run = 0
    expected_rank = len(gens) - monad.rank
    while True:
        f0_space, kb = kernel_basis(d)
        prev_cols = []
        if syzygies:
            for sd, spolys in syzygies:
                shift = d - sd
                if shift < 0:
                    continue
                for mexp in mono_basis(3, shift):
                    mono = HomPoly(f, vars_, shift, {mexp: f.one})
                    moved = [q * mono for q in spolys]
                    prev_cols.append(f0_space.polys_to_vec(moved))
        if kb:
            sub = Subquotient(f, f0_space.dim, kb, prev_cols)
            for a in range(sub.dim):
                vec = sub.lift(tuple(f.one if i == a else f.zero for i in range(sub.dim)))
                syzygies.append((d, f0_space.vec_to_polys(list(vec), vars_)))
            empty_run = 0 if sub.dim else empty_run + 1
        else:
            empty_run += 1
        d += 1
        degree_sum_ok = (
            len(syzygies) == expected_rank
            and sum(-sd for sd, _ in syzygies) == sum(f0_twists) - c1
        )
        if degree_sum_ok and empty_run >= 1:
            break
        if d > max(gen_degs) + k_span:
            raise CohomError("relation search did not terminate")

    f1_twists = tuple(-sd for sd, _ in syzygies)
    rows = []
    for gi in range(len(gens)):
        row = []
        for sd, spolys in syzygies:
            row.append(spolys[gi])
        rows.append(tuple(row))
    pres = Presentation.coker(f, P2, f1_twists, f0_twists, tuple(rows))

    import random

    pres.validate(random.Random(0xBEEF))
    if chern(pres) != (c1, c2):
        raise CohomError("converted presentation has wrong Chern classes")
    check = P2Cohomology(pres)
    for kk in range(-5, 5):
        if check.dims(kk) != model.dims(kk):
            raise CohomError(f"converted presentation disagrees at twist {kk}")
    return pres


def _complement_coords(field, span_rows, dim):
    """Coordinates completing the span of the given row vectors to k^dim."""
    if dim == 0:
        return []
    if not span_rows:
        return list(range(dim))
    if isinstance(field, PrimeField):
        import numpy as np

        from .algebra.matrix import fp_rref

        arr = np.array(span_rows, dtype=np.int64).reshape(len(span_rows), dim)
        _, pivots, _ = fp_rref(arr, field.p)
    else:
        from .algebra.matrix import q_rref

        _, pivots, _ = q_rref(span_rows)
    return [c for c in range(dim) if c not in pivots]
