"""Exact dense linear algebra over F_p (numpy int64) and over Q (fractions).

The scalar kernels below are the workhorses of every cohomology
computation; matrices stay small (tens of rows) but are built and reduced
many thousands of times, so the F_p path is vectorized.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .field import PrimeField, RationalField
from .poly import HomPoly, PolyError, mono_basis, mono_count


class MatrixError(ValueError):
    pass


# ---------------------------------------------------------------------------
# F_p kernels (numpy int64 arrays, entries reduced mod p)
# ---------------------------------------------------------------------------

def fp_rref(a: np.ndarray, p: int):
    """Reduced row echelon form over F_p. Returns (rank, pivot_cols, R)."""
    r = a.copy() % p
    rows, cols = r.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        pr = nz[0] + row
        if pr != row:
            r[[row, pr]] = r[[pr, row]]
        r[row] = (r[row] * pow(int(r[row, col]), -1, p)) % p
        mask = np.nonzero(r[:, col])[0]
        for i in mask:
            if i != row:
                r[i] = (r[i] - r[i, col] * r[row]) % p
        pivots.append(col)
        row += 1
    return row, pivots, r


def fp_rank(a: np.ndarray, p: int) -> int:
    if a.size == 0:
        return 0
    return fp_rref(a, p)[0]


def fp_kernel(a: np.ndarray, p: int) -> np.ndarray:
    """Right-kernel basis as columns, reduced and normalized to leading 1."""
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    rank, pivots, r = fp_rref(a, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for i, pc in enumerate(pivots):
            basis[pc, k] = (-r[i, fc]) % p
    # normalize each column so its first nonzero entry is 1
    for k in range(basis.shape[1]):
        nz = np.nonzero(basis[:, k])[0]
        if nz.size:
            inv = pow(int(basis[nz[0], k]), -1, p)
            basis[:, k] = (basis[:, k] * inv) % p
    return basis


def fp_det(a: np.ndarray, p: int) -> int:
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise MatrixError("determinant of a non-square matrix")
    if n == 0:
        return 1
    r = a.copy() % p
    det = 1
    for col in range(n):
        nz = np.nonzero(r[col:, col])[0]
        if nz.size == 0:
            return 0
        pr = nz[0] + col
        if pr != col:
            r[[col, pr]] = r[[pr, col]]
            det = -det
        piv = int(r[col, col])
        det = det * piv % p
        inv = pow(piv, -1, p)
        r[col] = (r[col] * inv) % p
        for i in range(col + 1, n):
            if r[i, col]:
                r[i] = (r[i] - r[i, col] * r[col]) % p
    return det % p


def fp_solve(a: np.ndarray, b: np.ndarray, p: int):
    """Solve a @ x = b exactly; returns x or None if inconsistent.

    b may be a matrix (solved column-wise). Free variables are set to 0.
    """
    rows, cols = a.shape
    bmat = b.reshape(rows, -1) if b.ndim == 1 else b
    aug = np.concatenate([a % p, bmat % p], axis=1)
    rank, pivots, r = fp_rref(aug, p)
    for pc in pivots:
        if pc >= cols:
            return None
    x = np.zeros((cols, bmat.shape[1]), dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = r[i, cols:]
    return x[:, 0] if b.ndim == 1 else x


# ---------------------------------------------------------------------------
# Q kernels (lists of Fractions; Bareiss for determinants)
# ---------------------------------------------------------------------------

def q_rref(rows_in):
    rows = [list(map(Fraction, r)) for r in rows_in]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        pr = next((i for i in range(row, nrows) if rows[i][col] != 0), None)
        if pr is None:
            continue
        rows[row], rows[pr] = rows[pr], rows[row]
        inv = 1 / rows[row][col]
        rows[row] = [v * inv for v in rows[row]]
        for i in range(nrows):
            if i != row and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[row])]
        pivots.append(col)
        row += 1
    return row, pivots, rows


def q_kernel(rows_in):
    nrows = len(rows_in)
    ncols = len(rows_in[0]) if nrows else 0
    if ncols == 0:
        return []
    if nrows == 0:
        return [tuple(Fraction(int(i == j)) for i in range(ncols)) for j in range(ncols)]
    rank, pivots, r = q_rref(rows_in)
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -r[i][fc]
        lead = next(v for v in vec if v != 0)
        out.append(tuple(v / lead for v in vec))
    return out


def q_det(rows_in):
    n = len(rows_in)
    if any(len(r) != n for r in rows_in):
        raise MatrixError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    # clear denominators, run integer Bareiss, divide the scale back out
    rows, scale = [], Fraction(1)
    for r in rows_in:
        fr = [Fraction(v) for v in r]
        den = 1
        for v in fr:
            den = den * v.denominator // _gcd(den, v.denominator)
        scale *= den
        rows.append([int(v * den) for v in fr])
    sign, prev = 1, 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            pr = next((i for i in range(k + 1, n) if rows[i][k] != 0), None)
            if pr is None:
                return Fraction(0)
            rows[k], rows[pr] = rows[pr], rows[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * rows[k][k] - rows[i][k] * rows[k][j]) // prev
            rows[i][k] = 0
        prev = rows[k][k]
    return Fraction(sign * rows[n - 1][n - 1], 1) / scale


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# field-dispatching helpers on plain list-of-list matrices
# ---------------------------------------------------------------------------

def scalar_rank_kernel(field, rows):
    """Rank and normalized right-kernel basis of a scalar matrix."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    if isinstance(field, PrimeField):
        a = np.array(rows, dtype=np.int64).reshape(nrows, ncols)
        rank = fp_rank(a, field.p)
        ker = fp_kernel(a, field.p)
        vecs = [tuple(int(v) for v in ker[:, j]) for j in range(ker.shape[1])]
        return rank, vecs
    rank, pivots, _ = q_rref(rows) if nrows else (0, [], [])
    return rank, q_kernel(rows)


def scalar_det(field, rows):
    if isinstance(field, PrimeField):
        n = len(rows)
        a = np.array(rows, dtype=np.int64).reshape(n, n) if n else np.zeros((0, 0), np.int64)
        return fp_det(a, field.p)
    return q_det(rows)


def scalar_solve(field, a_rows, b_cols):
    """Solve A X = B for matrices given as list-of-rows / list-of-columns."""
    if isinstance(field, PrimeField):
        nrows = len(a_rows)
        ncols = len(a_rows[0]) if nrows else 0
        a = np.array(a_rows, dtype=np.int64).reshape(nrows, ncols)
        b = np.array(b_cols, dtype=np.int64).T.reshape(nrows, -1)
        x = fp_solve(a, b, field.p)
        if x is None:
            return None
        return [tuple(int(v) for v in x[:, j]) for j in range(x.shape[1])]
    # rationals: RREF on the augmented matrix
    nrows = len(a_rows)
    ncols = len(a_rows[0]) if nrows else 0
    aug = [list(a_rows[i]) + [col[i] for col in b_cols] for i in range(nrows)]
    rank, pivots, r = q_rref(aug)
    for pc in pivots:
        if pc >= ncols:
            return None
    out = []
    for j in range(len(b_cols)):
        vec = [Fraction(0)] * ncols
        for i, pc in enumerate(pivots):
            vec[pc] = r[i][ncols + j]
        out.append(tuple(vec))
    return out


def det_generic(rows, one, add, mul, neg):
    """Cofactor determinant over any commutative ring, memoized on column sets."""
    n = len(rows)
    if n == 0:
        return one
    cache = {}

    def minor(row, cols):
        if len(cols) == 1:
            return rows[row][cols[0]]
        key = (row, cols)
        if key in cache:
            return cache[key]
        total = None
        for k, c in enumerate(cols):
            sub = minor(row + 1, cols[:k] + cols[k + 1 :])
            term = mul(rows[row][c], sub)
            if k % 2 == 1:
                term = neg(term)
            total = term if total is None else add(total, term)
        cache[key] = total
        return total

    return minor(0, tuple(range(n)))


# ---------------------------------------------------------------------------
# the public matrix type
# ---------------------------------------------------------------------------

class ExactMatrix:
    """Rectangular matrix of field scalars or of homogeneous polynomials."""

    __slots__ = ("field", "rows", "nrows", "ncols", "entry_kind")

    def __init__(self, field, rows, shape=None):
        self.field = field
        rows = [list(r) for r in rows]
        if shape is not None:
            self.nrows, self.ncols = shape
            if rows and (len(rows) != self.nrows or any(len(r) != self.ncols for r in rows)):
                raise MatrixError("rows do not match declared shape")
        else:
            self.nrows = len(rows)
            self.ncols = len(rows[0]) if rows else 0
        if any(len(r) != self.ncols for r in rows):
            raise MatrixError("matrix is not rectangular")
        self.rows = rows
        self.entry_kind = "poly" if any(
            isinstance(e, HomPoly) for r in rows for e in r
        ) else "scalar"
        if self.entry_kind == "poly":
            self.rows = [
                [e if isinstance(e, HomPoly) else None for e in r] for r in rows
            ]
            for i, r in enumerate(rows):
                for j, e in enumerate(r):
                    if not isinstance(e, HomPoly):
                        raise MatrixError(f"mixed scalar/poly entries at ({i},{j})")
        else:
            self.rows = [[field.normalize(e) for e in r] for r in rows]

    @classmethod
    def zeros(cls, field, nrows, ncols):
        return cls(field, [[field.zero] * ncols for _ in range(nrows)], (nrows, ncols))

    @classmethod
    def identity(cls, field, n):
        return cls(
            field,
            [[field.one if i == j else field.zero for j in range(n)] for i in range(n)],
        )

    def check_degree_template(self, row_twists, col_twists):
        """Entry (i,j) must be homogeneous of degree row_twists[i]-col_twists[j] or zero."""
        for i in range(self.nrows):
            for j in range(self.ncols):
                e = self.rows[i][j]
                if e.is_zero():
                    continue
                want = row_twists[i] - col_twists[j]
                if e.degree != want:
                    raise MatrixError(
                        f"entry ({i},{j}) has degree {e.degree}, template requires {want}"
                    )

    def rank_kernel(self):
        if self.entry_kind != "scalar":
            raise MatrixError("rank_kernel expects scalar entries")
        return scalar_rank_kernel(self.field, self.rows)

    def det(self):
        if self.nrows != self.ncols:
            raise MatrixError("determinant of a non-square matrix")
        if self.entry_kind == "scalar":
            return scalar_det(self.field, self.rows)
        return self._det_poly()

    def _det_poly(self):
        n = self.nrows
        polys = [e for r in self.rows for e in r if not e.is_zero()]
        if not polys:
            vars_ = self.rows[0][0].vars if n else ("x0",)
            return HomPoly.zero(self.field, vars_)
        vars_ = polys[0].vars
        f = self.field
        if n <= 6 or not isinstance(f, PrimeField):
            one = HomPoly.constant(f, vars_, f.one)
            return det_generic(
                self.rows, one, lambda a, b: a + b, lambda a, b: a * b, lambda a: -a
            )
        return self._det_poly_interpolate(vars_)

    def _det_poly_interpolate(self, vars_):
        # evaluate-and-fit: sample numeric determinants, solve for the
        # coefficients of the known-degree homogeneous result
        f = self.field
        degs = set()
        for r in self.rows:
            row_deg = {e.degree for e in r if not e.is_zero()}
            if len(row_deg) > 1:
                raise MatrixError("inconsistent entry degrees in a row")
            if row_deg:
                degs.add(row_deg.pop())
        d_total = sum(
            next(e.degree for e in r if not e.is_zero()) if any(not e.is_zero() for e in r) else 0
            for r in self.rows
        )
        nv = len(vars_)
        basis = mono_basis(nv, d_total)
        import random

        rng = random.Random(0x5EED)
        npts = len(basis) + 10
        pts, vals = [], []
        for _ in range(npts):
            pt = [f.rand(rng) for _ in range(nv)]
            num = [[e.evaluate(pt) for e in r] for r in self.rows]
            pts.append(pt)
            vals.append(scalar_det(f, num))
        rows = []
        for pt in pts:
            row = []
            for m in basis:
                v = f.one
                for x, e in zip(pt, m):
                    for _ in range(e):
                        v = f.mul(v, x)
                row.append(v)
            rows.append(row)
        sol = scalar_solve(f, rows, [vals])
        if sol is None:
            raise MatrixError("determinant interpolation failed")
        coeffs = dict(zip(basis, sol[0]))
        result = HomPoly(f, vars_, d_total, coeffs)
        # verify on fresh points
        for _ in range(4):
            pt = [f.rand(rng) for _ in range(nv)]
            num = [[e.evaluate(pt) for e in r] for r in self.rows]
            if result.evaluate(pt) != scalar_det(f, num):
                raise MatrixError("determinant interpolation inconsistent")
        return result

    def evaluate(self, point):
        if self.entry_kind != "poly":
            return self
        return ExactMatrix(
            self.field,
            [[e.evaluate(point) for e in r] for r in self.rows],
            (self.nrows, self.ncols),
        )

    def transpose(self):
        return ExactMatrix(
            self.field,
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
            (self.ncols, self.nrows),
        )

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def __repr__(self):
        return f"ExactMatrix({self.nrows}x{self.ncols}, {self.entry_kind})"


class Subquotient:
    """A subquotient ker/im of a coordinate space, with explicit bases.

    Stores an ambient dimension n, a subspace basis K (columns) and a
    sub-subspace basis I with span(I) <= span(K); models span(K)/span(I).
    Every cohomology model in this package is of this shape.
    """

    __slots__ = ("field", "ambient_dim", "kbasis", "dim", "_pivots", "_free", "_rrows")

    def __init__(self, field, ambient_dim, kbasis_cols, ibasis_cols):
        self.field = field
        self.ambient_dim = ambient_dim
        self.kbasis = [tuple(c) for c in kbasis_cols]
        k = len(self.kbasis)
        icols = [tuple(c) for c in ibasis_cols]
        if icols:
            coords = scalar_solve(field, _cols_to_rows(self.kbasis, ambient_dim), icols)
            if coords is None:
                raise MatrixError("image basis does not lie in the modeled subspace")
            # RREF of the image expressed in K-coordinates (rows = image vectors)
            if isinstance(field, PrimeField):
                arr = np.array(coords, dtype=np.int64).reshape(len(icols), k)
                rank, pivots, r = fp_rref(arr, field.p)
                rrows = [[int(v) for v in r[b]] for b in range(rank)]
            else:
                rank, pivots, r = q_rref([list(c) for c in coords])
                rrows = [list(r[b]) for b in range(rank)]
        else:
            pivots, rrows = [], []
        self._pivots = list(pivots)
        self._free = [c for c in range(k) if c not in self._pivots]
        self._rrows = rrows
        self.dim = len(self._free)

    def k_coordinates(self, ambient_vec):
        f = self.field
        sol = scalar_solve(
            f, _cols_to_rows(self.kbasis, self.ambient_dim), [list(ambient_vec)]
        )
        if sol is None:
            raise MatrixError("vector is not in the modeled subspace")
        return list(sol[0])

    def to_model(self, ambient_vec):
        """Coordinates of an ambient vector in the subquotient model."""
        f = self.field
        c = self.k_coordinates(ambient_vec)
        for b, pc in enumerate(self._pivots):
            if not f.is_zero(c[pc]):
                factor = c[pc]
                for j in range(len(c)):
                    c[j] = f.sub(c[j], f.mul(factor, self._rrows[b][j]))
        return tuple(c[fc] for fc in self._free)

    def lift(self, model_vec):
        """An ambient representative of a model vector."""
        f = self.field
        v = [f.zero] * self.ambient_dim
        for a, fc in enumerate(self._free):
            col = self.kbasis[fc]
            for i in range(self.ambient_dim):
                v[i] = f.add(v[i], f.mul(f.normalize(model_vec[a]), col[i]))
        return tuple(v)

    def basis_lifts(self):
        eye = ExactMatrix.identity(self.field, self.dim)
        return [self.lift(eye.rows[a]) for a in range(self.dim)]


def _cols_to_rows(cols, nrows):
    return [[col[i] for col in cols] for i in range(nrows)]
