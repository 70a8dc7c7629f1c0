import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from jumploci.algebra import (
    ExactMatrix,
    HomPoly,
    InterpError,
    PolyError,
    PrimeField,
    QQ,
    Subquotient,
    UniPoly,
    VARS_L,
    VARS_ST,
    VARS_X,
    VARS_XI,
    binary_resultant,
    fit_homogeneous,
    mono_basis,
    ord_at,
    parse_poly,
    scalar_rank_kernel,
    scheme_length,
)

F7 = PrimeField(7)
F = PrimeField(32003)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

def test_prime_field_rejects_composites():
    with pytest.raises(ValueError):
        PrimeField(32004)
    with pytest.raises(ValueError):
        PrimeField(2)


def test_field_inverse_and_sqrt():
    for v in (1, 2, 5, 32002):
        assert F.mul(v, F.inv(v)) == 1
    r = F.sqrt(F.mul(9, 1))
    assert r is not None and F.mul(r, r) == 9
    assert QQ.sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert QQ.sqrt(Fraction(2)) is None


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def test_monomial_order_is_graded_lex():
    # xi00 > xi01 > ... pattern: first exponent slots dominate
    basis = mono_basis(3, 2)
    assert basis[0] == (2, 0, 0)
    assert basis == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))


def test_parse_and_print_roundtrip():
    p = parse_poly(F, VARS_X, "x0^2 + 3*x1*x2 - x2^2")
    assert p.degree == 2
    assert parse_poly(F, VARS_X, str(p)) == p


def test_parse_rejects_inhomogeneous():
    with pytest.raises(PolyError):
        parse_poly(F, VARS_X, "x0^2 + x1")


def test_addition_of_unequal_degrees_rejected():
    p = parse_poly(F, VARS_X, "x0^2")
    q = parse_poly(F, VARS_X, "x1")
    with pytest.raises(PolyError):
        p + q


def _rand_poly(f, vars_, degree, rng, density=0.7):
    coeffs = {}
    for m in mono_basis(len(vars_), degree):
        if rng.random() < density:
            coeffs[m] = f.rand(rng)
    return HomPoly(f, vars_, degree, coeffs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.randoms(use_true_random=False))
def test_poly_ring_laws(d1, d2, pyrng):
    rng = random.Random(pyrng.randint(0, 10**9))
    a = _rand_poly(F7, VARS_X, d1, rng)
    b = _rand_poly(F7, VARS_X, d1, rng)
    c = _rand_poly(F7, VARS_X, d2, rng)
    assert a + b == b + a
    assert (a + b) * c == a * c + b * c
    assert (a * c) * c == a * (c * c)


def test_substitution_composes_degrees():
    p = parse_poly(F, VARS_X, "x0*x2 - x1^2")
    s = HomPoly.variable(F, VARS_ST, 0)
    t = HomPoly.variable(F, VARS_ST, 1)
    out = p.substitute(VARS_ST, [s * s, s * t, t * t])
    assert out.is_zero()  # the standard conic parameterization
    q = parse_poly(F, VARS_X, "x0 + x1 + x2")
    out2 = q.substitute(VARS_ST, [s * s, s * t, t * t])
    assert out2.degree == 2


def test_divide_exact():
    a = parse_poly(F, VARS_X, "x0^2 - x1^2")
    b = parse_poly(F, VARS_X, "x0 - x1")
    assert a.divide_exact(b) == parse_poly(F, VARS_X, "x0 + x1")
    with pytest.raises(PolyError):
        parse_poly(F, VARS_X, "x0^2 + x1^2").divide_exact(b)


def test_poly_json_normalizes_lead_coefficient():
    p = parse_poly(F, VARS_X, "2*x0*x1 + 4*x2^2")
    j = p.to_json()
    assert j["1,1,0"] == "1"


def test_unipoly_ord_and_roots():
    h = UniPoly(F, [2, 1])  # 2 + t
    g = UniPoly(F, [-3, 1])
    prod = h * h * g
    assert prod.ord_at(F.normalize(-2)) == 2
    assert prod.ord_at(3) == 1
    assert prod.ord_at(5) == 0
    assert sorted(prod.roots_fp()) == sorted([F.normalize(-2), 3])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 6))
def test_ord_at_is_additive(m1, m2, t0):
    root = UniPoly(F7, [F7.neg(t0 % 7), 1])
    other = UniPoly(F7, [1, 3, 1])
    p = other
    for _ in range(m1):
        p = p * root
    q = UniPoly(F7, [2])
    for _ in range(m2):
        q = q * root
    expected = ord_at(p, t0 % 7) + ord_at(q, t0 % 7)
    assert ord_at(p * q, t0 % 7) == expected


def test_ord_at_zero_polynomial_errors():
    with pytest.raises(InterpError):
        ord_at(UniPoly(F, []), 0)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def test_identity_rank_kernel():
    m = ExactMatrix.identity(F7, 2)
    assert m.rank_kernel() == (2, [])


def test_symmetric_degenerate_kernel():
    m = ExactMatrix(F7, [[1, 1], [1, 1]])
    rank, kernel = m.rank_kernel()
    assert rank == 1
    assert kernel == [(1, 6)]  # (1, -1) normalized over F_7


def test_empty_matrix_rank_zero():
    m = ExactMatrix(F, [])
    assert m.rank_kernel() == (0, [])


def test_poly_det_diagonal():
    two = HomPoly.constant(QQ, VARS_X, 2)
    x = [HomPoly.variable(QQ, VARS_X, i) for i in range(3)]
    z = HomPoly.zero(QQ, VARS_X)
    m = ExactMatrix(QQ, [[two * x[0], z, z], [z, two * x[1], z], [z, z, two * x[2]]])
    assert m.det() == parse_poly(QQ, VARS_X, "8*x0*x1*x2")


def test_poly_det_antidiagonal():
    x = HomPoly.variable(F, VARS_X, 0)
    z = HomPoly.zero(F, VARS_X)
    m = ExactMatrix(F, [[z, x], [x, z]])
    assert m.det() == parse_poly(F, VARS_X, "-x0^2")


def test_poly_det_one_by_one():
    xi01 = HomPoly.variable(F, VARS_XI, 1)
    m = ExactMatrix(F, [[-xi01]])
    assert m.det() == -xi01


def test_det_rank_equivalence_random():
    rng = random.Random(101)
    for _ in range(1000):
        n = rng.randrange(1, 5)
        rows = [[F.rand(rng) for _ in range(n)] for _ in range(n)]
        m = ExactMatrix(F, rows)
        rank, _ = m.rank_kernel()
        assert (m.det() != 0) == (rank == n)


def test_det_multiplicative_random():
    rng = random.Random(202)
    import numpy as np

    from jumploci.algebra import fp_det

    for _ in range(1000):
        a = np.array([[F.rand(rng) for _ in range(3)] for _ in range(3)], dtype=np.int64)
        b = np.array([[F.rand(rng) for _ in range(3)] for _ in range(3)], dtype=np.int64)
        assert fp_det((a @ b) % F.p, F.p) == F.mul(fp_det(a, F.p), fp_det(b, F.p))


def test_kernel_vectors_annihilate():
    rng = random.Random(303)
    for _ in range(50):
        rows = [[F.rand(rng) for _ in range(5)] for _ in range(3)]
        rank, kernel = scalar_rank_kernel(F, rows)
        assert rank + len(kernel) == 5
        for vec in kernel:
            for row in rows:
                assert F.is_zero(sum(F.mul(a, b) for a, b in zip(row, vec)))


def test_interpolated_det_matches_cofactor():
    rng = random.Random(404)
    x = [HomPoly.variable(F, VARS_X, i) for i in range(3)]
    n = 7  # large enough to trigger the evaluation-interpolation path
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(
                x[0].scale(F.rand(rng)) + x[1].scale(F.rand(rng)) + x[2].scale(F.rand(rng))
            )
        rows.append(row)
    m = ExactMatrix(F, rows)
    det = m.det()
    assert det.is_zero() or det.degree == n
    for _ in range(5):
        pt = [F.rand(rng) for _ in range(3)]
        num = ExactMatrix(F, [[e.evaluate(pt) for e in r] for r in rows])
        assert det.evaluate(pt) == num.det()


def test_q_matrix_kernel():
    m = ExactMatrix(QQ, [[1, 2, 3], [2, 4, 6]])
    rank, kernel = m.rank_kernel()
    assert rank == 1
    assert len(kernel) == 2


def test_subquotient_roundtrip():
    # model span{e1,e2,e3}/span{e1+e2} inside F^4
    k = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)]
    i = [(1, 1, 0, 0)]
    sq = Subquotient(F, 4, k, i)
    assert sq.dim == 2
    v = (3, 5, 7, 0)
    coords = sq.to_model(v)
    lifted = sq.lift(coords)
    assert sq.to_model(lifted) == coords


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------

def test_fit_generic_points_impose_independent_conditions():
    rng = random.Random(55)
    pts = [tuple(F.rand(rng) for _ in range(6)) for _ in range(20)]
    assert fit_homogeneous(F, pts, 1, vars_=VARS_XI) == []


def test_fit_recovers_hyperplane():
    rng = random.Random(56)
    pts = []
    while len(pts) < 12:
        v = [F.rand(rng) for _ in range(6)]
        v[1] = F.zero  # points on the hyperplane xi01 = 0
        if any(not F.is_zero(c) for c in v):
            pts.append(tuple(v))
    basis = fit_homogeneous(F, pts, 1, vars_=VARS_XI)
    assert len(basis) == 1
    assert basis[0] == HomPoly.variable(F, VARS_XI, 1)


def test_fit_output_vanishes_on_inputs():
    rng = random.Random(57)
    pts = []
    while len(pts) < 8:
        v = [F.rand(rng) for _ in range(3)]
        v[2] = F.neg(F.add(v[0], v[1]))  # on the line l0 + l1 + l2 = 0
        if any(not F.is_zero(c) for c in v):
            pts.append(tuple(v))
    for d in (1, 2):
        for poly in fit_homogeneous(F, pts, d, vars_=VARS_L):
            for pt in pts:
                assert F.is_zero(poly.evaluate(list(pt)))


def test_fit_rejects_negative_degree():
    with pytest.raises(InterpError):
        fit_homogeneous(F, [(1, 0, 0)], -1, vars_=VARS_L)


def test_binary_resultant_detects_common_roots():
    # s^2 - t^2 and s - t share a root
    assert F.is_zero(binary_resultant(F, [1, 0, F.neg(1)], [1, F.neg(1)]))
    assert not F.is_zero(binary_resultant(F, [1, 0, 1], [0, 1, 0]))


def test_scheme_length_three_points():
    # x0*x1, x0*x2, x1*x2 cut out the three coordinate points
    gens = [
        parse_poly(F, VARS_X, "x0*x1"),
        parse_poly(F, VARS_X, "x0*x2"),
        parse_poly(F, VARS_X, "x1*x2"),
    ]
    assert scheme_length(F, gens, VARS_X) == 3
