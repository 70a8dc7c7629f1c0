import random

import pytest

from jumploci.algebra import HomPoly, PrimeField, VARS_L, VARS_XI, parse_poly, scalar_det
from jumploci.cohom import splitting_of
from jumploci.loci import (
    AlphaModel,
    LociError,
    LocusPolynomial,
    PencilInLocus,
    PencilProbe,
    curve_singular_points,
    fit_j2_c0,
    j1_poly_c0,
    j2_det_cm1,
    jlines_cm1,
    jump_size_conic,
    line_is_jumping,
    m12_hyperplane_coeffs,
    modification_conic_tests,
    pencil_multiplicity,
    rng_stream,
    sample_jumping_conics,
    second_kind_curve,
    splitting_statistics,
    symmetric_pair_value,
    type02_predicates,
    type03_geometry,
)
from jumploci.sheafkit import (
    ConicForm,
    make_generic,
    Presentation,
    P2,
    random_line,
    two_points_on_line,
)

F = PrimeField(32003)


# ---------------------------------------------------------------------------
# determinant loci
# ---------------------------------------------------------------------------

def test_em12_conic_locus_is_xi01(em12):
    locus = j2_det_cm1(em12)
    assert locus.degree == 1
    assert locus.poly == HomPoly.variable(F, VARS_XI, 1)


def test_em12_closed_form_coefficients(em12):
    a00, a01, a11 = m12_hyperplane_coeffs(em12)
    assert (a00, a01, a11) == (0, F.neg(1), 0)


def test_em12_unique_jumping_line(em12):
    from jumploci.sheafkit import line_param

    lines = jlines_cm1(em12)
    assert lines == [(0, 0, 1)]
    st = splitting_of(em12.e1_presentation().pullback(line_param(F, (0, 0, 1))))
    assert st.parts[0] >= 2  # the twisted restriction picks up a large summand


def test_em12_second_kind_curve(em12):
    sk = second_kind_curve(em12)
    assert sk.degree == 2
    assert sk.poly == parse_poly(F, VARS_L, "l0*l1")


def test_e02_line_locus_degree(e02):
    locus = j1_poly_c0(e02)
    assert locus.degree == 2
    # vanishing agrees with the splitting test on a handful of lines
    for i in range(25):
        rng = rng_stream(1, "j1-check", i)
        l = random_line(F, rng)
        assert locus.vanishes_at(l) == line_is_jumping(e02, l)


def test_e03_line_locus_is_triangle(e03):
    locus = j1_poly_c0(e03)
    assert locus.degree == 3
    assert locus.poly == parse_poly(F, VARS_L, "l0*l1*l2")


def test_unstable_bundle_rejected():
    fam = make_generic(F, Presentation.line_bundle_sum(F, P2, (1, -1)))
    with pytest.raises(LociError):
        j1_poly_c0(fam)


# ---------------------------------------------------------------------------
# jump tests
# ---------------------------------------------------------------------------

def test_jump_size_reducible_conics(e02):
    jumping_line = None
    for i in range(40):
        rng = rng_stream(3, "findjump", i)
        l = random_line(F, rng)
        if line_is_jumping(e02, l):
            jumping_line = l
            break
    assert jumping_line is not None
    other = (1, 7, 13)
    assert not line_is_jumping(e02, other)
    prod = ConicForm.product_of_lines(F, jumping_line, other)
    assert jump_size_conic(e02, prod) == (True, None)
    clean = ConicForm.product_of_lines(F, other, (1, 2, 4))
    if not line_is_jumping(e02, (1, 2, 4)):
        assert jump_size_conic(e02, clean) == (False, None)


def test_jump_size_conjugate_reducible(e03):
    # x0^2 - n x1^2 with n a nonresidue: conjugate lines through (0,0,1),
    # all of which are jumping for this bundle
    n = 2
    while F.sqrt(n) is not None:
        n += 1
    cf = ConicForm(F, [1, 0, 0, F.neg(n), 0, 0])
    jumping, size = jump_size_conic(e03, cf)
    assert jumping and size is None
    # a conjugate pair meeting away from the coordinate points: not jumping
    cf2 = ConicForm.product_of_lines(F, (1, 1, 1), (1, 2, 3))
    if not line_is_jumping(e03, (1, 1, 1)) and not line_is_jumping(e03, (1, 2, 3)):
        assert jump_size_conic(e03, cf2) == (False, None)


def test_em12_jump_iff_hyperplane(em12):
    for i in range(60):
        rng = rng_stream(5, "hyp", i)
        cf = ConicForm.random_smooth(F, rng)
        jumping, size = jump_size_conic(em12, cf)
        assert jumping == F.is_zero(cf.xi[1])
        assert (size >= 1) == jumping


def test_e03_zconic_jump_two(e03):
    zc = ConicForm(F, [1, 0, 0, 1, 0, 1])
    assert jump_size_conic(e03, zc) == (True, 2)


# ---------------------------------------------------------------------------
# symmetric-square membership and fitting
# ---------------------------------------------------------------------------

def test_alpha_dimensions(e02, e03):
    a2, a3 = AlphaModel(e02), AlphaModel(e03)
    assert (a2.source_dim, a2.target_dim) == (8, 5)
    assert (a3.source_dim, a3.target_dim) == (12, 9)


def test_alpha_matches_splitting(e02):
    alpha = AlphaModel(e02)
    for i in range(30):
        rng = rng_stream(8, "alpha", i)
        cf = ConicForm.random_smooth(F, rng)
        jumping, _ = jump_size_conic(e02, cf)
        assert alpha.is_jumping(cf.xi) == jumping


def test_fit_j2_degrees(e02, e03):
    fit2 = fit_j2_c0(e02, seed=11)
    assert fit2.degree == 2
    fit3 = fit_j2_c0(e03, seed=11)
    assert fit3.degree == 3
    zc = ConicForm(F, [1, 0, 0, 1, 0, 1])
    assert fit3.vanishes_at(zc.xi)


def test_sampled_conics_are_jumping(e02):
    pts = sample_jumping_conics(e02, 12, seed=7)
    assert len(pts) == 12
    for cf in pts:
        if cf.is_smooth():
            assert jump_size_conic(e02, cf)[0]


# ---------------------------------------------------------------------------
# pencils
# ---------------------------------------------------------------------------

def test_pencil_probe_requires_independence():
    cf = ConicForm(F, [1, 0, 0, 1, 0, 1])
    with pytest.raises(LociError):
        PencilProbe(cf, ConicForm(F, [2, 0, 0, 2, 0, 2]))


def test_pencil_multiplicity_em12(em12):
    locus = j2_det_cm1(em12)
    rng = random.Random(21)
    a = ConicForm.random_smooth(F, rng)
    b = ConicForm.random_smooth(F, rng)
    probe = PencilProbe(a, b)
    restricted = locus.poly.restrict_pencil(list(a.xi), list(b.xi))
    roots = restricted.roots_fp()
    assert len(roots) == 1
    assert pencil_multiplicity(em12, locus, probe, roots[0]) == 1
    off = F.add(roots[0], 1)
    assert pencil_multiplicity(em12, locus, probe, off) == 0


def test_pencil_inside_locus_detected(em12):
    locus = j2_det_cm1(em12)
    # both endpoints on the hyperplane xi01 = 0
    a = ConicForm(F, [1, 0, 0, 1, 0, 1])
    b = ConicForm(F, [1, 0, 0, 0, 0, 1])
    probe = PencilProbe(a, b)
    with pytest.raises(PencilInLocus):
        pencil_multiplicity(em12, locus, probe, 0)


def test_pencil_multiplicity_jump_two(e03):
    fit = fit_j2_c0(e03, seed=11)
    zc = ConicForm(F, [1, 0, 0, 1, 0, 1])
    rng = random.Random(31)
    other = ConicForm.random_smooth(F, rng)
    probe = PencilProbe(zc, other)
    assert pencil_multiplicity(e03, fit, probe, 0) >= 2


# ---------------------------------------------------------------------------
# family predicates
# ---------------------------------------------------------------------------

def test_wedge_rejects_equal_points(e02):
    pred = type02_predicates(e02)
    with pytest.raises(LociError):
        pred.line_test((1, 2, 3), (2, 4, 6))


def test_wedge_agreement_sample(e02):
    pred = type02_predicates(e02)
    for i in range(100):
        rng = rng_stream(13, "wedge-t", i)
        l = random_line(F, rng)
        p, q = two_points_on_line(F, l)
        assert pred.line_test(p, q) == line_is_jumping(e02, l)


def test_conic_eq_produces_jumping_conics(e02):
    pred = type02_predicates(e02)
    for i in range(10):
        rng = rng_stream(14, "ceq-t", i)
        u = [F.rand(rng) for _ in range(4)]
        v = [F.rand(rng) for _ in range(4)]
        try:
            cf = pred.conic_eq(u, v)
        except LociError:
            continue
        assert jump_size_conic(e02, cf)[0]


def test_j1_conic_interpolation_matches_determinant(e02):
    pred = type02_predicates(e02)
    assert pred.j1_conic().poly == j1_poly_c0(e02).poly


def test_schubert_integrals(e02):
    pred = type02_predicates(e02)
    rng = random.Random(41)
    for _ in range(2):
        w = tuple(F.rand(rng) for _ in range(4))
        assert pred.section_zero_length(w) == 3
        eta = tuple(F.rand(rng) for _ in range(4))
        assert pred.plane_cycle_length(eta) == 1


def test_ram_cubic_is_triangle(e03):
    geo = type03_geometry(e03)
    cubic = geo.ram_cubic()
    assert cubic.poly == parse_poly(F, VARS_X, "x0*x1*x2")


def test_jline_from_ram_lands_on_locus(e03):
    geo = type03_geometry(e03)
    j1 = j1_poly_c0(e03)
    pts = geo.sample_ram_points(15, seed=3)
    assert len(pts) == 15
    for p in pts:
        assert j1.vanishes_at(geo.jline_from_ram(p))


def test_jline_from_ram_rejects_rank_one_points(e03):
    geo = type03_geometry(e03)
    with pytest.raises(LociError):
        geo.jline_from_ram((1, 0, 0))  # a corner of the triangle


def test_classification_cases(e03):
    geo = type03_geometry(e03)
    rng = random.Random(61)
    generic = ConicForm.random_smooth(F, rng)
    out = geo.classify(generic)
    assert out["case"] == 3 and out["splitting"] == (2, 2)
    zc = ConicForm(F, [1, 0, 0, 1, 0, 1])
    out5 = geo.classify(zc)
    assert out5["case"] == 5
    w = out5["witness"]["w"]
    # the witness expresses the conic in the span of the defining quadrics
    assert all(not F.is_zero(c) for c in w)


def test_line_cases(e03):
    geo = type03_geometry(e03)
    assert geo.line_case((1, 0, 0))["case"] == 2
    assert geo.line_case((1, 5, 7))["case"] in (1, 2)


def test_kernel_test_m12_matches(em12):
    for i in range(30):
        rng = rng_stream(15, "ker-t", i)
        cf = ConicForm.random_smooth(F, rng)
        assert modification_conic_tests(em12, cf) == jump_size_conic(em12, cf)[0]


def test_kernel_test_e03ng_on_jumping_conics(e03ng):
    pts = sample_jumping_conics(e03ng, 8, seed=44)
    for cf in pts:
        if not cf.is_smooth():
            continue
        assert modification_conic_tests(e03ng, cf)
        assert jump_size_conic(e03ng, cf)[0]


def test_kernel_test_needs_smooth_conic(em12):
    with pytest.raises(LociError):
        modification_conic_tests(em12, ConicForm(F, [0, 1, 0, 0, 0, 0]))


def test_e03ng_line_locus_singularity(e03ng):
    j1 = j1_poly_c0(e03ng)
    assert j1.degree == 3
    pts, length = curve_singular_points(j1)
    assert pts == [(0, 0, 1)]
    assert length == 1


def test_symmetric_pair_value_agrees_with_roots():
    # S = s1 s2 + t1 t2 at the roots of (s - 2t)(s - 3t)
    from jumploci.algebra import VARS_PAIR

    s1 = HomPoly.variable(F, VARS_PAIR, 0)
    t1 = HomPoly.variable(F, VARS_PAIR, 1)
    s2 = HomPoly.variable(F, VARS_PAIR, 2)
    t2 = HomPoly.variable(F, VARS_PAIR, 3)
    sym = s1 * s2 + t1 * t2
    # q = (s - 2t)(s - 3t) = s^2 - 5st + 6t^2
    val = symmetric_pair_value(F, sym, (1, F.neg(5), F.normalize(6)))
    assert val == F.normalize(2 * 3 + 1 * 1)


# ---------------------------------------------------------------------------
# equivariance
# ---------------------------------------------------------------------------

def _random_gl3(rng):
    while True:
        a = [[F.rand(rng) for _ in range(3)] for _ in range(3)]
        if not F.is_zero(scalar_det(F, a)):
            return a


def _transpose_inverse(a):
    from jumploci.sheafkit import _invert3

    inv = _invert3(F, a)
    return [[inv[j][i] for j in range(3)] for i in range(3)]


def test_line_locus_equivariance(e02):
    rng = random.Random(71)
    a = _random_gl3(rng)
    moved = make_generic(F, e02.pres.substitute_coords(a))
    j_moved = j1_poly_c0(moved)
    j_orig = j1_poly_c0(e02)
    a_ti = _transpose_inverse(a)
    # values must agree up to one global scalar: compare cross ratios
    samples = []
    for i in range(6):
        r2 = rng_stream(72, "equi", i)
        l = random_line(F, r2)
        l_t = tuple(
            sum((F.mul(a_ti[r][c], l[c]) for c in range(3)), F.zero) for r in range(3)
        )
        samples.append((j_moved.value_at(l), j_orig.value_at(l_t)))
    base = next((s for s in samples if not F.is_zero(s[0]) and not F.is_zero(s[1])), None)
    assert base is not None
    for v1, v2 in samples:
        assert F.is_zero(F.sub(F.mul(v1, base[1]), F.mul(v2, base[0])))


def test_splitting_statistics_modal(e02, em12):
    stats = splitting_statistics(e02, 40, seed=1, curve="conic")
    assert stats["modal"] == (0, 0)
    stats_l = splitting_statistics(em12, 40, seed=1, curve="line")
    assert stats_l["modal"] == (0, -1)
