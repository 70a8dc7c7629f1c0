import random

import pytest

from jumploci.algebra import HomPoly, PrimeField, UniPoly, VARS_ST, VARS_X, parse_poly
from jumploci.cech import cech_h0
from jumploci.cohom import (
    CohomError,
    CohomProfile,
    GammaMatrix,
    P1Sections,
    P2Cohomology,
    elem_mod_step,
    gamma_split,
    h0_h1_p2,
    h0_on_conic_divisor,
    h0_profile_p1,
    monad_to_coker,
    splitting_of,
    splitting_type,
    stability_check,
    _h0_p1_coker,
)
from jumploci.sheafkit import (
    ConicForm,
    P1,
    P2,
    Presentation,
    line_param,
    sym2_resolution,
)

F = PrimeField(32003)
RNG = random.Random(2024)


def euler_tangent_presentation(field):
    x = [HomPoly.variable(field, VARS_X, i) for i in range(3)]
    return Presentation.coker(field, P2, (0,), (1, 1, 1), ((x[0],), (x[1],), (x[2],)))


# ---------------------------------------------------------------------------
# cohomology on the plane
# ---------------------------------------------------------------------------

def test_line_bundle_h0_dimensions():
    p = Presentation.line_bundle_sum(F, P2, (4,))
    model = P2Cohomology(p)
    assert model.h0(0) == 15  # (d+1)(d+2)/2
    assert model.h0(-5) == 0
    assert model.h1(0) == 0
    assert model.h2(-8) == 3  # h^2(O(-4)) pairs with h^0(O(1))


def test_em12_h1_values(em12):
    model = P2Cohomology(em12.pres)
    assert model.h1(-2) == 1 and model.h1(0) == 1  # c2 - 1 on both sides


def test_e02_has_no_sections(e02):
    # h^1(E) = c2 - 2 + h^0(E) = 0 for this bundle
    assert h0_h1_p2(e02.pres, 0) == (0, 0)


def test_monad_and_coker_dims_agree(e03ng):
    mon = P2Cohomology(e03ng.extra["monad_e1"].twist(-1))
    cok = P2Cohomology(e03ng.pres)
    for k in range(-5, 5):
        assert mon.dims(k) == cok.dims(k)


def test_stability_classification(e02, e03, e03ng, em12):
    for fam in (e02, e03, e03ng, em12):
        assert stability_check(fam.pres) == "stable"
    split = Presentation.line_bundle_sum(F, P2, (0, 0))
    assert stability_check(split) == "semistable"
    unstable = Presentation.line_bundle_sum(F, P2, (1, -1))
    assert stability_check(unstable) == "unstable"
    odd = Presentation.line_bundle_sum(F, P2, (0, -1))
    assert stability_check(odd) == "unstable"
    with pytest.raises(CohomError):
        stability_check(Presentation.line_bundle_sum(F, P2, (1, 1)))


# ---------------------------------------------------------------------------
# profiles and splitting on the line
# ---------------------------------------------------------------------------

def test_profile_of_split_bundle():
    p = Presentation.line_bundle_sum(F, P1, (2, 0))
    profile = h0_profile_p1(p, (-3, 1))
    assert [profile.h0[k] for k in (-3, -2, -1, 0)] == [0, 1, 2, 4]
    st = splitting_type(profile)
    assert st.parts == (2, 0)


def test_balanced_profile():
    p = Presentation.line_bundle_sum(F, P1, (0, 0))
    st = splitting_of(p)
    assert st.parts == (0, 0)


def test_tangent_bundle_on_conic():
    tp = euler_tangent_presentation(F)
    cf = ConicForm.random_smooth(F, RNG)
    pb = tp.pullback(cf.param)
    profile = h0_profile_p1(pb, (-5, 0))
    assert profile.h0[-4] == 0
    assert profile.h0[-3] == 2
    assert splitting_of(pb).parts == (3, 3)


def test_splitting_reconstruction_invariant(e02):
    cf = ConicForm.random_smooth(F, RNG)
    pb = e02.pres.pullback(cf.param)
    st = splitting_of(pb)
    profile = h0_profile_p1(pb, (-4, 2))
    for k in range(-4, 3):
        assert st.h0_at(k) == profile.h0[k]


def test_splitting_window_errors():
    p = Presentation.line_bundle_sum(F, P1, (2, 0))
    from jumploci.cohom import WindowTooSmall

    with pytest.raises(WindowTooSmall):
        splitting_type(h0_profile_p1(p, (-2, 1)))  # h0 nonzero at the left edge
    with pytest.raises(WindowTooSmall):
        splitting_type(h0_profile_p1(p, (-4, -2)))  # increments not stabilized


def test_splitting_wide_parts_need_widening():
    p = Presentation.line_bundle_sum(F, P1, (7, -7))
    assert splitting_of(p).parts == (7, -7)


def test_profile_rejects_monads():
    tp = euler_tangent_presentation(F)
    x = [HomPoly.variable(F, VARS_X, i) for i in range(3)]
    monad = Presentation.monad(
        F, P2, (0,), (1, 1, 1), (3,),
        ((x[0],), (x[1],), (x[2],)),
        ((x[1] * x[2], x[2] * x[0], x[0] * x[1]),),
    )
    cf = ConicForm.random_smooth(F, RNG)
    with pytest.raises(CohomError):
        h0_profile_p1(monad.pullback(cf.param), (-3, 1))


def test_reparameterization_invariance(e03):
    cf = ConicForm.random_smooth(F, RNG)
    s = HomPoly.variable(F, VARS_ST, 0)
    t = HomPoly.variable(F, VARS_ST, 1)
    # compose with a random automorphism of the line
    a, b, c, d = 3, 1, 5, 2
    new_s = s.scale(a) + t.scale(b)
    new_t = s.scale(c) + t.scale(d)
    reparam = tuple(h.substitute(VARS_ST, [new_s, new_t]) for h in cf.param)
    st1 = splitting_of(e03.pres.pullback(cf.param))
    st2 = splitting_of(e03.pres.pullback(reparam))
    assert st1.parts == st2.parts


# ---------------------------------------------------------------------------
# restriction to conic divisors
# ---------------------------------------------------------------------------

def test_divisor_sections_em12(em12):
    model = P2Cohomology(em12.pres)
    generic = ConicForm(F, [1, 1, 0, 1, 0, 1])
    assert generic.is_smooth() and not F.is_zero(generic.xi[1])
    assert h0_on_conic_divisor(model, generic, 0) == 0
    double = ConicForm.veronese(F, (0, 0, 1))  # the doubled jumping line
    assert h0_on_conic_divisor(model, double, 0) >= 1
    matched = ConicForm.product_of_lines(F, (1, 1, 0), (1, -1, 0))
    assert F.is_zero(matched.xi[1])
    assert h0_on_conic_divisor(model, matched, 0) == 1


def test_divisor_formula_matches_profile(em12):
    model = P2Cohomology(em12.pres)
    for _ in range(3):
        cf = ConicForm.random_smooth(F, RNG)
        pb = em12.pres.pullback(cf.param)
        for k in (0, 1):
            assert h0_on_conic_divisor(model, cf, k) == _h0_p1_coker(pb, 2 * k)


def test_sym2_divisor_jump_detection(e02):
    res = sym2_resolution(e02.pres)
    model = P2Cohomology(res)
    cf = ConicForm.random_smooth(F, RNG)
    parts = splitting_of(e02.pres.pullback(cf.param)).parts
    a = parts[0]
    h1 = h0_on_conic_divisor(model, cf, 0) - 3
    assert h1 == (2 * a - 1 if a >= 1 else 0)


# ---------------------------------------------------------------------------
# transition-matrix rank tests
# ---------------------------------------------------------------------------

def test_gamma_zero_perturbation():
    gamma, rule = gamma_split(F, 1, {0: UniPoly(F, [])})
    assert gamma.rank_at(0) == 0
    assert rule(0) == 1
    assert rule(5) == 1


def test_gamma_k2_example():
    # perturbation x*(z + 1/z): off-diagonal coefficients a_{-1} = a_1 = x
    gamma, rule = gamma_split(F, 2, {-1: UniPoly(F, [0, 1]), 1: UniPoly(F, [0, 1])})
    assert gamma.rank_at(1) == 2 and rule(1) == 0
    assert gamma.rank_at(0) == 0 and rule(0) == 2
    assert gamma.det() == UniPoly(F, [0, 0, -1])  # -x^2


def test_gamma_scheme_multiplicity():
    a0 = UniPoly(F, [0, 1])  # a_0(x) = x
    gamma, _ = gamma_split(F, 1, {0: a0})
    assert gamma.det().ord_at(0) == 1


def test_gamma_rejects_bad_input():
    with pytest.raises(CohomError):
        GammaMatrix(F, 0, {0: UniPoly(F, [1])})
    with pytest.raises(CohomError):
        GammaMatrix(F, -1, {})
    with pytest.raises(CohomError):
        GammaMatrix(F, 2, {2: UniPoly(F, [1])})  # index outside the band


def test_elem_mod_step_divides_x():
    gamma, _ = gamma_split(F, 1, {0: UniPoly(F, [0, 1])})
    reduced, data = elem_mod_step(gamma)
    assert data["det_p"] == UniPoly(F, [0, 1])
    assert data["det_q"] == UniPoly(F, [1])


def test_elem_mod_step_k2():
    gamma, _ = gamma_split(F, 2, {-1: UniPoly(F, [0, 1]), 1: UniPoly(F, [0, 1])})
    reduced, data = elem_mod_step(gamma)
    assert data["det_p"] == UniPoly(F, [0, 0, -1])
    assert data["det_q"] == UniPoly(F, [-1])
    assert data["exponent"] == 2


def test_elem_mod_step_chains():
    # x^2 (z + 1/z): two reduction steps, each contributing k to the order
    x2 = UniPoly(F, [0, 0, 1])
    gamma, _ = gamma_split(F, 2, {-1: x2, 1: x2})
    once, data1 = elem_mod_step(gamma)
    twice, data2 = elem_mod_step(once)
    assert data1["det_p"].ord_at(0) == 4  # two steps of exponent k = 2
    assert data2["det_p"].ord_at(0) == 2
    assert data2["det_q"].ord_at(0) == 0
    with pytest.raises(CohomError):
        elem_mod_step(twice)


def test_elem_mod_requires_divisibility():
    gamma, _ = gamma_split(F, 1, {0: UniPoly(F, [1, 1])})
    with pytest.raises(CohomError):
        elem_mod_step(gamma)


# ---------------------------------------------------------------------------
# explicit section spaces and monad conversion
# ---------------------------------------------------------------------------

def test_p1_sections_dimension_matches_profile():
    tp = euler_tangent_presentation(F)
    cf = ConicForm.random_smooth(F, RNG)
    pulled = tp.pullback(cf.param).twist(-3)
    sections = P1Sections(pulled, 0)
    assert sections.dim == 2
    eta = HomPoly.variable(F, VARS_ST, 1) ** sections.e
    lifts = sections.lift_vectors(eta)
    assert len(lifts) == 2


def test_p1_section_lifts_satisfy_relations():
    tp = euler_tangent_presentation(F)
    cf = ConicForm.random_smooth(F, RNG)
    pulled = tp.pullback(cf.param).twist(-3)
    sections = P1Sections(pulled, 0)
    eta = HomPoly.variable(F, VARS_ST, 1) ** sections.e
    # a section times eta, pushed through the presentation map at a point,
    # must be well defined modulo the relation column
    g = pulled.maps[0]
    for lift in sections.lift_vectors(eta):
        # the lift must not be identically in the relation image only
        assert any(not v.is_zero() for v in lift)


def test_monad_to_coker_roundtrip(e03ng):
    e1 = monad_to_coker(e03ng.extra["monad_e1"])
    assert e1.kind == "coker"
    mon = P2Cohomology(e03ng.extra["monad_e1"])
    cok = P2Cohomology(e1)
    for k in range(-4, 4):
        assert mon.dims(k) == cok.dims(k)


def test_e03ng_splits_on_modification_line(e03ng):
    pb = e03ng.e1_presentation().pullback(line_param(F, (0, 0, 1)))
    assert splitting_of(pb).parts == (3, -1)


# ---------------------------------------------------------------------------
# the chart oracle
# ---------------------------------------------------------------------------

def test_cech_on_line_bundles():
    for degs in [(2, 0), (0, 0), (-3, 1)]:
        p = Presentation.line_bundle_sum(F, P1, degs)
        for k in range(-3, 3):
            assert cech_h0(p, k) == sum(max(0, d + k + 1) for d in degs)


def test_cech_matches_graded_on_pullbacks(e02, em12):
    for fam in (e02, em12):
        cf = ConicForm.random_smooth(F, RNG)
        pb = fam.pres.pullback(cf.param)
        for k in range(-3, 3):
            assert cech_h0(pb, k) == _h0_p1_coker(pb, k)
