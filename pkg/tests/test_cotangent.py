"""Differentials, conormal complexes, Koszul models, de Rham cohomology."""

from fractions import Fraction

import pytest

from folwerk.algebra import AlgebraMap, AlgebraPresentation, RATIONALS
from folwerk.complexes import PerfectComplex, homology_dims, homology_report
from folwerk.cotangent import (
    cotangent_lci,
    de_rham,
    de_rham_cohomology,
    kaehler,
    koszul_model,
)
from folwerk.errors import AmbiguousInputError, NotRegularError
from folwerk.graded_mixed import check_quasi_free, verify_mixed
from folwerk.poly import Gen
from folwerk.windows import DEFAULT_WINDOW, Window


def poly_ring(name, *gens):
    return AlgebraPresentation(name, RATIONALS, tuple(Gen(g) for g in gens))


def test_kaehler_polynomial_rings():
    line = poly_ring("line", "x")
    km = kaehler(line)
    assert km.complex.terms == {0: 1}
    assert km.classes == {"x": (0, 0)}
    assert kaehler(poly_ring("plane", "x", "y")).complex.terms == {0: 2}
    # identity presentation: no own generators, zero module
    pt = AlgebraPresentation("pt", RATIONALS, ())
    assert kaehler(pt).complex.terms == {}


def test_kaehler_rejects_bare_quotients():
    p = poly_ring("p", "x")
    dual = AlgebraPresentation("dual", RATIONALS, (Gen("x"),), (p.g("x") ** 2,))
    with pytest.raises(AmbiguousInputError):
        kaehler(dual)
    flagged = kaehler(dual, assume_smooth=True)
    assert flagged.complex.terms == {0: 1}


def frref(rows):
    # row reduction over Fraction, returns rank
    rows = [list(map(Fraction, r)) for r in rows if any(r)]
    rank, col, ncols = 0, 0, (len(rows[0]) if rows else 0)
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        rows[rank] = [v / rows[rank][col] for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def test_conormal_of_dual_numbers():
    p = poly_ring("p", "x")
    dual = AlgebraPresentation("dual", RATIONALS, (Gen("x"),), (p.g("x") ** 2,))
    cm = cotangent_lci(dual)
    assert cm.complex.terms == {-1: 1, 0: 1}
    assert cm.complex.diff(-1) == [[dual.g("x").scale(2)]]
    # oracle: expand over the basis {1, x}; d sends (a + b x) e to 2 a x dx
    d_matrix = [[0, 0], [2, 0]]
    r = frref(d_matrix)
    assert homology_report(cm.complex, 0).dimension == 2 - r == 1
    assert homology_report(cm.complex, 1).dimension == 2 - r == 1
    assert homology_report(cm.complex, 0).exact


def test_conormal_of_coordinate_axes():
    pl = poly_ring("pl", "x", "y")
    axes = AlgebraPresentation(
        "axes", RATIONALS, (Gen("x"), Gen("y")), (pl.g("x") * pl.g("y"),)
    )
    cm = cotangent_lci(axes)
    assert cm.complex.diff(-1) == [[axes.g("y")], [axes.g("x")]]
    # oracle: p (y dx + x dy) = 0 needs py and px in (xy), so p in (xy) = 0
    assert homology_report(cm.complex, 1, DEFAULT_WINDOW).dimension == 0
    # windowed cokernel count: coefficients of dx, dy up to the bound, minus
    # independent boundary rows p*(y dx + x dy) with p running over the basis
    basis = axes.monomial_basis(max_polydeg=DEFAULT_WINDOW.poly_degree)
    n_forms = 2 * len(basis)
    rep = homology_report(cm.complex, 0, DEFAULT_WINDOW)
    assert not rep.exact and rep.poly_degree_bound == 4
    # 9 basis monomials, boundary rows all independent, images stay monomial;
    # the images x^5 dy and y^5 dx fall outside the window but stay tracked
    assert len(basis) == 9
    assert rep.dimension == n_forms - 9 + 2
    assert rep.dimension == 11


def test_conormal_without_relations_is_kaehler():
    line = poly_ring("line", "x")
    assert cotangent_lci(line).complex == kaehler(line).complex


def test_regularity_rejection():
    p = poly_ring("p", "x")
    nr = AlgebraPresentation(
        "nr", RATIONALS, (Gen("x"),), (p.g("x") ** 2, p.g("x") ** 3)
    )
    with pytest.raises(NotRegularError):
        cotangent_lci(nr)
    with pytest.raises(NotRegularError):
        koszul_model(nr)


def test_koszul_model_of_dual_numbers():
    p = poly_ring("p", "x")
    dual = AlgebraPresentation("dual", RATIONALS, (Gen("x"),), (p.g("x") ** 2,))
    m = koszul_model(dual)
    assert [(g.name, g.deg) for g in m.own_gens] == [("x", 0), ("e1", -1)]
    assert m.d_reduced(m.g("e1")) == m.g("x") ** 2
    # windowed homology of the model matches the quotient in degrees 0, -1
    line_m = PerfectComplex(m, {0: 1})
    line_b = PerfectComplex(dual, {0: 1})
    assert homology_report(line_m, 0, DEFAULT_WINDOW).dimension == 2
    assert homology_report(line_b, 0, DEFAULT_WINDOW).dimension == 2
    assert homology_report(line_m, 1, DEFAULT_WINDOW).dimension == 0


def test_koszul_model_no_relations_is_input():
    line = poly_ring("line", "x")
    assert koszul_model(line) is line


def test_koszul_model_hyperplane():
    pl = poly_ring("pl", "x", "y")
    hy = AlgebraPresentation("hy", RATIONALS, (Gen("x"), Gen("y")), (pl.g("x"),))
    m = koszul_model(hy)  # verifies the projection internally
    qy = poly_ring("qy", "y")
    a = homology_report(PerfectComplex(m, {0: 1}), 0, DEFAULT_WINDOW).dimension
    b = homology_report(PerfectComplex(qy, {0: 1}), 0, DEFAULT_WINDOW).dimension
    assert a == b == 5


def test_de_rham_point_and_plane():
    drq = de_rham(RATIONALS)
    assert drq.mixed.mixed_gens == ()
    assert drq.weight_piece(0).terms == {0: 1}
    assert drq.weight_piece(1).terms == {}

    plane = poly_ring("plane", "x", "y")
    dr = de_rham(plane)
    assert [sum(dr.weight_piece(w).terms.values()) for w in range(4)] == [1, 2, 1, 0]
    a = dr.mixed.algebra
    assert dr.mixed.eps_reduced(a.g("x")) == a.g("dx")
    assert dr.mixed.eps_reduced(a.g("y")) == a.g("dy")
    assert verify_mixed(dr.mixed, DEFAULT_WINDOW).passed
    assert check_quasi_free(dr.mixed)


def test_de_rham_of_singular_base_routes_through_model():
    p = poly_ring("p", "x")
    dual = AlgebraPresentation("dual", RATIONALS, (Gen("x"),), (p.g("x") ** 2,))
    dr = de_rham(dual)
    assert [(g.name, g.deg) for g in dr.mixed.mixed_gens] == [("dx", -1), ("de1", -2)]
    assert dr.weight_piece(1).terms == {-1: 1, -2: 1}
    # d(de1) = -2x dx keeps d and eps anticommuting on the nose
    a = dr.mixed.algebra
    assert a.d_reduced(a.g("de1")) == -(a.g("x") * a.g("dx")).scale(2)
    assert verify_mixed(dr.mixed, DEFAULT_WINDOW).passed
    # oracle: weight pieces are the symmetric powers of a rank-2 module
    # on generators of degrees -1, -2; weight 2 gets dx*de1 and de1^2
    assert dr.weight_piece(2).terms == {-3: 1, -4: 1}
    assert check_quasi_free(dr.mixed)


def test_poincare_lemma_one_variable():
    line = poly_ring("line", "x")
    w6 = Window(weight=3, poly_degree=6, hom_min=-4, hom_max=0)
    dr = de_rham(line)
    # oracle for why nothing survives off t=0: every weight-1 window
    # monomial x^j dx is exactly eps(x^(j+1)) / (j+1), inside the bound
    a = dr.mixed.algebra
    for j in range(0, 6):
        hit = dr.mixed.eps_reduced(a.g("x") ** (j + 1)).scale(Fraction(1, j + 1))
        assert hit == (a.g("x") ** j) * a.g("dx")
    rep = de_rham_cohomology(dr, w6)
    assert rep.dims == {0: 1}
    assert rep.window.poly_degree == 6
    assert rep.as_dict()["dims"] == {"0": 1}


def test_poincare_lemma_two_variables():
    plane = poly_ring("plane", "x", "y")
    rep = de_rham_cohomology(de_rham(plane), DEFAULT_WINDOW)
    assert rep.dims == {0: 1}


def test_de_rham_cohomology_of_point():
    rep = de_rham_cohomology(de_rham(RATIONALS), DEFAULT_WINDOW)
    assert rep.dims == {0: 1}


def test_etale_base_change_ranks():
    # split double cover: B' = B x B presented by one idempotent relation
    b = poly_ring("B", "x")
    pz = poly_ring("pz", "x", "z")
    z = pz.g("z")
    bp = AlgebraPresentation("BxB", RATIONALS, (Gen("x"), Gen("z")), (z * z - z,))
    dr_b = de_rham(b)
    dr_bp = de_rham(bp)
    mp = dr_bp.model
    incl = AlgebraMap("i", b, mp, {"x": mp.g("x")})
    for w in (1, 2):
        lhs = homology_dims(dr_b.weight_piece(w).base_change(incl), DEFAULT_WINDOW, slack=2)
        rhs = homology_dims(dr_bp.weight_piece(w), DEFAULT_WINDOW, slack=2)
        assert lhs == rhs
    assert homology_dims(dr_bp.weight_piece(1), DEFAULT_WINDOW, slack=2) == {1: 9}
