"""Foliation presentations: defining conditions, tangent, pull-back formula."""

import pytest

from folwerk.algebra import AlgebraMap, AlgebraPresentation, RATIONALS
from folwerk.complexes import (
    ChainMap,
    PerfectComplex,
    cone,
    homology_dims,
    identity_matrix,
    is_quasi_iso,
    mat_transpose,
)
from folwerk.errors import (
    IncompatibleOwnersError,
    InputError,
    MissingBoundError,
    UnsupportedInputError,
)
from folwerk.foliation import (
    FoliationPresentation,
    custom_foliation,
    final_foliation,
    pullback_foliation,
    pushout_cone,
    tangent,
    verify_foliation,
    zero_foliation,
)
from folwerk.graded_mixed import GradedMixedPresentation, pullback_comparison_ok
from folwerk.poly import Gen
from folwerk.windows import DEFAULT_WINDOW


def poly_ring(name, *gens):
    return AlgebraPresentation(name, RATIONALS, tuple(Gen(g) for g in gens))


def dual_numbers():
    p = poly_ring("p", "x")
    return AlgebraPresentation("dual", RATIONALS, (Gen("x"),), (p.g("x") ** 2,))


def test_final_foliation_on_smooth_base():
    plane = poly_ring("plane", "x", "y")
    f = final_foliation(plane)
    rep = verify_foliation(f, DEFAULT_WINDOW)
    assert rep.passed
    assert [c.name for c in rep.conditions] == [
        "weight_zero_is_base",
        "quasi_free",
        "perfect_cotangent",
    ]
    assert f.cotangent.terms == {0: 2}
    assert f.cotangent.labels[0] == ["dx", "dy"]
    # the cotangent is the full module of differentials and the anchor is
    # literally the identity matrix on it
    assert f.anchor.mat(0) == identity_matrix(plane, 2)
    assert rep.as_dict()["passed"] is True


def test_final_foliation_on_quotient_routes_through_model():
    f = final_foliation(dual_numbers())
    # owner is the Koszul model, one killer generator in degree -1
    assert [g.deg for g in f.owner.own_gens] == [0, -1]
    assert f.cotangent.terms == {-1: 1, 0: 1}
    assert f.anchor.mat(0) == identity_matrix(f.owner, 1)
    assert f.anchor.mat(-1) == identity_matrix(f.owner, 1)
    assert verify_foliation(f, DEFAULT_WINDOW).passed


def test_zero_foliation():
    line = poly_ring("line", "x")
    z = zero_foliation(line)
    assert z.cotangent.terms == {}
    assert z.mixed.mixed_gens == ()
    assert verify_foliation(z, DEFAULT_WINDOW).passed
    assert tangent(z).complex.terms == {}


def test_corrupted_mixed_data_fails_at_monomial():
    plane = poly_ring("plane", "x", "y")
    f = final_foliation(plane)
    a = f.mixed.algebra
    corrupt = GradedMixedPresentation(
        "bad",
        f.mixed.base,
        plane,
        f.mixed.mixed_gens,
        None,
        {"x": a.g("dx"), "y": a.g("dy"), "dy": a.g("dx") * a.g("dy")},
        quasi_free=True,
    )
    # structural validation still passes: only the squared operator is broken
    bad = FoliationPresentation("bad", corrupt, f.cotangent, f.anchor, f.base_cotangent)
    # hand witness: eps(eps(y)) = eps(dy) is the corrupted product
    sq = corrupt.eps_reduced(corrupt.eps_reduced(corrupt.algebra.g("y")))
    assert sq == corrupt.algebra.g("dx") * corrupt.algebra.g("dy")
    rep = verify_foliation(bad, DEFAULT_WINDOW)
    assert not rep.passed
    row = next(c for c in rep.mixed.checks if c.name == "mixed_squared")
    assert not row.passed
    assert row.failing_monomial == "y"


def test_structural_rejections():
    plane = poly_ring("plane", "x", "y")
    f = final_foliation(plane)
    # cotangent complex with a permuted label order is not the weight-1 piece
    wrong = PerfectComplex(plane, {0: 2}, {}, {0: ["dy", "dx"]})
    with pytest.raises(InputError):
        FoliationPresentation("w", f.mixed, wrong, f.anchor, f.base_cotangent)
    # an anchor that is a valid chain map but disagrees with the mixed data
    swap = ChainMap(
        f.base_cotangent.complex,
        f.cotangent,
        {0: [[plane.zero(), plane.one()], [plane.one(), plane.zero()]]},
    )
    with pytest.raises(InputError):
        FoliationPresentation("w", f.mixed, f.cotangent, swap, f.base_cotangent)
    # foliation generators must sit in weight 1
    heavy = GradedMixedPresentation(
        "heavy", f.mixed.base, plane, (Gen("u", deg=-1, weight=2),)
    )
    with pytest.raises(InputError):
        FoliationPresentation("w", heavy, f.cotangent, f.anchor, f.base_cotangent)
    # complexes over the wrong owner are refused up front
    line = poly_ring("line", "x")
    with pytest.raises(IncompatibleOwnersError):
        custom_foliation("w", plane, PerfectComplex.free(line, 1, 0))


def test_tangent_complex():
    plane = poly_ring("plane", "x", "y")
    t = tangent(final_foliation(plane))
    assert t.complex.terms == {0: 2}
    assert t.complex.diffs == {}

    line = poly_ring("line", "x")
    c = PerfectComplex(
        line,
        {-1: 2, 0: 1},
        {-1: [[line.g("x"), line.g("x") ** 2]]},
        {-1: ["e1", "e2"], 0: ["dx"]},
    )
    f = custom_foliation("two_term", line, c, eps=lambda a: {"x": a.g("dx")})
    assert verify_foliation(f, DEFAULT_WINDOW).passed
    td = tangent(f)
    # degrees reverse and the differential transposes
    assert td.complex.terms == {0: 1, 1: 2}
    assert td.complex.diff(0) == mat_transpose(f.cotangent.diff(-1))
    assert td.complex.dual() == f.cotangent
    assert td.rank(1) == 2


def test_pullback_along_identity():
    plane = poly_ring("plane", "x", "y")
    f = final_foliation(plane)
    ident = AlgebraMap.identity(plane)
    assert pullback_foliation(f, ident) is f
    # the pushout cone collapses onto f's own cotangent leg
    k, inc = pushout_cone(f, ident)
    assert k.terms == {-1: 2, 0: 4}
    assert is_quasi_iso(inc, DEFAULT_WINDOW)


def test_pullback_of_final_is_final():
    line = poly_ring("line", "x")
    plane = poly_ring("plane", "x", "y")
    incl = AlgebraMap("incl", line, plane, (plane.g("x"),))
    pulled = pullback_foliation(final_foliation(line), incl)
    assert verify_foliation(pulled, DEFAULT_WINDOW).passed
    assert pulled.cotangent.terms == {-1: 1, 0: 3}
    # anchor is the inclusion of the target differentials next to the
    # transported generator
    assert [g.name for g in pulled.mixed.mixed_gens] == ["dx", "dx'", "dy", "sx"]
    assert pulled.anchor.mat(0) == [
        [plane.zero(), plane.zero()],
        [plane.one(), plane.zero()],
        [plane.zero(), plane.one()],
    ]
    direct = final_foliation(plane)
    # cotangent homology agrees with the rank-2 module of differentials
    assert homology_dims(pulled.cotangent, DEFAULT_WINDOW) == homology_dims(
        direct.cotangent, DEFAULT_WINDOW
    )
    a = direct.mixed.algebra
    images = {
        "dx": a.g("dx"),
        "dx'": a.g("dx"),
        "dy": a.g("dy"),
        "sx": a.zero(),
    }
    assert pullback_comparison_ok(pulled.mixed, direct.mixed, images)


def test_pullback_of_zero_gives_relative_differentials():
    line = poly_ring("line", "x")
    plane = poly_ring("plane", "x", "y")
    incl = AlgebraMap("incl", line, plane, (plane.g("x"),))
    z = zero_foliation(line)
    pulled = pullback_foliation(z, incl)
    assert verify_foliation(pulled, DEFAULT_WINDOW).passed
    assert pulled.cotangent.terms == {-1: 1, 0: 2}
    # the suspension kills the pulled-back direction, leaving rank one on dy
    assert pulled.cotangent.diff(-1) == [[plane.one()], [plane.zero()]]
    assert homology_dims(pulled.cotangent, DEFAULT_WINDOW) == homology_dims(
        PerfectComplex.free(plane, 1, 0), DEFAULT_WINDOW
    )
    # transitivity: the same homology as the cone on the comparison map alone
    x = z.base_cotangent.complex.base_change(incl)
    y2 = PerfectComplex(plane, {0: 2}, {}, {0: ["dx", "dy"]})
    comparison = ChainMap(x, y2, {0: [[plane.one()], [plane.zero()]]})
    assert homology_dims(cone(comparison), DEFAULT_WINDOW) == homology_dims(
        pulled.cotangent, DEFAULT_WINDOW
    )


def test_pullback_composition_agrees():
    line = poly_ring("line", "x")
    plane = poly_ring("plane", "x", "y")
    space = poly_ring("space", "x", "y", "z")
    f = AlgebraMap("f", line, plane, (plane.g("x"),))
    g = AlgebraMap("g", plane, space, (space.g("x"), space.g("y")))
    fin = final_foliation(line)
    one_step = pullback_foliation(fin, f.then(g))
    two_step = pullback_foliation(pullback_foliation(fin, f), g)
    assert [gg.name for gg in one_step.mixed.mixed_gens] == [
        "dx", "dx'", "dy", "dz", "sx",
    ]
    assert [gg.name for gg in two_step.mixed.mixed_gens] == [
        "dx", "dx'", "dy", "sx", "dx''", "dy'", "dz", "sx'", "sy",
    ]
    a = one_step.mixed.algebra
    # second-level transports land on their first-level counterparts and the
    # second-level suspensions die: their boundaries match already
    images = {
        "dx": a.g("dx"),
        "dx'": a.g("dx'"),
        "dy": a.g("dy"),
        "sx": a.g("sx"),
        "dx''": a.g("dx'"),
        "dy'": a.g("dy"),
        "dz": a.g("dz"),
        "sx'": a.zero(),
        "sy": a.zero(),
    }
    assert pullback_comparison_ok(two_step.mixed, one_step.mixed, images)


def test_pullback_rejections():
    line = poly_ring("line", "x")
    dual = dual_numbers()
    to_dual = AlgebraMap("to_dual", line, dual, (dual.g("x"),))
    with pytest.raises(UnsupportedInputError):
        pullback_foliation(final_foliation(line), to_dual)
    fd = final_foliation(dual)
    with pytest.raises(UnsupportedInputError):
        pullback_foliation(fd, AlgebraMap.identity(fd.owner))


def test_verify_needs_window_on_infinite_input():
    f = final_foliation(poly_ring("line", "x"))
    with pytest.raises(MissingBoundError):
        verify_foliation(f)
