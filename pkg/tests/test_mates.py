import random

import pytest

from folwerk.errors import (
    AmbiguousInputError,
    BudgetExceededError,
    TypeMismatchError,
    UnknownNameError,
)
from folwerk.mates import (
    AdjunctionContext,
    Gen,
    Horiz,
    Ident,
    Vert,
    check_bc_unit,
    mate_left,
    mate_right,
    normalize,
    paste_squares,
    terms_equal,
)


def square_context():
    """Two adjoint pairs joined by vertical 1-cells U, V and a square phi."""
    ctx = AdjunctionContext("bc")
    for c in ("C", "D", "C'", "D'"):
        ctx.add_cell(c)
    ctx.add_arrow("R", "C", "D")
    ctx.add_arrow("L", "D", "C")
    ctx.add_arrow("R'", "C'", "D'")
    ctx.add_arrow("L'", "D'", "C'")
    ctx.add_arrow("U", "C'", "C")
    ctx.add_arrow("V", "D'", "D")
    ctx.add_adjunction("a", "L", "R", unit="eta", counit="eps")
    ctx.add_adjunction("a'", "L'", "R'", unit="eta'", counit="eps'")
    ctx.add_square("phi", ["V", "R'"], ["R", "U"], invertible=True)
    return ctx


def stack_context(levels=3):
    """A tower of adjoint pairs with a square between each consecutive pair."""
    ctx = AdjunctionContext("stack")
    tags = [""] + [str(i) for i in range(2, levels + 2)]
    for tag in tags:
        ctx.add_cell(f"C{tag}")
        ctx.add_cell(f"D{tag}")
        ctx.add_arrow(f"R{tag}", f"C{tag}", f"D{tag}")
        ctx.add_arrow(f"L{tag}", f"D{tag}", f"C{tag}")
        ctx.add_adjunction(
            f"a{tag}", f"L{tag}", f"R{tag}", unit=f"eta{tag}", counit=f"eps{tag}"
        )
    for above, below in zip(tags[1:], tags[:-1]):
        ctx.add_arrow(f"U{above}", f"C{above}", f"C{below}")
        ctx.add_arrow(f"V{above}", f"D{above}", f"D{below}")
        name = "phi" if below == "" else f"phi{below}"
        ctx.add_square(
            name, [f"V{above}", f"R{above}"], [f"R{below}", f"U{above}"]
        )
    return ctx


def test_triangle_collapses_to_identity():
    ctx = square_context()
    t = ctx.vertical(
        ctx.horizontal(ctx.identity(["R"]), ctx.generator("eps")),
        ctx.horizontal(ctx.generator("eta"), ctx.identity(["R"])),
    )
    assert normalize(ctx, t) == ctx.identity(["R"])
    # the companion identity on the left adjoint
    u = ctx.vertical(
        ctx.horizontal(ctx.generator("eps"), ctx.identity(["L"])),
        ctx.horizontal(ctx.identity(["L"]), ctx.generator("eta")),
    )
    assert normalize(ctx, u) == ctx.identity(["L"])


def test_identity_whiskers_collapse():
    ctx = square_context()
    t = ctx.horizontal(ctx.identity(["L"]), ctx.identity(["V"]))
    assert normalize(ctx, t) == ctx.identity(["L", "V"])
    trace = []
    normalize(ctx, t, trace=trace)
    assert [s["rule"] for s in trace] == ["distribute", "identity_absorption"]


def test_already_normal_term_is_fixed():
    ctx = square_context()
    t = ctx.horizontal(ctx.identity(["L", "V"]), ctx.generator("eta'"))
    assert normalize(ctx, t) == t


def test_interchange_orders_disjoint_layers_canonically():
    # one morphism, three bracketings: side by side, left first, right first
    ctx = square_context()
    phi = ctx.generator("phi")
    epsp = ctx.generator("eps'")
    both = ctx.horizontal(phi, epsp)
    left_first = ctx.vertical(
        ctx.horizontal(phi, ctx.identity((), "C'")),
        ctx.horizontal(ctx.identity(["V", "R'"]), epsp),
    )
    right_first = ctx.vertical(
        ctx.horizontal(ctx.identity(["R", "U"]), epsp),
        ctx.horizontal(phi, ctx.identity(["L'", "R'"])),
    )
    nf = normalize(ctx, both)
    assert normalize(ctx, left_first) == nf
    assert normalize(ctx, right_first) == nf


def test_declaration_guards():
    ctx = square_context()
    with pytest.raises(AmbiguousInputError):
        ctx.add_cell("C")
    with pytest.raises(AmbiguousInputError):
        ctx.add_arrow("R", "C", "D")
    with pytest.raises(UnknownNameError):
        ctx.add_arrow("W", "C", "nowhere")
    with pytest.raises(TypeMismatchError):
        ctx.add_adjunction("bad", "U", "V")
    with pytest.raises(AmbiguousInputError):
        # L is already the left leg of adjunction a
        ctx.add_arrow("R2", "C", "D")
        ctx.add_adjunction("again", "L", "R2")
    with pytest.raises(TypeMismatchError):
        ctx.add_square("lopsided", ["V", "R'"], ["R"])
    with pytest.raises(UnknownNameError):
        ctx.identity(["R", "missing"])
    with pytest.raises(TypeMismatchError):
        # R.R does not compose
        ctx.identity(["R", "R"])


def test_composition_guards():
    ctx = square_context()
    with pytest.raises(TypeMismatchError):
        ctx.vertical(ctx.generator("phi"), ctx.generator("phi"))
    with pytest.raises(TypeMismatchError):
        # 0-cells do not meet: phi ends at C', eta lives at D
        ctx.horizontal(ctx.generator("phi"), ctx.generator("eta"))
    with pytest.raises(UnknownNameError):
        ctx.generator("zeta")
    with pytest.raises(TypeMismatchError):
        ctx.identity((), None)


def test_mate_left_is_the_unreduced_composite():
    ctx = square_context()
    got = ctx.render(mate_left(ctx, "phi"))
    assert got == "(eps * id(U.L')) o (id(L) * phi * id(L')) o (id(L.V) * eta')"


def test_mate_right_is_the_unreduced_composite():
    ctx = square_context()
    ctx.add_square("psi0", ["L", "V"], ["U", "L'"])
    got = ctx.render(mate_right(ctx, "psi0"))
    assert got == "(id(R.U) * eps') o (id(R) * psi0 * id(R')) o (eta * id(V.R'))"


def test_mates_are_mutually_inverse():
    ctx = square_context()
    phi = ctx.generator("phi")
    assert normalize(ctx, mate_right(ctx, mate_left(ctx, phi))) == phi
    ctx.add_square("psi0", ["L", "V"], ["U", "L'"])
    psi0 = ctx.generator("psi0")
    assert normalize(ctx, mate_left(ctx, mate_right(ctx, psi0))) == psi0
    # and for every declared square in a taller tower
    tall = stack_context(3)
    for name in ("phi", "phi2", "phi3"):
        sq = tall.generator(name)
        assert normalize(tall, mate_right(tall, mate_left(tall, sq))) == sq


def test_mate_of_identity_square_is_identity():
    ctx = square_context()
    assert normalize(ctx, mate_left(ctx, ctx.identity(["R"]))) == ctx.identity(["L"])
    assert normalize(ctx, mate_right(ctx, ctx.identity(["L"]))) == ctx.identity(["R"])


def test_mate_type_guards():
    ctx = square_context()
    ctx.add_square("skew", ["V", "R'"], ["V", "R'"])
    with pytest.raises(TypeMismatchError):
        # target starts with V, not the right leg of an adjunction
        mate_left(ctx, "skew")
    with pytest.raises(TypeMismatchError):
        mate_left(ctx, ctx.identity((), "C"))
    with pytest.raises(TypeMismatchError):
        mate_right(ctx, "phi")


def test_bc_unit_passes_in_the_free_context():
    ctx = square_context()
    report = check_bc_unit(ctx, "phi")
    assert report.passed
    assert dict(report.conditions) == {
        "counit_transport": True,
        "unit_transport": True,
    }
    assert report.normal_forms["counit_lhs"] == "(eps * id(U)) o (id(L) * phi)"
    assert report.normal_forms["counit_lhs"] == report.normal_forms["counit_rhs"]


def test_bc_unit_trace_replays_the_reduction():
    ctx = square_context()
    report = check_bc_unit(ctx, "phi", want_trace=True)
    steps = report.traces["counit_lhs"]
    assert [s["rule"] for s in steps] == [
        "substitute_mate_definition",
        "distribute",
        "interchange",
        "interchange",
        "triangle_identity",
        "normal_form",
    ]
    assert steps[-1]["term"] == "(eps * id(U)) o (id(L) * phi)"
    # every step is JSON-shaped: rule plus rendered term
    for s in steps:
        assert isinstance(s["rule"], str) and isinstance(s["term"], str)
    exported = report.as_dict()
    assert exported["traces"]["counit_lhs"][0]["rule"] == "substitute_mate_definition"


def test_bc_unit_dual_side_passes():
    ctx = square_context()
    report = check_bc_unit(ctx, "phi", want_trace=True)
    assert dict(report.conditions)["unit_transport"]
    assert report.normal_forms["unit_lhs"] == report.normal_forms["unit_rhs"]
    assert report.normal_forms["unit_lhs"] == "(phi * id(L')) o (id(V) * eta')"
    rules = [s["rule"] for s in report.traces["unit_rhs"]]
    assert rules.count("triangle_identity") == 1


def test_bc_unit_corrupted_mate_fails():
    ctx = square_context()
    ctx.add_square("phi_alt", ["V", "R'"], ["R", "U"])
    report = check_bc_unit(ctx, "phi", psi=mate_left(ctx, "phi_alt"))
    assert not report.passed
    assert report.normal_forms["counit_lhs"] != report.normal_forms["counit_rhs"]
    with pytest.raises(TypeMismatchError):
        # a non-parallel term is rejected outright
        check_bc_unit(ctx, "phi", psi=ctx.generator("eta"))


def test_paste_two_generic_squares():
    ctx = stack_context(2)
    pasted = paste_squares(ctx, "phi2", "phi")
    assert ctx.render(normalize(ctx, pasted.right_transform)) == (
        "(phi * id(U3)) o (id(V2) * phi2)"
    )


def test_paste_boundary_and_identity():
    ctx = stack_context(2)
    with pytest.raises(TypeMismatchError):
        paste_squares(ctx, "phi", "phi")
    pasted = paste_squares(ctx, ctx.identity(["R2"]), "phi")
    assert pasted.mate_compatible
    assert normalize(ctx, pasted.right_transform) == ctx.generator("phi")
    other = paste_squares(ctx, "phi", ctx.identity(["R"]))
    assert other.mate_compatible
    assert normalize(ctx, other.right_transform) == ctx.generator("phi")


def test_mate_of_pasting_is_pasting_of_mates():
    ctx = stack_context(2)
    pasted = paste_squares(ctx, "phi2", "phi")
    assert pasted.mate_compatible
    assert (
        pasted.normal_forms["mate_of_pasting"]
        == pasted.normal_forms["pasting_of_mates"]
    )
    tt = ctx.term_type(pasted.right_transform)
    assert tt.src_word == ("V2", "V3", "R3")
    assert tt.tgt_word == ("R", "U2", "U3")


def test_three_square_pasting_is_associative():
    ctx = stack_context(3)
    inner_first = paste_squares(
        ctx, "phi3", paste_squares(ctx, "phi2", "phi").right_transform
    )
    outer_first = paste_squares(
        ctx, paste_squares(ctx, "phi3", "phi2").right_transform, "phi"
    )
    assert inner_first.mate_compatible and outer_first.mate_compatible
    assert terms_equal(ctx, inner_first.right_transform, outer_first.right_transform)
    assert terms_equal(ctx, inner_first.left_transform, outer_first.left_transform)


def test_formal_inverse_cancels():
    ctx = square_context()
    phi = ctx.generator("phi")
    inv = ctx.generator("phi.inv")
    assert normalize(ctx, ctx.vertical(inv, phi)) == ctx.identity(["V", "R'"])
    assert normalize(ctx, ctx.vertical(phi, inv)) == ctx.identity(["R", "U"])
    # whiskered copies cancel too
    t = ctx.vertical(
        ctx.horizontal(ctx.identity(["L"]), inv),
        ctx.horizontal(ctx.identity(["L"]), phi),
    )
    assert normalize(ctx, t) == ctx.identity(["L", "V", "R'"])


def test_budget_error_is_loud():
    ctx = square_context()
    lhs = ctx.vertical(
        ctx.horizontal(ctx.identity(["U"]), ctx.generator("eps'")),
        ctx.horizontal(mate_left(ctx, "phi"), ctx.identity(["R'"])),
    )
    with pytest.raises(BudgetExceededError) as err:
        normalize(ctx, lhs, budget=3)
    assert err.value.budget == 3
    assert "budget 3" in str(err.value)
    # the same term finishes under the default budget
    normalize(ctx, lhs)


def _cut_cell(ctx, word, cell, i):
    if not word:
        return cell
    if i < len(word):
        return ctx.arrows[word[i]].dst
    return ctx.arrows[word[-1]].src


def _random_layers(ctx, rng, max_layers):
    arrows = list(ctx.arrows)
    if rng.random() < 0.2:
        word, cell = (), rng.choice(list(ctx.cells))
    else:
        word = [rng.choice(arrows)]
        for _ in range(rng.randrange(0, 2)):
            nxt = [a for a in arrows if ctx.arrows[a].dst == ctx.arrows[word[-1]].src]
            if not nxt:
                break
            word.append(rng.choice(nxt))
        word, cell = tuple(word), None
    start = word
    layers = []
    for _ in range(rng.randrange(0, max_layers + 1)):
        apps = []
        for g in ctx.two_gens.values():
            k = len(g.src_word)
            if k == 0:
                for i in range(len(word) + 1):
                    if _cut_cell(ctx, word, cell, i) == g.dom:
                        apps.append((i, g))
            else:
                for i in range(len(word) - k + 1):
                    if word[i : i + k] == g.src_word:
                        apps.append((i, g))
        if not apps:
            break
        i, g = apps[rng.randrange(len(apps))]
        layers.append((word[:i], g.name, word[i + len(g.src_word) :]))
        word = word[:i] + g.tgt_word + word[i + len(g.src_word) :]
    return start, cell, layers


def _assemble(ctx, start, cell, layers, rng):
    """Random bracketing of the same layer data into a term tree."""

    def layer_term(layer):
        p, g, q = layer
        t = Gen(g)
        if rng.random() < 0.5:
            if q:
                t = Horiz(t, ctx.identity(q))
            if p:
                t = Horiz(ctx.identity(p), t)
        else:
            if p:
                t = Horiz(ctx.identity(p), t)
            if q:
                t = Horiz(t, ctx.identity(q))
        return t

    if not layers:
        return ctx.identity(start, cell)
    parts = [layer_term(l) for l in layers]
    while len(parts) > 1:
        i = rng.randrange(len(parts) - 1)
        parts[i : i + 2] = [Vert(parts[i + 1], parts[i])]
    return parts[0]


def _term_size(t):
    if isinstance(t, (Ident, Gen)):
        return 1
    if isinstance(t, Vert):
        return 1 + _term_size(t.after) + _term_size(t.first)
    return 1 + _term_size(t.left) + _term_size(t.right)


def test_normalize_is_idempotent_and_bracketing_blind():
    ctx = square_context()
    rng = random.Random(20260819)
    checked = 0
    for _ in range(200):
        start, cell, layers = _random_layers(ctx, rng, max_layers=2)
        t = _assemble(ctx, start, cell, layers, rng)
        if _term_size(t) > 12:
            continue
        nf = normalize(ctx, t)
        assert normalize(ctx, nf) == nf
        assert ctx.term_type(nf) == ctx.term_type(t)
        again = _assemble(ctx, start, cell, layers, rng)
        assert normalize(ctx, again) == nf
        checked += 1
    assert checked > 150


def test_normalize_is_idempotent_on_mate_composites():
    ctx = stack_context(2)
    pasted = paste_squares(ctx, "phi2", "phi")
    for t in (
        mate_left(ctx, "phi"),
        pasted.right_transform,
        pasted.left_transform,
        mate_left(ctx, pasted.right_transform),
    ):
        nf = normalize(ctx, t)
        assert normalize(ctx, nf) == nf
