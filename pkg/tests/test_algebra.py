import random
from fractions import Fraction

import pytest

from folwerk.algebra import AlgebraMap, AlgebraPresentation, RATIONALS
from folwerk.errors import (
    BudgetExceededError,
    InputError,
    MissingBoundError,
    NotAMapError,
)
from folwerk.poly import Gen, Polynomial


def mk(name, gen_names, rels=None, base=None, diff=None, **kw):
    # relations are written against a relation-free probe with the same tower
    gens = tuple(Gen(n) if isinstance(n, str) else Gen(*n) for n in gen_names)
    probe = AlgebraPresentation(name, base, gens, (), None, **kw)
    relations = [fn(probe) for fn in (rels or [])]
    return AlgebraPresentation(name, base, gens, relations, diff(probe) if diff else None, **kw)


def test_reduce_relation_itself():
    # x^2 in Q[x]/(x^2) goes to 0
    B = mk("dualx", ["x"], rels=[lambda p: p.g("x") * p.g("x")])
    assert B.reduce(B.g("x") * B.g("x")).is_zero()
    assert B.reduce(B.g("x")) == B.g("x")


def test_reduce_no_relations_identity():
    B = mk("affine", ["x"])
    p = B.g("x") + B.one()
    assert B.reduce(p) == p


def oracle_drop_t_squared(p, t_index):
    # independent check: kill any monomial with t-exponent >= 2
    kept = {e: c for e, c in p.terms.items() if e[t_index] < 2}
    return Polynomial(p.gens, kept)


def test_reduce_in_tower_matches_term_oracle():
    # z0^2 + 2 z0 z1 t inside Q[t]/(t^2)[z0, z1]: no z-relations fire
    A = mk("dualt", ["t"], rels=[lambda p: p.g("t") * p.g("t")])
    W = mk("weil", ["z0", "z1"], base=A)
    t, z0, z1 = W.g("t"), W.g("z0"), W.g("z1")
    p = z0 * z0 + (z0 * z1 * t).scale(2)
    got = W.reduce(p)
    want = oracle_drop_t_squared(p, W.gen_index("t"))
    assert got == want == p


def test_reduce_tower_kills_base_relation():
    A = mk("dualt", ["t"], rels=[lambda p: p.g("t") * p.g("t")])
    W = mk("weil", ["z0", "z1"], base=A)
    t, z0 = W.g("t"), W.g("z0")
    p = z0 * t * t + z0
    assert W.reduce(p) == z0
    assert W.reduce(p) == oracle_drop_t_squared(p, W.gen_index("t"))


def test_completion_finds_hidden_member():
    # x^4 lies in (x^2 + y, y^2) even though neither leading term divides it
    B = mk("pair", ["x", "y"], rels=[
        lambda p: p.g("x") * p.g("x") + p.g("y"),
        lambda p: p.g("y") * p.g("y"),
    ])
    x, y = B.g("x"), B.g("y")
    assert B.reduce(x ** 4).is_zero()
    assert B.reduce(x ** 2) == -y
    assert not B.reduce(x ** 3).is_zero()


def test_certificate_is_exact():
    B = mk("pair", ["x", "y"], rels=[
        lambda p: p.g("x") * p.g("x") + p.g("y"),
        lambda p: p.g("y") * p.g("y"),
    ])
    rng = random.Random(3)
    for _ in range(25):
        terms = {}
        for _ in range(rng.randrange(1, 5)):
            e = (rng.randrange(5), rng.randrange(3))
            terms[e] = Fraction(rng.randrange(-4, 5), rng.randrange(1, 3))
        p = Polynomial(B.gens, terms)
        nf, cof = B.reduce_with_certificate(p)
        recon = nf
        for c, r in zip(cof, B.relations):
            recon = recon + c * r
        assert recon == p
        assert B.reduce(p) == nf


def test_monomial_basis_finite():
    B = mk("dualx", ["x"], rels=[lambda p: p.g("x") * p.g("x")])
    assert B.is_finite_dimensional
    assert B.monomial_basis() == [(0,), (1,)]
    assert B.dim() == 2
    A = mk("dualt", ["t"], rels=[lambda p: p.g("t") * p.g("t")])
    W = mk("weil", ["z0"], base=A, rels=[lambda p: p.g("z0") ** 3])
    assert W.dim() == 6


def test_monomial_basis_needs_bound_when_infinite():
    B = mk("affine", ["x"])
    assert not B.is_finite_dimensional
    with pytest.raises(MissingBoundError):
        B.monomial_basis()
    assert B.monomial_basis(max_polydeg=3) == [(0,), (1,), (2,), (3,)]


def test_odd_generators_capped_at_one():
    B = AlgebraPresentation("kos", None, (Gen("x"), Gen("e", deg=-1)))
    basis = B.monomial_basis(max_polydeg=2)
    assert (0, 1) in basis and (1, 1) in basis
    assert all(e[1] <= 1 for e in basis)


def test_zero_algebra():
    B = mk("zero", ["x"], rels=[lambda p: p.g("x"), lambda p: p.g("x") - p.one()])
    assert B.is_zero_algebra
    assert B.monomial_basis() == []
    assert B.reduce(B.one()).is_zero()


def test_budget_exceeded():
    with pytest.raises(BudgetExceededError):
        mk(
            "tight",
            ["x", "y"],
            rels=[
                lambda p: p.g("x") * p.g("x") + p.g("y") * p.g("y"),
                lambda p: p.g("x") * p.g("y") + p.one(),
            ],
            completion_budget=0,
        )._completed


def test_relation_must_be_central():
    gens = (Gen("x"), Gen("e", deg=-1))
    probe = AlgebraPresentation("probe", None, gens)
    with pytest.raises(InputError):
        AlgebraPresentation("bad", None, gens, [probe.g("e") * probe.g("x")])


def test_differential_bidegree_checked():
    gens = (Gen("x"), Gen("e", deg=-3))
    probe = AlgebraPresentation("probe", None, gens)
    with pytest.raises(InputError):
        AlgebraPresentation("bad", None, gens, (), {"e": probe.g("x")})


def test_koszul_differential_validates():
    gens = (Gen("x"), Gen("e", deg=-1))
    probe = AlgebraPresentation("probe", None, gens)
    B = AlgebraPresentation("kos", None, gens, (), {"e": probe.g("x")})
    B.validate()
    assert B.d_reduced(B.g("e")) == B.g("x")
    assert B.d_reduced(B.g("x")).is_zero()
    assert B.d_reduced(B.g("x") * B.g("e")) == B.g("x") * B.g("x")


def test_map_validation():
    Bx = mk("dualx", ["x"], rels=[lambda p: p.g("x") * p.g("x")])
    Bt = mk("dualt", ["t"], rels=[lambda p: p.g("t") * p.g("t")])
    f = AlgebraMap("f", Bx, Bt, {"x": Bt.g("t")})
    assert f.apply(Bx.g("x") * Bx.g("x")).is_zero()
    with pytest.raises(NotAMapError):
        AlgebraMap("bad", Bx, Bt, {"x": Bt.one()})


def test_map_degree_checked():
    gens = (Gen("e", deg=-1),)
    B1 = AlgebraPresentation("b1", None, gens)
    B2 = AlgebraPresentation("b2", None, (Gen("x"),))
    with pytest.raises(NotAMapError):
        AlgebraMap("bad", B1, B2, {"e": B2.g("x")})


def test_map_composition_and_identity():
    Q2 = mk("q2", ["x", "y"])
    Q1 = mk("q1", ["t"])
    f = AlgebraMap("f", Q2, Q1, {"x": Q1.g("t") ** 2, "y": Q1.g("t") ** 3})
    g = AlgebraMap.identity(Q1)
    h = f.then(g)
    p = Q2.g("x") * Q2.g("y")
    assert h.apply(p) == Q1.g("t") ** 5
    assert f.apply(p) == h.apply(p)


def test_map_must_commute_with_differential():
    gens = (Gen("x"), Gen("e", deg=-1))
    probe = AlgebraPresentation("probe", None, gens)
    K = AlgebraPresentation("kos", None, gens, (), {"e": probe.g("x")})
    K2 = AlgebraPresentation("kos2", None, gens, (), {"e": probe.g("x") * probe.g("x")})
    AlgebraMap("ok", K, K, {"x": K.g("x"), "e": K.g("e")})
    with pytest.raises(NotAMapError):
        AlgebraMap("bad", K, K2, {"x": K2.g("x"), "e": K2.g("e")})


def test_reduce_handles_odd_part_untouched():
    # relation on x only; odd generator rides along
    gens = (Gen("x"), Gen("dx", deg=-1, weight=1))
    probe = AlgebraPresentation("probe", None, gens)
    B = AlgebraPresentation("drx", None, gens, [probe.g("x") ** 2])
    p = (B.g("x") ** 3) * B.g("dx") + B.g("x") * B.g("dx")
    assert B.reduce(p) == B.g("x") * B.g("dx")
