"""Push-forward along finite free ring maps.

A map of affine schemes whose ring extension is free of finite rank as a
module admits an exact direct image: points, modules, and foliations over
the source can be re-expressed over the target by expanding everything in
the module basis and extracting coefficients. This module implements the
whole chain at desk scale: `FiniteFreeMap` carries the basis and its
multiplication table, `weil_restrict` produces the restricted scheme with
its evaluation map, `f_plus` is the dualized direct image of perfect
complexes, `pushforward_foliation` transports foliation data, and
`tangent_at_point` compares both sides of the tangent formula.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import RATIONALS, AlgebraMap, AlgebraPresentation
from .complexes import PerfectComplex, homology_dims, zero_matrix
from .cotangent import cotangent_lci
from .errors import (
    InputError,
    NotFiniteFreeError,
    TypeMismatchError,
    UnsupportedInputError,
)
from .foliation import (
    ConditionCheck,
    FoliationPresentation,
    _anchor_from_eps,
    _desuspend,
)
from .graded_mixed import GradedMixedPresentation
from .poly import Gen, Polynomial, apply_map
from .windows import Window

__all__ = [
    "FiniteFreeMap",
    "WeilRestrictionResult",
    "PointsReport",
    "PushedForwardFoliation",
    "TangentAtPointReport",
    "restrict_scalars",
    "f_plus",
    "weil_restrict",
    "mapping_scheme",
    "check_functor_of_points",
    "pushforward_foliation",
    "tangent_at_point",
]


def _is_ancestor(a: AlgebraPresentation, b: AlgebraPresentation) -> bool:
    t = b
    while t is not None:
        if t is a:
            return True
        t = t.base
    return False


def _stages_beyond(
    c: AlgebraPresentation, b: AlgebraPresentation
) -> tuple[tuple[Gen, ...], tuple[Polynomial, ...]]:
    """Generators and relations of the tower stages of c above the ancestor b.

    Relations come back written over c.gens, whichever stage introduced them.
    """
    stages = []
    t = c
    while t is not b:
        if t is None:
            raise TypeMismatchError(
                f"{b.name!r} is not an ancestor of {c.name!r}"
            )
        stages.append(t)
        t = t.base
    gens: list[Gen] = []
    rels: list[Polynomial] = []
    for s in reversed(stages):
        gens.extend(s.own_gens)
        for r in s.own_relations:
            rels.append(c.embed(r))
    return tuple(gens), tuple(rels)


def _transplant(
    p: Polynomial, new_gens: tuple[Gen, ...], posmap: Sequence[int]
) -> Polynomial:
    """Rewrite p over a wider generator tuple, position i moving to posmap[i]."""
    width = len(new_gens)
    terms = {}
    for e, c in p.terms.items():
        ne = [0] * width
        for i, a in enumerate(e):
            if a:
                ne[posmap[i]] = a
        terms[tuple(ne)] = c
    return Polynomial(new_gens, terms)


class FiniteFreeMap:
    """Ring extension A -> B, free of finite rank with an explicit basis.

    The target must be a discrete stage of the tower over the source, and the
    basis must reduce to distinct coefficient-one monomials in the generators
    beyond the source, the first being 1. Construction verifies completeness
    (products of generators with basis elements expand over the basis) and
    that the extracted multiplication table is commutative and associative.
    """

    def __init__(
        self,
        name: str,
        source: AlgebraPresentation,
        target: AlgebraPresentation,
        basis: Sequence[Polynomial],
    ):
        self.name = name
        self.source = source
        self.target = target
        if not _is_ancestor(source, target):
            raise TypeMismatchError(
                f"finite free map {name!r}: {source.name!r} is not an "
                f"ancestor of {target.name!r}"
            )
        if not target.is_discrete:
            raise UnsupportedInputError(
                f"finite free map {name!r}: target {target.name!r} must be "
                "discrete (degree-0 generators, no differential)"
            )
        if not basis:
            raise NotFiniteFreeError(f"finite free map {name!r}: empty basis")
        n0 = len(source.gens)
        self._n0 = n0
        if target.is_zero_algebra:
            # the zero ring is free of any rank; every coefficient is zero
            self.basis = tuple(target.zero() for _ in basis)
            self.basis_exps = ()
            self._slot = {}
            self.table = tuple(
                tuple(
                    [Polynomial.zero(source.gens)] * len(basis)
                    for _ in basis
                )
                for _ in basis
            )
            return
        polys: list[Polynomial] = []
        exps: list[tuple[int, ...]] = []
        for k, raw in enumerate(basis):
            b = target.reduce(target.embed(raw))
            items = list(b.terms.items())
            if len(items) != 1 or items[0][1] != 1:
                raise NotFiniteFreeError(
                    f"finite free map {name!r}: basis element {k} does not "
                    "reduce to a coefficient-one monomial"
                )
            e = items[0][0]
            if any(e[:n0]):
                raise NotFiniteFreeError(
                    f"finite free map {name!r}: basis element {k} involves "
                    "generators of the source"
                )
            polys.append(b)
            exps.append(e[n0:])
        if any(exps[0]):
            raise NotFiniteFreeError(
                f"finite free map {name!r}: the first basis element must be 1"
            )
        if len(set(exps)) != len(exps):
            raise NotFiniteFreeError(
                f"finite free map {name!r}: repeated basis monomial"
            )
        self.basis = tuple(polys)
        self.basis_exps = tuple(exps)
        self._slot = {e: i for i, e in enumerate(exps)}
        self._check_complete()
        self.table = self._check_table()

    @property
    def rank(self) -> int:
        return len(self.basis)

    def expand(self, p: Polynomial) -> list[Polynomial]:
        """Coordinates of p over the basis, as polynomials of the source."""
        p = self.target.reduce(self.target.embed(p))
        n0 = self._n0
        cols: list[dict] = [dict() for _ in self.basis]
        for e, c in p.terms.items():
            slot = self._slot.get(e[n0:])
            if slot is None:
                raise NotFiniteFreeError(
                    f"finite free map {self.name!r}: monomial outside the "
                    f"span of the basis in {p!r}"
                )
            cols[slot][e[:n0]] = c
        return [Polynomial(self.source.gens, d) for d in cols]

    def _check_complete(self) -> None:
        # closing the basis under multiplication by every extension generator
        # is exactly freeness: induction reaches every standard monomial
        for g in self.target.gens[self._n0 :]:
            gp = self.target.g(g.name)
            for b in self.basis:
                self.expand(gp * b)

    def _check_table(self) -> tuple[tuple[list[Polynomial], ...], ...]:
        n = self.rank
        table = tuple(
            tuple(self.expand(self.basis[i] * self.basis[j]) for j in range(n))
            for i in range(n)
        )
        for i in range(n):
            for j in range(i):
                if table[i][j] != table[j][i]:
                    raise NotFiniteFreeError(
                        f"finite free map {self.name!r}: multiplication "
                        "table is not commutative"
                    )
        zero = Polynomial.zero(self.source.gens)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        lhs = zero
                        rhs = zero
                        for m in range(n):
                            lhs = lhs + table[i][j][m] * table[m][k][l]
                            rhs = rhs + table[j][k][m] * table[i][m][l]
                        if self.source.reduce(lhs) != self.source.reduce(rhs):
                            raise NotFiniteFreeError(
                                f"finite free map {self.name!r}: "
                                "multiplication table is not associative"
                            )
        return table

    def __repr__(self) -> str:
        return (
            f"FiniteFreeMap({self.name!r}: {self.source.name} -> "
            f"{self.target.name}, rank {self.rank})"
        )


def restrict_scalars(e: PerfectComplex, f: FiniteFreeMap) -> PerfectComplex:
    """View a complex over the target as a complex over the source.

    A free term of rank r becomes free of rank r·n; row (i, j) is module row
    i paired with basis index j, and each matrix entry turns into the n x n
    block of multiplication followed by coefficient extraction.
    """
    if e.owner is not f.target:
        raise TypeMismatchError(
            f"restrict_scalars: complex over {e.owner.name!r} cannot be "
            f"restricted along {f.name!r}"
        )
    nb = f.rank
    terms = {n: r * nb for n, r in e.terms.items()}
    labels = {
        n: [f"{lab}{j}" for lab in e.labels[n] for j in range(nb)]
        for n in e.terms
    }
    diffs = {}
    for n, m in e.diffs.items():
        rows, cols = e.rank(n + 1), e.rank(n)
        big = zero_matrix(f.source, rows * nb, cols * nb)
        for i in range(rows):
            for c in range(cols):
                ent = m[i][c]
                if ent.is_zero():
                    continue
                for j in range(nb):
                    coeffs = f.expand(ent * f.basis[j])
                    for k in range(nb):
                        if not coeffs[k].is_zero():
                            big[i * nb + k][c * nb + j] = coeffs[k]
        diffs[n] = big
    return PerfectComplex(f.source, terms, diffs, labels, check=False)


def f_plus(e: PerfectComplex, f: FiniteFreeMap) -> PerfectComplex:
    """Direct image of a perfect complex: dualize, restrict scalars, dualize."""
    return restrict_scalars(e.dual(), f).dual()


@dataclass
class WeilRestrictionResult:
    """Presentation of the restricted scheme with its evaluation data.

    `presentation` is the restricted scheme over the source of the map;
    `tensor` is the extension of the restricted scheme back up along the map;
    `ev` is the evaluation map realized by the universal expansions
    g = sum z_{g,i} b_i; `induced` is the unit-side finite free map from the
    presentation into the tensor, with the same basis.
    """

    name: str
    map: FiniteFreeMap
    source: AlgebraPresentation
    presentation: AlgebraPresentation
    tensor: AlgebraPresentation
    ev: AlgebraMap
    induced: FiniteFreeMap
    coordinates: dict[str, tuple[str, ...]]
    factor: AlgebraPresentation | None = None
    factor_names: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "along": self.map.name,
            "rank": self.map.rank,
            "generators": [g.name for g in self.presentation.own_gens],
            "relations": [repr(r) for r in self.presentation.own_relations],
            "coordinates": {k: list(v) for k, v in self.coordinates.items()},
            "zero_algebra": self.presentation.is_zero_algebra,
        }


def weil_restrict(
    c: AlgebraPresentation,
    f: FiniteFreeMap,
    name: str | None = None,
) -> WeilRestrictionResult:
    """Restrict an affine scheme over the target down to the source.

    Every generator g beyond the target splits into rank-many coordinates
    z_{g,i}; substituting g = sum z_{g,i} b_i into each relation, reducing,
    and extracting coefficients along the basis yields the relations of the
    restricted scheme. The evaluation map and the unit-side finite free map
    are built and validated as part of the result.
    """
    if not _is_ancestor(f.target, c):
        raise TypeMismatchError(
            f"weil_restrict: {c.name!r} is not presented over {f.target.name!r}"
        )
    if c.differential_images:
        raise UnsupportedInputError(
            f"weil_restrict: {c.name!r} carries a differential; only "
            "discrete presentations restrict at desk scale"
        )
    name = name or f"{c.name}.restricted"
    own_gens, own_rels = _stages_beyond(c, f.target)
    for g in own_gens:
        if g.deg != 0 or g.weight != 0:
            raise UnsupportedInputError(
                f"weil_restrict: generator {g.name!r} of {c.name!r} is not "
                "of degree 0, weight 0"
            )
    nb = f.rank
    n0 = len(f.source.gens)
    n_b = len(f.target.gens)
    bey = f.target.gens[n0:]

    used = {g.name for g in f.source.gens} | {g.name for g in bey}
    zgens: list[Gen] = []
    coords: dict[str, tuple[str, ...]] = {}
    for g in own_gens:
        names = []
        for i in range(nb):
            nm = f"{g.name}{i}"
            while nm in used:
                nm += "'"
            used.add(nm)
            names.append(nm)
            zgens.append(Gen(nm, 0, 0))
        coords[g.name] = tuple(names)
    nz = len(zgens)

    # carrier: source + coordinates + target extension, target relations only,
    # so coefficient extraction happens before the new relations exist
    scaffold = AlgebraPresentation(f"{name}.scaffold", f.source, tuple(zgens))
    bey_posmap = list(range(n0)) + [n0 + nz + k for k in range(n_b - n0)]

    def _reroot(p: Polynomial, gens: tuple[Gen, ...]) -> Polynomial:
        return _transplant(p, gens, bey_posmap)

    bey_rels_src = [
        r
        for r in f.target.relations
        if any(any(e[n0:]) for e in r.terms)
    ]
    carrier = AlgebraPresentation(
        f"{name}.carrier",
        scaffold,
        bey,
        tuple(_reroot(r, scaffold.gens + bey) for r in bey_rels_src),
    )

    # universal expansions g -> sum z_{g,i} b_i, one per restricted generator
    cgens = carrier.gens
    expansions: list[Polynomial] = []
    for k in range(len(own_gens)):
        acc = Polynomial.zero(cgens)
        for i in range(nb):
            e = [0] * len(cgens)
            e[n0 + k * nb + i] = 1
            for m, a in enumerate(f.basis_exps[i]):
                if a:
                    e[n0 + nz + m] = a
            acc = acc + Polynomial.monomial(cgens, tuple(e), 1)
        expansions.append(acc)
    images: list[Polynomial] = [
        Polynomial.gen(cgens, i) for i in range(n0)
    ] + [
        Polynomial.gen(cgens, n0 + nz + k) for k in range(n_b - n0)
    ] + expansions

    sub_index = {g.name: i for i, g in enumerate(c.gens)}
    # placeholder only: every slot is a source, extension, or restricted gen
    ordered = [Polynomial.zero(cgens)] * len(c.gens)
    for i, g in enumerate(f.source.gens):
        ordered[sub_index[g.name]] = images[i]
    for k, g in enumerate(bey):
        ordered[sub_index[g.name]] = images[n0 + k]
    for k, g in enumerate(own_gens):
        ordered[sub_index[g.name]] = images[n_b + k]

    wgens = scaffold.gens
    rels: list[Polynomial] = []
    for r in own_rels:
        q = carrier.reduce(apply_map(r, ordered, cgens))
        cols: list[dict] = [dict() for _ in range(nb)]
        for e, cv in q.terms.items():
            slot = f._slot.get(e[n0 + nz :])
            if slot is None:
                raise NotFiniteFreeError(
                    f"weil_restrict: relation image {q!r} leaves the basis span"
                )
            cols[slot][e[: n0 + nz]] = cv
        for d in cols:
            p = Polynomial(wgens, d)
            if not p.is_zero() and not any(p == s for s in rels):
                rels.append(p)

    w = AlgebraPresentation(name, f.source, tuple(zgens), tuple(rels))
    wb = AlgebraPresentation(
        f"{name}.tensor",
        w,
        bey,
        tuple(_reroot(r, w.gens + bey) for r in bey_rels_src),
    )
    ev = AlgebraMap(
        f"{name}.ev",
        c,
        wb,
        {own_gens[k].name: expansions[k] for k in range(len(own_gens))},
    )
    pi = FiniteFreeMap(
        f"{name}.unit",
        w,
        wb,
        [_reroot(b, wb.gens) for b in f.basis],
    )
    return WeilRestrictionResult(
        name, f, c, w, wb, ev, pi, coords
    )


def mapping_scheme(
    f: FiniteFreeMap,
    y: AlgebraPresentation,
    name: str | None = None,
) -> WeilRestrictionResult:
    """Scheme of maps from the covering scheme of f into Spec of y.

    Forms the product of the target with y over the source and restricts it
    back down; the result remembers y so tangent computations can split off
    the fiber directions later.
    """
    if y.base is not f.source:
        raise TypeMismatchError(
            f"mapping_scheme: {y.name!r} is not presented over {f.source.name!r}"
        )
    name = name or f"maps.{y.name}"
    ygens, yrels = _stages_beyond(y, f.source)
    n0 = len(f.source.gens)
    taken = {g.name for g in f.target.gens}
    renamed: list[Gen] = []
    for g in ygens:
        nm = g.name
        while nm in taken:
            nm += "'"
        taken.add(nm)
        renamed.append(Gen(nm, g.deg, g.weight))
    pgens = f.target.gens + tuple(renamed)
    posmap = list(range(n0)) + [
        len(f.target.gens) + k for k in range(len(ygens))
    ]
    product = AlgebraPresentation(
        f"{name}.product",
        f.target,
        tuple(renamed),
        tuple(_transplant(r, pgens, posmap) for r in yrels),
    )
    res = weil_restrict(product, f, name)
    res.factor = y
    res.factor_names = tuple(g.name for g in renamed)
    return res


# -- functor of points ---------------------------------------------------------


def _point_scheme(
    c: AlgebraPresentation,
    over: AlgebraPresentation,
    t: AlgebraPresentation,
    over_basis: Sequence[tuple[int, ...]],
    tag: str,
) -> tuple[WeilRestrictionResult, FiniteFreeMap, tuple[str, ...], tuple[str, ...]]:
    """Scheme of t-valued points of Spec c, with c presented over `over`.

    Re-roots c onto the extension of t by `over`'s generators and restricts
    the result down to the rationals, turning point enumeration into a plain
    presentation question. `over_basis` lists the monomials spanning `over`
    as a rational vector space; the extension is then spanned by the products
    of those with the monomials of t. Returns the restriction, the finite
    free map from the rationals it ran along, and the names the generators
    of `over` and of c took inside the extended test algebra.
    """
    ogens, orels = _stages_beyond(over, RATIONALS)
    taken = {g.name for g in t.gens}
    ren_o: list[Gen] = []
    for g in ogens:
        nm = g.name
        while nm in taken:
            nm += "'"
        taken.add(nm)
        ren_o.append(Gen(nm, g.deg, g.weight))
    to_gens = t.gens + tuple(ren_o)
    o_pos = [len(t.gens) + k for k in range(len(ogens))]
    t_over = AlgebraPresentation(
        f"{tag}.base",
        t,
        tuple(ren_o),
        tuple(_transplant(r, to_gens, o_pos) for r in orels),
    )
    cgens, crels = _stages_beyond(c, over)
    ren_c: list[Gen] = []
    for g in cgens:
        nm = g.name
        while nm in taken:
            nm += "'"
        taken.add(nm)
        ren_c.append(Gen(nm, g.deg, g.weight))
    full = to_gens + tuple(ren_c)
    c_pos = o_pos + [len(to_gens) + k for k in range(len(cgens))]
    c_over = AlgebraPresentation(
        f"{tag}.scheme",
        t_over,
        tuple(ren_c),
        tuple(_transplant(r, full, c_pos) for r in crels),
    )
    lift = FiniteFreeMap(
        f"{tag}.lift",
        RATIONALS,
        t_over,
        [
            Polynomial.monomial(t_over.gens, e + tuple(be), 1)
            for e in t.monomial_basis()
            for be in over_basis
        ],
    )
    points = weil_restrict(c_over, lift, f"{tag}.points")
    return (
        points,
        lift,
        tuple(g.name for g in ren_o),
        tuple(g.name for g in ren_c),
    )


def _summary(scheme: AlgebraPresentation) -> dict:
    zero = scheme.is_zero_algebra
    gens = len(scheme.own_gens)
    rels = len(scheme.own_relations)
    count: int | None
    rank: int | None = None
    if zero:
        count = 0
    elif gens == 0:
        count = 1
    elif rels == 0:
        count = None
        rank = gens
    else:
        count = None
    return {
        "zero_algebra": zero,
        "generators": gens,
        "relations": rels,
        "count": count,
        "affine_rank": rank,
    }


@dataclass(frozen=True)
class PointsReport:
    name: str
    lhs: dict
    rhs: dict
    conditions: tuple[ConditionCheck, ...]
    samples: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "samples": self.samples,
            "conditions": [c.as_dict() for c in self.conditions],
            "passed": self.passed,
        }


def check_functor_of_points(
    w: WeilRestrictionResult,
    t: AlgebraPresentation,
    samples: int = 5,
    seed: int = 0,
) -> PointsReport:
    """Compare points of the restriction with points of the original scheme.

    Both solution sets are themselves presented as affine schemes over the
    rationals by a second restriction, so emptiness and affine rank compare
    exactly. When both sides are relation-free, sampled points are
    transported through the evaluation map and back and must round-trip to
    themselves.
    """
    f = w.map
    if f.source is not RATIONALS:
        raise UnsupportedInputError(
            "check_functor_of_points: the base of the restriction must be "
            "the rationals"
        )
    if not t.is_finite_dimensional:
        raise UnsupportedInputError(
            f"check_functor_of_points: test algebra {t.name!r} is not "
            "finite-dimensional"
        )
    if not t.is_discrete:
        raise UnsupportedInputError(
            f"check_functor_of_points: test algebra {t.name!r} must be discrete"
        )

    lhs_res, _, _, _ = _point_scheme(
        w.presentation, RATIONALS, t, [()], f"{w.name}.lhs"
    )
    rhs_res, lift, over_names, own_names = _point_scheme(
        w.source, f.target, t, f.basis_exps, f"{w.name}.rhs"
    )
    lhs, rhs = _summary(lhs_res.presentation), _summary(rhs_res.presentation)

    conditions = [
        ConditionCheck(
            "empty_agrees",
            lhs["zero_algebra"] == rhs["zero_algebra"],
            f"lhs {lhs['zero_algebra']}, rhs {rhs['zero_algebra']}",
        ),
        ConditionCheck(
            "count_agrees",
            lhs["count"] == rhs["count"],
            f"lhs {lhs['count']}, rhs {rhs['count']}",
        ),
        ConditionCheck(
            "affine_rank_agrees",
            lhs["affine_rank"] == rhs["affine_rank"],
            f"lhs {lhs['affine_rank']}, rhs {rhs['affine_rank']}",
        ),
    ]

    done = 0
    if (
        lhs["affine_rank"] is not None
        and rhs["affine_rank"] is not None
        and samples > 0
    ):
        rnd = _random.Random(seed)
        tb = lift.target
        monos = t.monomial_basis()
        t_pos = list(range(len(t.gens)))
        own = [g for g in w.source.gens if g.name in w.coordinates]
        # the basis of the map, re-expressed inside the extended test algebra
        over_pos = {g.name: over_names[k] for k, g in enumerate(f.target.gens)}
        bmap = [len(t.gens) + k for k in range(len(over_names))]
        unit = FiniteFreeMap(
            f"{w.name}.t.unit",
            t,
            tb,
            [
                _transplant(b, tb.gens, bmap)
                for b in w.map.basis
            ],
        )

        def rand_t() -> Polynomial:
            return Polynomial(
                t.gens, {e: Fraction(rnd.randint(-3, 3)) for e in monos}
            )

        def rand_tb() -> Polynomial:
            return tb.reduce(
                Polynomial(
                    tb.gens,
                    {
                        e: Fraction(rnd.randint(-3, 3))
                        for e in tb.monomial_basis()
                    },
                )
            )

        def forward(pt: AlgebraMap) -> AlgebraMap:
            into = AlgebraMap(
                "into",
                w.tensor,
                tb,
                {
                    z.name: _transplant(
                        pt.apply(w.presentation.g(z.name)), tb.gens, t_pos
                    )
                    for z in w.presentation.own_gens
                }
                | {g.name: tb.g(over_pos[g.name]) for g in f.target.gens},
                check=False,
            )
            comp = w.ev.then(into)
            # rebuilding with checks on is the bijection content: the images
            # must kill the relations of the original scheme
            return AlgebraMap(
                "q",
                rhs_res.source,
                tb,
                {
                    own_names[k]: comp.apply(w.source.g(g.name))
                    for k, g in enumerate(own)
                },
            )

        def backward(q: AlgebraMap) -> AlgebraMap:
            vals: dict[str, Polynomial] = {}
            for k, g in enumerate(own):
                coeffs = unit.expand(q.apply(rhs_res.source.g(own_names[k])))
                for i, z in enumerate(w.coordinates[g.name]):
                    vals[z] = coeffs[i]
            return AlgebraMap("pt", w.presentation, t, vals)

        ok = True
        detail = None
        for trial in range(samples):
            pt = AlgebraMap(
                "pt",
                w.presentation,
                t,
                {z.name: rand_t() for z in w.presentation.own_gens},
            )
            back = backward(forward(pt))
            if any(
                back.apply(w.presentation.g(z.name))
                != pt.apply(w.presentation.g(z.name))
                for z in w.presentation.own_gens
            ):
                ok = False
                detail = f"sample {trial}: restriction side round trip failed"
                break
            q = AlgebraMap(
                "q",
                rhs_res.source,
                tb,
                {nm: rand_tb() for nm in own_names},
            )
            again = forward(backward(q))
            if any(
                again.apply(rhs_res.source.g(nm)) != q.apply(rhs_res.source.g(nm))
                for nm in own_names
            ):
                ok = False
                detail = f"sample {trial}: scheme side round trip failed"
                break
            done += 1
        conditions.append(ConditionCheck("samples_round_trip", ok, detail))

    return PointsReport(w.name, lhs, rhs, tuple(conditions), done)


# -- foliations -----------------------------------------------------------------


class PushedForwardFoliation(FoliationPresentation):
    """Foliation on a restricted scheme, remembering where it came from."""

    def __init__(self, *args, source_foliation=None, along=None, weil=None):
        super().__init__(*args)
        self.source_foliation = source_foliation
        self.along = along
        self.weil = weil


def pushforward_foliation(
    fol: FoliationPresentation,
    f: FiniteFreeMap,
    name: str | None = None,
    window: Window | None = None,
) -> PushedForwardFoliation:
    """Transport a foliation down a finite free map.

    The scheme restricts by `weil_restrict`; each mixed generator u splits
    into coordinates u_i, and both structure operators transport by the same
    rule: substitute every expansion, reduce, extract the i-th coefficient.
    The transported identities are re-checked on generators, and the
    cotangent is compared entrywise against the direct image of the pulled
    cotangent, which is the defining formula.
    """
    if fol.base is not f.target:
        raise TypeMismatchError(
            f"push-forward of {fol.name!r}: the foliation is relative to "
            f"{fol.base.name!r}, not to the target of {f.name!r}"
        )
    name = name or f"{fol.name}.direct"
    w = weil_restrict(fol.owner, f, f"{name}.scheme")
    wpres = w.presentation
    nb = f.rank
    n0 = len(f.source.gens)
    nz = len(wpres.own_gens)

    used = {g.name for g in wpres.gens}
    ugens: list[Gen] = []
    for u in fol.mixed.mixed_gens:
        for i in range(nb):
            nm = f"{u.name}{i}"
            while nm in used:
                nm += "'"
            used.add(nm)
            ugens.append(Gen(nm, u.deg, 1))

    sym = AlgebraPresentation(f"{name}.sym", wpres, tuple(ugens))
    n_sw = len(sym.gens)
    bey = f.target.gens[n0:]
    bey_rels = [
        r for r in f.target.relations if any(any(e[n0:]) for e in r.terms)
    ]
    posmap = list(range(n0)) + [n_sw + k for k in range(len(bey))]
    big = AlgebraPresentation(
        f"{name}.carrier",
        sym,
        bey,
        tuple(_transplant(r, sym.gens + bey, posmap) for r in bey_rels),
    )

    # substitution images of every generator of the source mixed algebra
    bgens = big.gens
    alg = fol.mixed.algebra
    own = list(fol.owner.gens[len(f.target.gens) :])
    own_pos = {g.name: k for k, g in enumerate(own)}
    u_pos = {u.name: t for t, u in enumerate(fol.mixed.mixed_gens)}

    def expanded(column: int) -> Polynomial:
        acc = Polynomial.zero(bgens)
        for i in range(nb):
            e = [0] * len(bgens)
            e[column + i] = 1
            for m, a in enumerate(f.basis_exps[i]):
                if a:
                    e[n_sw + m] = a
            acc = acc + Polynomial.monomial(bgens, tuple(e), 1)
        return acc

    sub: list[Polynomial] = []
    for g in alg.gens:
        if g.name in own_pos:
            sub.append(expanded(n0 + own_pos[g.name] * nb))
        elif g.name in u_pos:
            sub.append(expanded(n0 + nz + u_pos[g.name] * nb))
        else:
            # scalars of the source and extension generators keep their names
            sub.append(big.g(g.name))

    def transport(p: Polynomial) -> list[Polynomial]:
        q = big.reduce(apply_map(alg.embed(p), sub, bgens))
        cols: list[dict] = [dict() for _ in range(nb)]
        for e, cv in q.terms.items():
            s = f._slot.get(e[n_sw:])
            if s is None:
                raise NotFiniteFreeError(
                    f"push-forward of {fol.name!r}: image {q!r} leaves the "
                    "basis span"
                )
            cols[s][e[:n_sw]] = cv
        return [Polynomial(sym.gens, d) for d in cols]

    d_images: dict[str, Polynomial] = {}
    eps_images: dict[str, Polynomial] = {}
    for g in own:
        parts = transport(fol.mixed.eps_reduced(fol.owner.g(g.name)))
        for i in range(nb):
            if not parts[i].is_zero():
                eps_images[w.coordinates[g.name][i]] = parts[i]
    for t, u in enumerate(fol.mixed.mixed_gens):
        dparts = transport(fol.mixed.d_reduced(alg.g(u.name)))
        eparts = transport(fol.mixed.eps_reduced(alg.g(u.name)))
        for i in range(nb):
            nm = ugens[t * nb + i].name
            if not dparts[i].is_zero():
                d_images[nm] = dparts[i]
            if not eparts[i].is_zero():
                eps_images[nm] = eparts[i]

    mixed = GradedMixedPresentation(
        name,
        f.source,
        wpres,
        tuple(ugens),
        d_images,
        eps_images,
        quasi_free=True,
    )

    # transported identities, exactly, generator by generator
    malg = mixed.algebra
    for g in tuple(wpres.own_gens) + tuple(ugens):
        gp = malg.g(g.name)
        for label, val in (
            ("mixed square", mixed.eps_reduced(mixed.eps(malg.embed(gp)))),
            ("d square", malg.d_reduced(malg.d(malg.embed(gp)))),
            (
                "anticommutator",
                malg.reduce(
                    malg.d(mixed.eps(malg.embed(gp)))
                    + mixed.eps(malg.d(malg.embed(gp)))
                ),
            ),
        ):
            if not malg.reduce(val).is_zero():
                raise InputError(
                    f"push-forward of {fol.name!r}: transported {label} "
                    f"fails on {g.name!r}"
                )

    cot = _desuspend(mixed.weight_piece(1))
    direct = f_plus(fol.cotangent.base_change(w.ev), w.induced)
    if cot.terms != direct.terms or cot.diffs != direct.diffs:
        raise InputError(
            f"push-forward of {fol.name!r}: transported cotangent disagrees "
            "with the direct image of the pulled cotangent"
        )

    base_cot = cotangent_lci(wpres, window=window)
    anchor = _anchor_from_eps(mixed, base_cot, cot)
    return PushedForwardFoliation(
        name,
        mixed,
        cot,
        anchor,
        base_cot,
        source_foliation=fol,
        along=f,
        weil=w,
    )


# -- the tangent formula ----------------------------------------------------------


@dataclass(frozen=True)
class TangentAtPointReport:
    """Per-degree dimensions of both sides of the tangent comparison."""

    name: str
    mode: str
    left: dict[int, int] = field(default_factory=dict)
    right: dict[int, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.left == self.right

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "left": {str(k): v for k, v in sorted(self.left.items())},
            "right": {str(k): v for k, v in sorted(self.right.items())},
            "passed": self.passed,
        }


def _by_degree(dims: dict[int, int]) -> dict[int, int]:
    # homology is reported by chain index; displayed degree is its negative
    return {-n: d for n, d in dims.items()}


def tangent_at_point(
    arg: PushedForwardFoliation | WeilRestrictionResult,
    g: AlgebraMap,
    window: Window | None = None,
) -> TangentAtPointReport:
    """Compare the tangent of the restricted foliation at a point with the
    sections of the fiber tangents.

    The left side specializes the restricted cotangent at the point and
    dualizes. The right side sums the relative tangent of the covering
    scheme with the pulled-back foliation tangent and restricts scalars.
    For mapping data the restricted cotangent is rebuilt from the absolute
    cotangent of the product, which folds the fiber directions in.
    """
    if isinstance(arg, PushedForwardFoliation):
        w = arg.weil
        mode = "pushforward"
    elif isinstance(arg, WeilRestrictionResult) and arg.factor is not None:
        w = arg
        mode = "mapping"
    else:
        raise TypeMismatchError(
            "tangent_at_point expects a pushed-forward foliation or the "
            "result of mapping_scheme"
        )
    f = w.map
    if f.source is not RATIONALS:
        raise UnsupportedInputError(
            "tangent_at_point: the base must be the rationals"
        )
    if g.source is not w.presentation or g.target is not RATIONALS:
        raise TypeMismatchError(
            f"tangent_at_point: {g.name!r} is not a rational point of "
            f"{w.presentation.name!r}"
        )

    if mode == "pushforward":
        left_cot = arg.cotangent
    else:
        c = w.source
        flat = AlgebraPresentation(
            f"{c.name}.abs", RATIONALS, c.gens, c.relations
        )
        labs = cotangent_lci(flat, window=window).complex
        ev_flat = AlgebraMap(
            f"{w.name}.ev.abs",
            flat,
            w.tensor,
            {x.name: img for x, img in zip(c.gens, w.ev.images)},
            check=False,
        )
        left_cot = f_plus(labs.base_change(ev_flat), w.induced)
    left = _by_degree(homology_dims(left_cot.base_change(g).dual()))

    b = f.target
    const = {
        z.name: b.const(g.apply(w.presentation.g(z.name)).terms.get((), Fraction(0)))
        for z in w.presentation.own_gens
    }
    to_fiber = AlgebraMap(f"{g.name}.fiber", w.tensor, b, const)
    g_hat = w.ev.then(to_fiber)

    tx = cotangent_lci(b, window=window).complex.dual()
    if mode == "pushforward":
        src = arg.source_foliation
        tf = src.cotangent.dual().base_change(g_hat)
    else:
        y = w.factor
        c = w.source
        names = w.factor_names
        gy = AlgebraMap(
            f"{g.name}.factor",
            y,
            b,
            {
                g0.name: g_hat.apply(c.g(names[k]))
                for k, g0 in enumerate(y.own_gens)
            },
        )
        tf = cotangent_lci(y, window=window).complex.dual().base_change(gy)
    right = _by_degree(homology_dims(restrict_scalars(tx.direct_sum(tf), f)))

    return TangentAtPointReport(f"{w.name}@{g.name}", mode, left, right)
