"""Finitely presented graded algebras over the rationals, with exact reduction.

An AlgebraPresentation is a tower: an optional base presentation, new
generators (displayed degree <= 0 for algebra generators; weight is carried
for the graded mixed layer), relations, and a differential given on
generators. The flattened generator tuple is base generators first, then own
generators, so base scalars are ordinary variables of the flattened ring.

Normal forms use a completed rewriting basis of the relation ideal under the
degree-lexicographic order with generator significance = declaration order.
Completion is Buchberger's procedure with a step budget; every constructed
basis element carries an exact certificate (cofactors over the declared
relations), so reductions can be replayed as identities when a caller needs
to lift elements through the presentation.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .errors import (
    BudgetExceededError,
    InputError,
    MissingBoundError,
    NotAMapError,
    TypeMismatchError,
)
from .poly import Derivation, Gen, Polynomial, apply_map
from .windows import DEFAULT_COMPLETION_BUDGET, budget


def _divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mono_sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Exponent quotient b / a, assuming a divides b."""
    return tuple(y - x for x, y in zip(a, b))


def _mono_lcm(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(max(x, y) for x, y in zip(a, b))


class _Tracked:
    """A polynomial together with cofactors over the declared relations."""

    __slots__ = ("poly", "rep")

    def __init__(self, poly: Polynomial, rep: list[Polynomial]):
        self.poly = poly
        self.rep = rep


class AlgebraPresentation:
    """Tower presentation of a graded-commutative dg algebra over Q."""

    def __init__(
        self,
        name: str,
        base: "AlgebraPresentation | None",
        own_gens: Sequence[Gen],
        own_relations: Sequence[Polynomial] = (),
        differential: Mapping[str, Polynomial] | None = None,
        completion_budget: int | None = None,
    ):
        self.name = name
        self.base = base
        base_gens = base.gens if base is not None else ()
        names = [g.name for g in base_gens] + [g.name for g in own_gens]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate generator names in presentation {name!r}")
        self.own_gens = tuple(own_gens)
        self.gens: tuple[Gen, ...] = tuple(base_gens) + self.own_gens
        self._index = {g.name: i for i, g in enumerate(self.gens)}
        self.budget = completion_budget if completion_budget is not None else budget(DEFAULT_COMPLETION_BUDGET)

        lifted: list[Polynomial] = []
        if base is not None:
            for r in base.relations:
                lifted.append(self._embed_from_base(r))
        own_rel = []
        for r in own_relations:
            if r.gens != self.gens:
                raise TypeMismatchError(
                    f"relation of {name!r} written over a different generator tuple"
                )
            if r.is_zero():
                continue
            bid = r.bidegree()
            if bid is not None and bid != (0, 0):
                raise InputError(
                    f"relation {r!r} of {name!r} is not homogeneous of degree 0, weight 0"
                )
            for e in r.terms:
                for i, a in enumerate(e):
                    if a and (self.gens[i].deg != 0 or self.gens[i].weight != 0):
                        raise InputError(
                            f"relation {r!r} of {name!r} involves the non-central "
                            f"generator {self.gens[i].name!r}"
                        )
            own_rel.append(r)
        self.own_relations = tuple(own_rel)
        self.relations: tuple[Polynomial, ...] = tuple(lifted) + self.own_relations

        diff: dict[int, Polynomial] = {}
        if base is not None:
            for i, img in base.differential_images.items():
                diff[i] = self._embed_from_base(img)
        if differential:
            for gname, img in differential.items():
                if gname not in self._index:
                    raise InputError(f"differential on unknown generator {gname!r}")
                i = self._index[gname]
                if i < len(base_gens):
                    raise InputError(
                        f"differential on base generator {gname!r} must be set on the base"
                    )
                if img.gens != self.gens:
                    raise TypeMismatchError("differential image over a different generator tuple")
                if not img.is_zero():
                    bid = img.bidegree()
                    want = (self.gens[i].deg + 1, self.gens[i].weight)
                    if bid != want:
                        raise InputError(
                            f"d({gname}) has bidegree {bid}, expected {want}"
                        )
                    diff[i] = img
        self.differential_images: dict[int, Polynomial] = diff

    # -- embedding helpers ---------------------------------------------------

    def _embed_from_base(self, p: Polynomial) -> Polynomial:
        pad = len(self.gens) - len(p.gens)
        return Polynomial(self.gens, {e + (0,) * pad: c for e, c in p.terms.items()})

    def embed(self, p: Polynomial) -> Polynomial:
        """Rewrite a polynomial of an ancestor presentation over this tower."""
        if p.gens == self.gens:
            return p
        anc = self.base
        while anc is not None:
            if p.gens == anc.gens:
                return self._embed_from_base(p)
            anc = anc.base
        raise TypeMismatchError("polynomial does not come from this tower")

    # -- convenience constructors ---------------------------------------------

    def poly(self, mapping: Mapping[tuple[int, ...], Fraction]) -> Polynomial:
        return Polynomial(self.gens, mapping)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.gens)

    def one(self) -> Polynomial:
        return Polynomial.one(self.gens)

    def g(self, name: str) -> Polynomial:
        return Polynomial.gen(self.gens, self._index[name])

    def const(self, c) -> Polynomial:
        return Polynomial.const(self.gens, c)

    def gen_index(self, name: str) -> int:
        return self._index[name]

    @property
    def is_discrete(self) -> bool:
        return all(g.deg == 0 for g in self.gens) and not self.differential_images

    # -- rewriting basis -------------------------------------------------------

    @cached_property
    def _completed(self) -> list[_Tracked]:
        rels = list(self.relations)
        basis: list[_Tracked] = []
        nrel = len(rels)
        steps = [0]

        def unit_rep(k: int, factor: Polynomial) -> list[Polynomial]:
            rep = [self.zero()] * nrel
            rep[k] = factor
            return rep

        def reduce_tracked(t: _Tracked) -> _Tracked:
            p, rep = t.poly, list(t.rep)
            out = self.zero()
            while p.terms:
                e, c = p.leading()
                hit = None
                for b in basis:
                    le, lc = b.poly.leading()
                    if _divides(le, e):
                        hit = (b, le, lc)
                        break
                if hit is None:
                    out = out + Polynomial.monomial(self.gens, e, c)
                    p = p - Polynomial.monomial(self.gens, e, c)
                    continue
                steps[0] += 1
                if steps[0] > self.budget:
                    raise BudgetExceededError(
                        f"rewriting-basis completion for {self.name!r}", self.budget
                    )
                b, le, lc = hit
                q = Polynomial.monomial(self.gens, _mono_sub(le, e), c / lc)
                p = p - q * b.poly
                for k in range(nrel):
                    if b.rep[k]:
                        rep[k] = rep[k] - q * b.rep[k]
            return _Tracked(out, rep)

        for k, r in enumerate(rels):
            t = reduce_tracked(_Tracked(r, unit_rep(k, self.one())))
            if t.poly.terms:
                basis.append(t)

        pairs = [(i, j) for i in range(len(basis)) for j in range(i)]
        while pairs:
            pairs.sort(
                key=lambda ij: Polynomial.order_key(
                    _mono_lcm(basis[ij[0]].poly.leading()[0], basis[ij[1]].poly.leading()[0])
                )
            )
            i, j = pairs.pop(0)
            gi, gj = basis[i], basis[j]
            ei, ci = gi.poly.leading()
            ej, cj = gj.poly.leading()
            lcm = _mono_lcm(ei, ej)
            if all(a + b == m for a, b, m in zip(ei, ej, lcm)):
                continue  # coprime leading monomials: S-polynomial reduces to zero
            mi = Polynomial.monomial(self.gens, _mono_sub(ei, lcm), Fraction(1) / ci)
            mj = Polynomial.monomial(self.gens, _mono_sub(ej, lcm), Fraction(1) / cj)
            s_poly = mi * gi.poly - mj * gj.poly
            s_rep = [mi * a - mj * b for a, b in zip(gi.rep, gj.rep)]
            t = reduce_tracked(_Tracked(s_poly, s_rep))
            if t.poly.terms:
                basis.append(t)
                n = len(basis) - 1
                pairs.extend((n, k) for k in range(n))

        # make monic and inter-reduce tails for a canonical reduced basis
        monic: list[_Tracked] = []
        for b in basis:
            _, lc = b.poly.leading()
            inv = Fraction(1) / lc
            monic.append(_Tracked(b.poly.scale(inv), [r.scale(inv) for r in b.rep]))
        monic.sort(key=lambda b: Polynomial.order_key(b.poly.leading()[0]))
        kept: list[_Tracked] = []
        for i, b in enumerate(monic):
            others = [x for j, x in enumerate(monic) if j != i]
            le = b.poly.leading()[0]
            if any(_divides(o.poly.leading()[0], le) for o in others):
                continue
            kept.append(b)
        # tail-reduce each kept element against the others; a leading monomial
        # never divides a tail monomial of its own element under deglex
        reduced: list[_Tracked] = []
        for i, b in enumerate(kept):
            others = [x for j, x in enumerate(kept) if j != i]
            p, rep = b.poly, list(b.rep)
            le, _ = p.leading()
            head = Polynomial.monomial(self.gens, le, Fraction(1))
            tail = p - head
            out = self.zero()
            while tail.terms:
                e, c = tail.leading()
                hit = None
                for o in others:
                    oe, _ = o.poly.leading()
                    if _divides(oe, e):
                        hit = o
                        break
                if hit is None:
                    out = out + Polynomial.monomial(self.gens, e, c)
                    tail = tail - Polynomial.monomial(self.gens, e, c)
                    continue
                oe, oc = hit.poly.leading()
                q = Polynomial.monomial(self.gens, _mono_sub(oe, e), c / oc)
                tail = tail - q * hit.poly
                for k in range(nrel):
                    if hit.rep[k]:
                        rep[k] = rep[k] - q * hit.rep[k]
            reduced.append(_Tracked(head + out, rep))
        return reduced

    @cached_property
    def rewriting_basis(self) -> list[Polynomial]:
        return [b.poly for b in self._completed]

    @property
    def is_zero_algebra(self) -> bool:
        return any(all(x == 0 for x in b.poly.leading()[0]) for b in self._completed)

    def reduce(self, p: Polynomial) -> Polynomial:
        """Normal form modulo the completed rewriting basis."""
        p = self.embed(p)
        out = self.zero()
        basis = self._completed
        while p.terms:
            e, c = p.leading()
            hit = None
            for b in basis:
                le, _ = b.poly.leading()
                if _divides(le, e):
                    hit = b
                    break
            if hit is None:
                out = out + Polynomial.monomial(self.gens, e, c)
                p = p - Polynomial.monomial(self.gens, e, c)
                continue
            le, lc = hit.poly.leading()
            q = Polynomial.monomial(self.gens, _mono_sub(le, e), c / lc)
            p = p - q * hit.poly
        return out

    def reduce_with_certificate(self, p: Polynomial) -> tuple[Polynomial, list[Polynomial]]:
        """Normal form plus cofactors: p == nf + sum(cof[k] * relations[k])."""
        p = self.embed(p)
        nrel = len(self.relations)
        cof = [self.zero()] * nrel
        out = self.zero()
        basis = self._completed
        while p.terms:
            e, c = p.leading()
            hit = None
            for b in basis:
                le, _ = b.poly.leading()
                if _divides(le, e):
                    hit = b
                    break
            if hit is None:
                out = out + Polynomial.monomial(self.gens, e, c)
                p = p - Polynomial.monomial(self.gens, e, c)
                continue
            le, lc = hit.poly.leading()
            q = Polynomial.monomial(self.gens, _mono_sub(le, e), c / lc)
            p = p - q * hit.poly
            for k in range(nrel):
                if hit.rep[k]:
                    cof[k] = cof[k] + q * hit.rep[k]
        return out, cof

    def is_zero_mod(self, p: Polynomial) -> bool:
        return self.reduce(p).is_zero()

    # -- differential ----------------------------------------------------------

    @cached_property
    def d(self) -> Derivation:
        return Derivation(self.gens, self.differential_images, deg_shift=1, weight_shift=0)

    def d_reduced(self, p: Polynomial) -> Polynomial:
        return self.reduce(self.d(p))

    def validate(self) -> None:
        """Check d^2 = 0 on generators and d(ideal) inside the ideal."""
        for i in self.differential_images:
            sq = self.d(self.differential_images[i])
            if not self.is_zero_mod(sq):
                raise InputError(
                    f"d^2({self.gens[i].name}) reduces to {self.reduce(sq)!r}, not zero"
                )
        for r in self.relations:
            if not self.is_zero_mod(self.d(r)):
                raise InputError(f"d of relation {r!r} leaves the relation ideal")

    # -- monomial bases ---------------------------------------------------------

    def _standard(self, exps: tuple[int, ...]) -> bool:
        for b in self._completed:
            if _divides(b.poly.leading()[0], exps):
                return False
        return True

    @cached_property
    def is_finite_dimensional(self) -> bool:
        """Finite dimension over Q of the underlying graded algebra."""
        lead = [b.poly.leading()[0] for b in self._completed]
        for i, g in enumerate(self.gens):
            if g.parity:
                continue
            if g.deg != 0 or g.weight != 0:
                return False
            if not any(e[i] and all(x == 0 for j, x in enumerate(e) if j != i) for e in lead):
                return False
        return True

    def _caps(self, max_polydeg: int | None) -> list[int]:
        caps: list[int] = []
        lead = [b.poly.leading()[0] for b in self._completed]
        for i, g in enumerate(self.gens):
            if g.parity:
                caps.append(1)
                continue
            pure = [e[i] for e in lead if e[i] and all(x == 0 for j, x in enumerate(e) if j != i)]
            cap = min(pure) - 1 if pure else None
            if cap is None:
                if max_polydeg is None:
                    raise MissingBoundError(
                        f"presentation {self.name!r} is infinite-dimensional over Q; "
                        "a polynomial-degree bound is required"
                    )
                cap = max_polydeg
            elif max_polydeg is not None:
                cap = min(cap, max_polydeg)
            caps.append(cap)
        return caps

    def monomial_basis(
        self,
        max_polydeg: int | None = None,
        predicate=None,
    ) -> list[tuple[int, ...]]:
        """Standard monomials (a Q-basis of the quotient), deterministically ordered.

        `predicate(exps) -> bool` filters; `max_polydeg` bounds total exponent
        degree and is mandatory for infinite-dimensional presentations.
        """
        if self.is_zero_algebra:
            return []
        caps = self._caps(max_polydeg)
        n = len(self.gens)
        out: list[tuple[int, ...]] = []
        exps = [0] * n

        def rec(i: int, used: int):
            if i == n:
                e = tuple(exps)
                if self._standard(e) and (predicate is None or predicate(e)):
                    out.append(e)
                return
            top = caps[i]
            if max_polydeg is not None:
                top = min(top, max_polydeg - used)
            for a in range(top + 1):
                exps[i] = a
                rec(i + 1, used + a)
            exps[i] = 0

        rec(0, 0)
        out.sort(key=Polynomial.order_key)
        return out

    def dim(self) -> int:
        if not self.is_finite_dimensional:
            raise MissingBoundError(f"presentation {self.name!r} is not finite-dimensional")
        return len(self.monomial_basis())

    def __repr__(self) -> str:
        return f"AlgebraPresentation({self.name!r}, gens={[g.name for g in self.gens]})"


RATIONALS = AlgebraPresentation("Q", None, ())


class AlgebraMap:
    """Algebra map fixed on generators, validated against relations and d."""

    def __init__(
        self,
        name: str,
        source: AlgebraPresentation,
        target: AlgebraPresentation,
        images: Mapping[str, Polynomial],
        check: bool = True,
    ):
        self.name = name
        self.source = source
        self.target = target
        imgs: list[Polynomial] = []
        for g in source.gens:
            if g.name in images:
                img = images[g.name]
                if img.gens != target.gens:
                    img = target.embed(img)
                imgs.append(target.reduce(img))
            elif g.name in target._index:
                imgs.append(target.g(g.name))
            else:
                raise NotAMapError(
                    f"map {name!r}: no image for generator {g.name!r}"
                )
        self.images = imgs
        if check:
            self.validate()

    def validate(self) -> None:
        for g, img in zip(self.source.gens, self.images):
            if img.is_zero():
                continue
            bid = img.bidegree()
            if bid != (g.deg, g.weight):
                raise NotAMapError(
                    f"map {self.name!r}: image of {g.name} has bidegree {bid}, "
                    f"expected {(g.deg, g.weight)}"
                )
        for r in self.source.relations:
            if not self.target.is_zero_mod(apply_map(r, self.images, self.target.gens)):
                raise NotAMapError(
                    f"map {self.name!r}: relation {r!r} is not sent to zero"
                )
        if self.source.differential_images:
            for i, dimg in self.source.differential_images.items():
                lhs = self.apply(dimg)
                rhs = self.target.d_reduced(self.images[i])
                if lhs != rhs:
                    raise NotAMapError(
                        f"map {self.name!r}: does not commute with d on "
                        f"{self.source.gens[i].name}"
                    )

    def apply(self, p: Polynomial) -> Polynomial:
        p = self.source.embed(p)
        return self.target.reduce(apply_map(p, self.images, self.target.gens))

    def then(self, other: "AlgebraMap") -> "AlgebraMap":
        if other.source is not self.target:
            raise TypeMismatchError("maps not composable")
        images = {g.name: other.apply(img) for g, img in zip(self.source.gens, self.images)}
        return AlgebraMap(f"{other.name}.{self.name}", self.source, other.target, images, check=False)

    @staticmethod
    def identity(a: AlgebraPresentation) -> "AlgebraMap":
        return AlgebraMap("id", a, a, {g.name: Polynomial.gen(a.gens, i) for i, g in enumerate(a.gens)}, check=False)

    def __repr__(self) -> str:
        return f"AlgebraMap({self.name!r}: {self.source.name} -> {self.target.name})"
