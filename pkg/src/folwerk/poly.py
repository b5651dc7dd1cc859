"""Graded-commutative polynomials over the rationals, exact.

A generator carries a name, a displayed homological degree, and a weight.
Generators of odd degree anticommute and square to zero; even generators
commute. Monomials are exponent tuples over a fixed generator tuple, kept in
declaration order; the Koszul sign of any reordering is handled inside the
kernel multiply.

Scalars are fractions.Fraction throughout: lowest terms and positive
denominators come for free, and arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from ._kernel import merge_mul


class Gen(NamedTuple):
    name: str
    deg: int = 0
    weight: int = 0

    @property
    def parity(self) -> int:
        return self.deg & 1


def parities(gens: Sequence[Gen]) -> tuple[int, ...]:
    return tuple(g.parity for g in gens)


class Polynomial:
    """Immutable-by-convention polynomial over a fixed generator tuple."""

    __slots__ = ("gens", "terms")

    def __init__(self, gens: tuple[Gen, ...], terms: Mapping[tuple[int, ...], Fraction]):
        self.gens = gens
        self.terms = {e: c for e, c in terms.items() if c}

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(gens: tuple[Gen, ...]) -> "Polynomial":
        return Polynomial(gens, {})

    @staticmethod
    def const(gens: tuple[Gen, ...], c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(gens)
        return Polynomial(gens, {(0,) * len(gens): c})

    @staticmethod
    def one(gens: tuple[Gen, ...]) -> "Polynomial":
        return Polynomial.const(gens, 1)

    @staticmethod
    def gen(gens: tuple[Gen, ...], i: int) -> "Polynomial":
        exps = [0] * len(gens)
        exps[i] = 1
        return Polynomial(gens, {tuple(exps): Fraction(1)})

    @staticmethod
    def monomial(gens: tuple[Gen, ...], exps: tuple[int, ...], c=1) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(gens)
        return Polynomial(gens, {tuple(exps): c})

    # -- predicates and views ---------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.gens == other.gens
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.gens, tuple(sorted(self.terms.items()))))

    def term_items(self):
        return sorted(self.terms.items())

    def constant_part(self) -> Fraction:
        return self.terms.get((0,) * len(self.gens), Fraction(0))

    # -- grading -----------------------------------------------------------

    def term_deg(self, exps: tuple[int, ...]) -> int:
        return sum(a * g.deg for a, g in zip(exps, self.gens))

    def term_weight(self, exps: tuple[int, ...]) -> int:
        return sum(a * g.weight for a, g in zip(exps, self.gens))

    @staticmethod
    def term_polydeg(exps: tuple[int, ...]) -> int:
        return sum(exps)

    def bidegree(self) -> tuple[int, int] | None:
        """(deg, weight) when homogeneous, None when zero; raises otherwise."""
        seen: set[tuple[int, int]] = set()
        for e in self.terms:
            seen.add((self.term_deg(e), self.term_weight(e)))
        if not seen:
            return None
        if len(seen) > 1:
            raise ValueError(f"inhomogeneous polynomial: bidegrees {sorted(seen)}")
        return seen.pop()

    def max_polydeg(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if self.gens != other.gens:
            raise ValueError("polynomials over different generator tuples")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, Fraction(0)) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial(self.gens, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.gens, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(self.gens)
        return Polynomial(self.gens, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        if not self.terms or not other.terms:
            return Polynomial.zero(self.gens)
        a = [(e, c.numerator, c.denominator) for e, c in self.terms.items()]
        b = [(e, c.numerator, c.denominator) for e, c in other.terms.items()]
        merged = merge_mul(a, b, parities(self.gens))
        return Polynomial(self.gens, {e: Fraction(n, d) for e, n, d in merged})

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.one(self.gens)
        for _ in range(k):
            out = out * self
        return out

    # -- monomial order (degree-lexicographic, declaration order) -----------

    @staticmethod
    def order_key(exps: tuple[int, ...]):
        return (sum(exps), exps)

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=Polynomial.order_key)
        return e, self.terms[e]

    # -- display -------------------------------------------------------------

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda t: Polynomial.order_key(t[0]), reverse=True):
            factors = []
            for g, a in zip(self.gens, e):
                if a == 1:
                    factors.append(g.name)
                elif a > 1:
                    factors.append(f"{g.name}^{a}")
            mono = "*".join(factors) if factors else "1"
            if c == 1 and factors:
                parts.append(mono)
            elif c == -1 and factors:
                parts.append(f"-{mono}")
            elif factors:
                parts.append(f"{c}*{mono}")
            else:
                parts.append(str(c))
        out = " + ".join(parts)
        return out.replace("+ -", "- ")


def apply_map(
    p: Polynomial,
    images: Sequence[Polynomial],
    target_gens: tuple[Gen, ...],
) -> Polynomial:
    """Extend a generator assignment to an algebra map and apply it.

    `images[i]` is the image of the i-th source generator; factors are
    substituted left to right so Koszul reordering happens inside multiply.
    """
    out = Polynomial.zero(target_gens)
    for exps, coeff in sorted(p.terms.items()):
        term = Polynomial.const(target_gens, coeff)
        for i, a in enumerate(exps):
            if not a:
                continue
            img = images[i]
            for _ in range(a):
                term = term * img
            if term.is_zero():
                break
        out = out + term
    return out


class Derivation:
    """Graded derivation fixed by images of generators, extended by Leibniz.

    The operator has a bidegree (deg_shift, weight_shift); its sign rule uses
    the parity of deg_shift. Images must be homogeneous of the shifted
    bidegree (checked by the owning structure, not here).
    """

    __slots__ = ("gens", "images", "deg_shift", "weight_shift")

    def __init__(
        self,
        gens: tuple[Gen, ...],
        images: Mapping[int, Polynomial],
        deg_shift: int,
        weight_shift: int = 0,
    ):
        self.gens = gens
        self.images = {i: p for i, p in images.items() if p and not p.is_zero()}
        self.deg_shift = deg_shift
        self.weight_shift = weight_shift

    @property
    def parity(self) -> int:
        return self.deg_shift & 1

    def __call__(self, p: Polynomial) -> Polynomial:
        n = len(self.gens)
        out = Polynomial.zero(self.gens)
        odd_op = self.parity
        for exps, coeff in sorted(p.terms.items()):
            pref_par = 0
            for i in range(n):
                a = exps[i]
                if not a:
                    continue
                img = self.images.get(i)
                if img is not None:
                    left = exps[:i] + (a - 1,) + (0,) * (n - i - 1)
                    right = (0,) * (i + 1) + exps[i + 1 :]
                    t = Polynomial.monomial(self.gens, left, coeff * a)
                    t = t * img
                    if any(right):
                        t = t * Polynomial.monomial(self.gens, right, 1)
                    if odd_op and (pref_par & 1):
                        t = -t
                    out = out + t
                pref_par += a * self.gens[i].parity
        return out


def compose_images(
    first: Sequence[Polynomial],
    then_images: Sequence[Polynomial],
    target_gens: tuple[Gen, ...],
) -> list[Polynomial]:
    """Images of a composite map: apply `then` to each image under `first`."""
    return [apply_map(p, list(then_images), target_gens) for p in first]


def expand_over_monomials(
    polys: Iterable[Polynomial],
) -> tuple[list[tuple[int, ...]], list[list[Fraction]]]:
    """Coordinate vectors of polynomials over the union of their monomials.

    Returns (sorted monomial list, row per polynomial). Used to hand exact
    linear algebra a deterministic basis.
    """
    polys = list(polys)
    monos = sorted({e for p in polys for e in p.terms})
    index = {e: i for i, e in enumerate(monos)}
    rows = []
    for p in polys:
        row = [Fraction(0)] * len(monos)
        for e, c in p.terms.items():
            row[index[e]] = c
        rows.append(row)
    return monos, rows
