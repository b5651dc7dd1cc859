"""Graded mixed algebras: weight-graded algebras with two anticommuting
square-zero operators.

A presentation is a tower: a scalar base A, a weight-0 algebra B over it, and
extra generators of weight >= 1. The internal differential d raises the
displayed homological degree by one at fixed weight; the mixed operator
raises the weight by one and lowers the displayed degree by one, so both
raise the total degree deg + 2*weight by one. The mixed operator is stored on
generators only and extended as an odd derivation; the structure identities
are verified by evaluation on a window of monomials rather than assumed.

Everything is strict at chain level. Homotopy-coherent mixed structures are
out of scope, and reports always record the window the checks ran in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import AlgebraMap, AlgebraPresentation
from .complexes import (
    ChainMap,
    Matrix,
    PerfectComplex,
    is_quasi_iso,
    sym_shift,
    zero_matrix,
)
from .errors import (
    InputError,
    MissingBoundError,
    NotAMapError,
    TypeMismatchError,
    UnsupportedInputError,
)
from .poly import Derivation, Gen, Polynomial, apply_map
from .windows import DEFAULT_WINDOW, Window


def _is_ancestor(a: AlgebraPresentation, b: AlgebraPresentation) -> bool:
    cur = b
    while cur is not None:
        if cur is a:
            return True
        cur = cur.base
    return False


class GradedMixedPresentation:
    """Weight-graded algebra over a tower A -> B with d and a mixed operator."""

    def __init__(
        self,
        name: str,
        base: AlgebraPresentation,
        weight0: AlgebraPresentation,
        mixed_gens: Sequence[Gen] = (),
        d_images: Mapping[str, Polynomial] | None = None,
        eps_images: Mapping[str, Polynomial] | None = None,
        quasi_free: bool | None = None,
        action: AlgebraMap | None = None,
    ):
        self.name = name
        self.base = base
        self.weight0 = weight0
        if not _is_ancestor(base, weight0):
            raise TypeMismatchError(
                f"{name!r}: scalar base {base.name!r} is not in the tower of {weight0.name!r}"
            )
        for g in weight0.gens:
            if g.weight != 0:
                raise InputError(
                    f"{name!r}: weight-0 part has generator {g.name!r} of weight {g.weight}"
                )
        for g in mixed_gens:
            if g.weight < 1:
                raise InputError(
                    f"{name!r}: mixed generator {g.name!r} has weight {g.weight} < 1"
                )
        self.mixed_gens = tuple(mixed_gens)
        self.algebra = AlgebraPresentation(f"{name}.alg", weight0, self.mixed_gens, (), d_images)
        eps: dict[int, Polynomial] = {}
        nbase = len(base.gens)
        for gname, img in (eps_images or {}).items():
            i = self.algebra.gen_index(gname)
            img = self.algebra.reduce(self.algebra.embed(img))
            if img.is_zero():
                continue
            if i < nbase:
                raise InputError(
                    f"{name!r}: mixed operator must vanish on the scalar base, "
                    f"got one on {gname!r}"
                )
            g = self.algebra.gens[i]
            bid = img.bidegree()
            want = (g.deg - 1, g.weight + 1)
            if bid != want:
                raise InputError(
                    f"{name!r}: mixed image of {gname} has bidegree {bid}, expected {want}"
                )
            eps[i] = img
        self.eps = Derivation(self.algebra.gens, eps, deg_shift=-1, weight_shift=1)
        self.quasi_free = (
            quasi_free
            if quasi_free is not None
            else all(g.weight == 1 for g in self.mixed_gens)
        )
        self.action = action

    # -- basic views ---------------------------------------------------------

    @property
    def d(self) -> Derivation:
        return self.algebra.d

    def eps_reduced(self, p: Polynomial) -> Polynomial:
        return self.algebra.reduce(self.eps(self.algebra.embed(p)))

    def d_reduced(self, p: Polynomial) -> Polynomial:
        return self.algebra.d_reduced(p)

    def exps_bidegree(self, e: tuple[int, ...]) -> tuple[int, int]:
        gens = self.algebra.gens
        return (
            sum(a * g.deg for a, g in zip(e, gens)),
            sum(a * g.weight for a, g in zip(e, gens)),
        )

    def __repr__(self) -> str:
        return f"GradedMixedPresentation({self.name!r} over {self.weight0.name})"

    def clone(self, name=None, base=None, action=None) -> "GradedMixedPresentation":
        out = GradedMixedPresentation.__new__(GradedMixedPresentation)
        out.name = name or self.name
        out.base = base or self.base
        out.weight0 = self.weight0
        out.mixed_gens = self.mixed_gens
        out.algebra = self.algebra
        out.eps = self.eps
        out.quasi_free = self.quasi_free
        out.action = action if action is not None else self.action
        return out

    # -- weight pieces ---------------------------------------------------------

    def weight_monomials(self, w: int) -> list[tuple[int, ...]]:
        """Monomials of weight w in the mixed generators, exponents only."""
        gens = self.mixed_gens
        k = len(gens)
        out: list[tuple[int, ...]] = []
        exps = [0] * k

        def rec(i: int, left: int):
            if i == k:
                if left == 0:
                    out.append(tuple(exps))
                return
            g = gens[i]
            top = left // g.weight
            if g.parity:
                top = min(top, 1)
            for a in range(top + 1):
                exps[i] = a
                rec(i + 1, left - a * g.weight)
            exps[i] = 0

        rec(0, w)
        # descending exponent order puts earlier generators first, so the
        # weight-1 basis follows the generator order
        out.sort(reverse=True)
        return out

    def weight_basis(self, w: int) -> dict[int, list[tuple[int, ...]]]:
        """Weight-w monomials in the mixed generators, grouped by degree."""
        by_deg: dict[int, list[tuple[int, ...]]] = {}
        for e in self.weight_monomials(w):
            d = sum(a * g.deg for a, g in zip(e, self.mixed_gens))
            by_deg.setdefault(d, []).append(e)
        return by_deg

    def weight_piece(self, w: int) -> PerfectComplex:
        """Weight-w part as a complex of free modules over the weight-0 algebra.

        Positive-weight generators are relation-free by construction (relations
        live in weight 0), so the weight-w monomials form an honest basis.
        """
        n0 = len(self.weight0.gens)
        by_deg = self.weight_basis(w)
        index: dict[tuple[int, ...], tuple[int, int]] = {}
        labels = {}
        for d, es in sorted(by_deg.items()):
            labs = []
            for j, e in enumerate(es):
                index[e] = (d, j)
                factors = [
                    g.name if a == 1 else f"{g.name}^{a}"
                    for a, g in zip(e, self.mixed_gens)
                    if a
                ]
                labs.append("*".join(factors) if factors else "1")
            labels[d] = labs
        terms = {d: len(es) for d, es in by_deg.items()}
        diffs: dict[int, Matrix] = {}
        gens_all = self.algebra.gens
        for d, es in by_deg.items():
            if (d + 1) not in by_deg:
                continue
            mat = zero_matrix(self.weight0, len(by_deg[d + 1]), len(es))
            wrote = False
            for j, e in enumerate(es):
                full = (0,) * n0 + e
                img = self.algebra.d_reduced(Polynomial.monomial(gens_all, full, 1))
                for fe, coef in img.terms.items():
                    mod_part = fe[n0:]
                    if mod_part not in index:
                        raise InputError(
                            f"{self.name!r}: differential image leaves the weight-{w} graph"
                        )
                    dd, jj = index[mod_part]
                    if dd != d + 1:
                        raise InputError(
                            f"{self.name!r}: differential spreads degree on the weight piece"
                        )
                    entry = Polynomial(self.weight0.gens, {fe[:n0]: coef})
                    mat[jj][j] = mat[jj][j] + entry
                    wrote = True
            if wrote:
                diffs[d] = mat
        return PerfectComplex(self.weight0, terms, diffs, labels)


# -- verification -----------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    failing_monomial: str | None = None

    def as_dict(self) -> dict:
        return {
            "identity": self.name,
            "passed": self.passed,
            "failing_monomial": self.failing_monomial,
        }


@dataclass(frozen=True)
class MixedVerificationReport:
    window: Window
    checks: tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "window": self.window.as_dict(),
            "passed": self.passed,
            "identities": [c.as_dict() for c in self.checks],
        }


def verify_mixed(
    f: GradedMixedPresentation,
    window: Window | None = None,
) -> MixedVerificationReport:
    """Evaluate the structure identities on every monomial in the window.

    Checks d^2 = 0, the square of the mixed operator, the anticommutator,
    A-linearity of the mixed operator, and both Leibniz rules on monomial
    pairs whose product stays inside the polynomial-degree bound.
    """
    alg = f.algebra
    if window is None:
        if not alg.is_finite_dimensional:
            raise MissingBoundError(
                f"verify_mixed on {f.name!r}: presentation is infinite-dimensional, "
                "a window is required"
            )
        window = DEFAULT_WINDOW
    wd = window

    def admit(e: tuple[int, ...]) -> bool:
        deg, wt = f.exps_bidegree(e)
        return wd.admits(wt, deg, sum(e))

    basis = alg.monomial_basis(max_polydeg=wd.poly_degree, predicate=admit)
    nbase = len(f.base.gens)

    def run(op_name: str, op) -> IdentityCheck:
        for e in basis:
            m = Polynomial.monomial(alg.gens, e, 1)
            if not alg.reduce(op(m)).is_zero():
                return IdentityCheck(op_name, False, repr(m))
        return IdentityCheck(op_name, True)

    d, eps = alg.d, f.eps
    checks = [
        run("d_squared", lambda m: d(d(m))),
        run("mixed_squared", lambda m: eps(eps(m))),
        run("anticommutator", lambda m: d(eps(m)) + eps(d(m))),
    ]

    base_fail = None
    for e in basis:
        if any(e[nbase:]):
            continue
        m = Polynomial.monomial(alg.gens, e, 1)
        if not alg.reduce(eps(m)).is_zero():
            base_fail = repr(m)
            break
    checks.append(IdentityCheck("base_linear", base_fail is None, base_fail))

    def leibniz(op, parity_sign: bool, name: str) -> IdentityCheck:
        for e1 in basis:
            deg1, _ = f.exps_bidegree(e1)
            sign = -1 if (parity_sign and (deg1 & 1)) else 1
            m1 = Polynomial.monomial(alg.gens, e1, 1)
            for e2 in basis:
                if sum(e1) + sum(e2) > wd.poly_degree:
                    continue
                m2 = Polynomial.monomial(alg.gens, e2, 1)
                lhs = op(m1 * m2)
                rhs = op(m1) * m2 + (m1 * op(m2)).scale(sign)
                if not alg.reduce(lhs - rhs).is_zero():
                    return IdentityCheck(name, False, f"{m1!r} | {m2!r}")
        return IdentityCheck(name, True)

    checks.append(leibniz(eps, True, "mixed_leibniz"))
    checks.append(leibniz(d, True, "d_leibniz"))
    return MixedVerificationReport(wd, tuple(checks))


def forget_gr(f: GradedMixedPresentation) -> AlgebraPresentation:
    """Drop the mixed operator; the underlying graded dg algebra remains."""
    return f.algebra


# -- maps -----------------------------------------------------------------------


class GradedMixedMap:
    """Algebra map between graded mixed presentations, commuting with d and
    the mixed operator; weight preservation rides on the bidegree check."""

    def __init__(
        self,
        name: str,
        source: GradedMixedPresentation,
        target: GradedMixedPresentation,
        images: Mapping[str, Polynomial],
        check: bool = True,
    ):
        self.name = name
        self.source = source
        self.target = target
        self.map = AlgebraMap(name, source.algebra, target.algebra, images, check=check)
        if check:
            self.validate_mixed()

    def validate_mixed(self) -> None:
        for i, g in enumerate(self.source.algebra.gens):
            lhs = self.map.apply(self.source.eps(Polynomial.gen(self.source.algebra.gens, i)))
            rhs = self.target.eps_reduced(self.map.images[i])
            if lhs != rhs:
                raise NotAMapError(
                    f"map {self.name!r}: does not commute with the mixed operator "
                    f"on {g.name}"
                )

    def apply(self, p: Polynomial) -> Polynomial:
        return self.map.apply(p)

    def weight0_restriction(self) -> AlgebraMap:
        n0s = len(self.source.weight0.gens)
        n0t = len(self.target.weight0.gens)
        imgs = {}
        for g, img in zip(self.source.algebra.gens[:n0s], self.map.images[:n0s]):
            for e in img.terms:
                if any(e[n0t:]):
                    raise NotAMapError(
                        f"map {self.name!r}: weight-0 image of {g.name} uses mixed generators"
                    )
            imgs[g.name] = Polynomial(
                self.target.weight0.gens, {e[:n0t]: c for e, c in img.terms.items()}
            )
        return AlgebraMap(
            f"{self.name}|w0", self.source.weight0, self.target.weight0, imgs, check=False
        )

    @staticmethod
    def identity(f: GradedMixedPresentation) -> "GradedMixedMap":
        gens = f.algebra.gens
        images = {g.name: Polynomial.gen(gens, i) for i, g in enumerate(gens)}
        return GradedMixedMap("id", f, f, images, check=False)

    def is_identity(self) -> bool:
        if self.source is not self.target:
            return False
        gens = self.source.algebra.gens
        return all(
            img == Polynomial.gen(gens, i) for i, img in enumerate(self.map.images)
        )

    def __repr__(self) -> str:
        return f"GradedMixedMap({self.name!r}: {self.source.name} -> {self.target.name})"


# -- quasi-free predicate ----------------------------------------------------------


def check_quasi_free(
    f: GradedMixedPresentation,
    weight_bound: int = 3,
) -> bool:
    """Executed rank test: weight pieces match Sym of the weight-1 piece.

    Compares, weight by weight up to the bound, the ranks of the weight-w
    piece against the graded-symmetric powers of the weight-1 piece computed
    by the independent machinery in complexes.sym_shift.
    """
    if any(g.weight != 1 for g in f.mixed_gens):
        return False
    w1 = f.weight_piece(1)
    expected = sym_shift(w1.shift(-1), weight_bound)
    for w in range(weight_bound + 1):
        got = f.weight_piece(w)
        if got.terms != expected[w].terms:
            return False
    return True


# -- push-forward and pull-back ------------------------------------------------------


def pushforward_gm(
    fprime: GradedMixedPresentation,
    g: GradedMixedMap,
) -> GradedMixedPresentation:
    """Restrict the structural action along a map of graded mixed algebras.

    The underlying bigraded data is unchanged; the result remembers that the
    algebra of g's source now acts through g (composed with any action the
    input already carried). Quasi-freeness is untouched.
    """
    acting = fprime.action.source if fprime.action is not None else fprime.weight0
    if g.target.weight0 is not acting:
        raise TypeMismatchError(
            "push-forward: map target does not act on the given presentation"
        )
    if g.is_identity():
        return fprime
    phi = g.weight0_restriction()
    action = phi if fprime.action is None else phi.then(fprime.action)
    return fprime.clone(
        name=f"{fprime.name}.res({g.name})",
        base=g.source.base,
        action=action,
    )


def pullback_gm(
    f: GradedMixedPresentation,
    phi: AlgebraMap,
    name: str | None = None,
    window: Window | None = None,
) -> GradedMixedPresentation:
    """Base change a quasi-free presentation along a map of weight-0 algebras.

    The target of phi must be smooth over its scalar base (a relation-free
    presentation on degree-0 generators): the result then has one copy of
    each positive-weight generator, the de Rham generators of the target, and
    one contractible suspension generator per source weight-0 generator whose
    differential glues the transported structural image to the chain-rule
    image. Strictness of the mixed identities is re-verified on the window
    and failure raises, since no preferred strict model exists in general.
    """
    if not f.quasi_free or any(g.weight != 1 for g in f.mixed_gens):
        raise UnsupportedInputError(
            f"pull-back of {f.name!r}: only quasi-free presentations with "
            "weight-1 generators are supported"
        )
    if phi.source is not f.weight0:
        raise TypeMismatchError("pull-back along a map not defined on the weight-0 part")
    if phi.source is phi.target and all(
        img == Polynomial.gen(phi.source.gens, i) for i, img in enumerate(phi.images)
    ):
        return f
    bprime = phi.target
    if bprime.base is None:
        raise UnsupportedInputError(
            f"pull-back of {f.name!r}: target {bprime.name!r} has no scalar base"
        )
    if bprime.own_relations or any(
        g.deg != 0 or g.weight != 0 for g in bprime.own_gens
    ) or bprime.differential_images:
        raise UnsupportedInputError(
            f"pull-back of {f.name!r}: target {bprime.name!r} is not smooth over "
            "its scalar base"
        )
    name = name or f"{f.name}.pb({phi.name})"
    aprime = bprime.base
    nb = len(f.weight0.gens)
    nbase_src = len(f.base.gens)
    if any(g.deg != 0 or g.weight != 0 for g in f.weight0.gens[nbase_src:]):
        raise UnsupportedInputError(
            f"pull-back of {f.name!r}: weight-0 part must be smooth over the "
            "scalar base, suspension generators only exist for degree-0 inputs"
        )

    taken = {g.name for g in bprime.gens}

    def fresh(want: str) -> str:
        while want in taken:
            want = want + "'"
        taken.add(want)
        return want

    u_names = [fresh(g.name) for g in f.mixed_gens]
    dr_names = [fresh(f"d{g.name}") for g in bprime.own_gens]
    s_src = [g for g in f.weight0.gens[nbase_src:]]
    s_names = [fresh(f"s{g.name}") for g in s_src]

    mixed_gens = (
        tuple(Gen(n, deg=g.deg, weight=1) for n, g in zip(u_names, f.mixed_gens))
        + tuple(Gen(n, deg=-1, weight=1) for n in dr_names)
        + tuple(Gen(n, deg=-2, weight=1) for n in s_names)
    )
    new_gens = bprime.gens + mixed_gens
    pos = {g.name: i for i, g in enumerate(new_gens)}

    # transport: weight-0 generators through phi, positive generators to copies
    transport_images: list[Polynomial] = []
    for i, g in enumerate(f.algebra.gens):
        if i < nb:
            img = phi.images[i]
            transport_images.append(
                Polynomial(new_gens, {e + (0,) * len(mixed_gens): c for e, c in img.terms.items()})
            )
        else:
            transport_images.append(
                Polynomial.gen(new_gens, pos[u_names[i - nb]])
            )

    def transport(p: Polynomial) -> Polynomial:
        return apply_map(p, transport_images, new_gens)

    d_images: dict[str, Polynomial] = {}
    eps_images: dict[str, Polynomial] = {}

    for k, g in enumerate(f.mixed_gens):
        src = Polynomial.gen(f.algebra.gens, nb + k)
        di = f.d_reduced(src)
        if not di.is_zero():
            d_images[u_names[k]] = transport(di)
        ei = f.eps_reduced(src)
        if not ei.is_zero():
            eps_images[u_names[k]] = transport(ei)

    for j, g in enumerate(bprime.own_gens):
        eps_images[g.name] = Polynomial.gen(new_gens, pos[dr_names[j]])

    for k, g in enumerate(s_src):
        src = Polynomial.gen(f.algebra.gens, f.weight0.gen_index(g.name))
        sigma = transport(f.eps_reduced(src))
        chain = Polynomial.zero(new_gens)
        img = phi.images[f.weight0.gen_index(g.name)]
        for j, xg in enumerate(bprime.own_gens):
            xj = bprime.gen_index(xg.name)
            partial = Derivation(
                bprime.gens, {xj: Polynomial.one(bprime.gens)}, deg_shift=0
            )(img)
            if not partial.is_zero():
                lifted = Polynomial(
                    new_gens, {e + (0,) * len(mixed_gens): c for e, c in partial.terms.items()}
                )
                chain = chain + lifted * Polynomial.gen(new_gens, pos[dr_names[j]])
        d_images[s_names[k]] = sigma - chain

    out = GradedMixedPresentation(
        name,
        aprime,
        bprime,
        mixed_gens,
        d_images,
        eps_images,
        quasi_free=True,
    )
    report = verify_mixed(out, window or DEFAULT_WINDOW)
    if not report.passed:
        bad = [c.name for c in report.checks if not c.passed]
        raise UnsupportedInputError(
            f"pull-back of {f.name!r} along {phi.name!r} has no strict model here: "
            f"identities failed: {', '.join(bad)}"
        )
    return out


def induced_weight_map(
    src: GradedMixedPresentation,
    dst: GradedMixedPresentation,
    gen_images: Mapping[str, Polynomial],
    w: int,
) -> ChainMap:
    """Multiplicative extension of mixed-generator images on one weight piece.

    Both presentations must share the weight-0 algebra. Each mixed generator
    of src gets an image in dst's algebra with the same bidegree; a weight-w
    monomial goes to the product of the images, expanded over dst's weight-w
    basis. The result is validated as a chain map, so a d-incompatible
    assignment fails loudly instead of producing a bogus comparison.
    """
    if src.weight0 is not dst.weight0:
        raise TypeMismatchError("weight comparison needs a shared weight-0 algebra")
    n0 = len(dst.weight0.gens)
    imgs: list[Polynomial] = []
    for g in src.mixed_gens:
        p = gen_images.get(g.name)
        if p is None:
            raise InputError(f"missing image for mixed generator {g.name!r}")
        p = dst.algebra.reduce(dst.algebra.embed(p))
        if not p.is_zero() and p.bidegree() != (g.deg, g.weight):
            raise NotAMapError(
                f"image of {g.name} has bidegree {p.bidegree()}, "
                f"expected {(g.deg, g.weight)}"
            )
        imgs.append(p)
    src_basis = src.weight_basis(w)
    dst_basis = dst.weight_basis(w)
    dindex: dict[tuple[int, ...], tuple[int, int]] = {}
    for d, es in dst_basis.items():
        for j, e in enumerate(es):
            dindex[e] = (d, j)
    mats: dict[int, Matrix] = {}
    for d, es in src_basis.items():
        rows = len(dst_basis.get(d, ()))
        mat = zero_matrix(dst.weight0, rows, len(es))
        wrote = False
        for j, e in enumerate(es):
            image = dst.algebra.one()
            for k, a in enumerate(e):
                for _ in range(a):
                    image = image * imgs[k]
            image = dst.algebra.reduce(image)
            for fe, coef in image.terms.items():
                dd, jj = dindex[fe[n0:]]
                assert dd == d
                entry = Polynomial(dst.weight0.gens, {fe[:n0]: coef})
                mat[jj][j] = mat[jj][j] + entry
                wrote = True
        if wrote:
            mats[d] = mat
    return ChainMap(src.weight_piece(w), dst.weight_piece(w), mats)


def pullback_comparison_ok(
    pulled: GradedMixedPresentation,
    direct: GradedMixedPresentation,
    gen_images: Mapping[str, Polynomial],
    weights: Sequence[int] = (1, 2),
    window: Window | None = None,
) -> bool:
    """Weight-by-weight quasi-isomorphism test between two models.

    gen_images assigns, to every mixed generator of the pulled-back model, its
    class in the direct model (transported generators to their chain-rule
    images, de Rham generators to themselves, suspensions to zero). True when
    the induced map on each requested weight piece has acyclic cone.
    """
    for w in weights:
        cm = induced_weight_map(pulled, direct, gen_images, w)
        if not is_quasi_iso(cm, window):
            return False
    return True
