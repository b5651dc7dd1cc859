"""Foliation data over an algebra tower, with executable defining conditions.

A foliation presentation bundles a perfect complex (the cotangent), an anchor
chain map from the differentials of the underlying algebra, and a graded mixed
structure on the free symmetric algebra over the shifted cotangent. The three
defining conditions (strict weight zero, quasi-freeness, perfectness) are run
as report entries rather than constructor errors, so a corrupted candidate can
be inspected instead of merely rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import AlgebraMap, AlgebraPresentation
from .complexes import ChainMap, PerfectComplex, cone, mat_scale, zero_matrix
from .cotangent import CotangentModel, cotangent_lci, de_rham, kaehler
from .errors import (
    IncompatibleOwnersError,
    InputError,
    TypeMismatchError,
    UnsupportedInputError,
)
from .graded_mixed import (
    GradedMixedPresentation,
    MixedVerificationReport,
    check_quasi_free,
    pullback_gm,
    verify_mixed,
)
from .poly import Derivation, Gen, Polynomial
from .windows import Window


def _desuspend(c: PerfectComplex) -> PerfectComplex:
    # inverse of the shift that turned cotangent rows into algebra generators:
    # move every term up one degree and flip the differential sign
    terms = {n + 1: r for n, r in c.terms.items()}
    diffs = {n + 1: mat_scale(m, -1) for n, m in c.diffs.items()}
    labels = {n + 1: list(c.labels[n]) for n in c.terms}
    return PerfectComplex(c.owner, terms, diffs, labels, check=False)


def _weight_one_rows(mixed: GradedMixedPresentation) -> dict[int, tuple[int, int]]:
    """Generator index -> (cotangent degree, row) in the weight-1 basis order."""
    rows: dict[int, tuple[int, int]] = {}
    for d, es in mixed.weight_basis(1).items():
        for j, e in enumerate(es):
            rows[e.index(1)] = (d + 1, j)
    return rows


def _anchor_from_eps(
    mixed: GradedMixedPresentation,
    base_cot: CotangentModel,
    cotangent: PerfectComplex,
) -> ChainMap:
    """The anchor encoded by the weight-0 component of the mixed operator.

    Each classed generator g of the owner has eps(g) linear in the weight-1
    generators; reading off the coefficients gives the column of the anchor
    at g's slot in the base cotangent model.
    """
    owner = mixed.weight0
    rows = _weight_one_rows(mixed)
    n0 = len(owner.gens)
    mats: dict[int, list] = {}
    for n in base_cot.complex.terms:
        if cotangent.rank(n):
            mats[n] = zero_matrix(owner, cotangent.rank(n), base_cot.complex.rank(n))
    for gname, (cdeg, col) in base_cot.classes.items():
        img = mixed.eps_reduced(mixed.algebra.g(gname))
        for e, c in img.terms.items():
            mod = e[n0:]
            if sum(mod) != 1:
                raise InputError(
                    f"{mixed.name!r}: mixed image of {gname!r} is not linear "
                    "in the weight-1 generators"
                )
            d, row = rows[mod.index(1)]
            if d != cdeg:
                raise InputError(
                    f"{mixed.name!r}: mixed image of {gname!r} lands in degree "
                    f"{d}, its differential class sits in degree {cdeg}"
                )
            coeff = Polynomial.monomial(owner.gens, e[:n0], c)
            mats[cdeg][row][col] = mats[cdeg][row][col] + coeff
    return ChainMap(base_cot.complex, cotangent, mats)


class FoliationPresentation:
    """Cotangent complex, anchor, and mixed structure over one algebra.

    The structural facts (the algebra is the free symmetric algebra on the
    shifted cotangent rows, the anchor is the weight-0 mixed component) are
    enforced here; the behavioural conditions run in verify_foliation.
    """

    def __init__(
        self,
        name: str,
        mixed: GradedMixedPresentation,
        cotangent: PerfectComplex,
        anchor: ChainMap,
        base_cotangent: CotangentModel,
    ):
        self.name = name
        self.mixed = mixed
        self.owner = mixed.weight0
        self.base = mixed.base
        for g in mixed.mixed_gens:
            if g.weight != 1:
                raise InputError(
                    f"{name!r}: foliation generator {g.name!r} has weight {g.weight}, want 1"
                )
        if cotangent.owner is not self.owner:
            raise IncompatibleOwnersError(
                f"{name!r}: cotangent complex lives over {cotangent.owner.name!r}"
            )
        amp = cotangent.amplitude()
        if amp is not None and amp[1] > 0:
            raise InputError(
                f"{name!r}: cotangent complex has a term in positive degree {amp[1]}"
            )
        wp1 = mixed.weight_piece(1)
        if wp1 != cotangent.shift(1) or any(
            cotangent.labels[n] != wp1.labels[n - 1] for n in cotangent.terms
        ):
            raise InputError(
                f"{name!r}: cotangent complex is not the desuspended weight-one piece"
            )
        if base_cotangent.owner is not self.owner:
            raise IncompatibleOwnersError(
                f"{name!r}: base cotangent model lives over {base_cotangent.owner.name!r}"
            )
        if anchor.source is not base_cotangent.complex or anchor.target is not cotangent:
            raise InputError(
                f"{name!r}: anchor must map the base cotangent model to the cotangent complex"
            )
        want = _anchor_from_eps(mixed, base_cotangent, cotangent)
        if anchor.mats != want.mats:
            raise InputError(
                f"{name!r}: anchor disagrees with the weight-0 mixed component"
            )
        self.cotangent = cotangent
        self.anchor = anchor
        self.base_cotangent = base_cotangent

    def __repr__(self) -> str:
        return f"FoliationPresentation({self.name}; over {self.owner.name})"


@dataclass(frozen=True)
class TangentComplex:
    complex: PerfectComplex

    def rank(self, n: int) -> int:
        return self.complex.rank(n)


def tangent(f: FoliationPresentation) -> TangentComplex:
    """Degreewise dual of the cotangent complex, transposed differentials."""
    return TangentComplex(f.cotangent.dual())


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    detail: str | None = None

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class FoliationReport:
    window: Window
    conditions: tuple[ConditionCheck, ...]
    mixed: MixedVerificationReport

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions) and self.mixed.passed

    def as_dict(self) -> dict:
        return {
            "window": self.window.as_dict(),
            "passed": self.passed,
            "conditions": [c.as_dict() for c in self.conditions],
            "mixed": self.mixed.as_dict(),
        }


def verify_foliation(f: FoliationPresentation, window: Window | None = None) -> FoliationReport:
    """Run the defining conditions and the mixed identities on the window."""
    mixed_rep = verify_mixed(f.mixed, window)
    w = mixed_rep.window
    wp0 = f.mixed.weight_piece(0)
    c1 = ConditionCheck(
        "weight_zero_is_base",
        wp0.terms == {0: 1} and wp0.owner is f.owner,
    )
    c2 = ConditionCheck(
        "quasi_free",
        check_quasi_free(f.mixed, w.weight),
        f"weight bound {w.weight}",
    )
    amp = f.cotangent.amplitude()
    c3 = ConditionCheck(
        "perfect_cotangent",
        (amp is None or amp[1] <= 0)
        and f.mixed.weight_piece(1) == f.cotangent.shift(1),
        f"amplitude {amp}",
    )
    return FoliationReport(w, (c1, c2, c3), mixed_rep)


# -- constructors ----------------------------------------------------------------


def final_foliation(b: AlgebraPresentation, window: Window | None = None) -> FoliationPresentation:
    """The de Rham mixed structure on the full cotangent, anchor the identity.

    Quotient inputs are routed through the Koszul semi-free model inside the
    de Rham constructor, so the owner of the result is the model then.
    """
    dr = de_rham(b, window=window)
    mixed = dr.mixed
    cot = _desuspend(mixed.weight_piece(1))
    anchor = _anchor_from_eps(mixed, dr.cotangent, cot)
    return FoliationPresentation(f"{b.name}.final", mixed, cot, anchor, dr.cotangent)


def zero_foliation(b: AlgebraPresentation, window: Window | None = None) -> FoliationPresentation:
    """Zero cotangent, zero mixed operator: the foliation with point leaves."""
    base = b.base if b.base is not None else b
    mixed = GradedMixedPresentation(f"{b.name}.zero", base, b)
    cot = PerfectComplex.zero(b)
    base_cot = cotangent_lci(b, window)
    anchor = _anchor_from_eps(mixed, base_cot, cot)
    return FoliationPresentation(f"{b.name}.zero", mixed, cot, anchor, base_cot)


def custom_foliation(
    name: str,
    owner: AlgebraPresentation,
    complex: PerfectComplex,
    eps=None,
    base_cotangent: CotangentModel | None = None,
    window: Window | None = None,
) -> FoliationPresentation:
    """Build a foliation from a perfect complex and a mixed-operator recipe.

    Each row of the complex becomes a weight-1 generator one degree lower,
    named by its row label (primed on collision); the generator differential
    is the negated complex differential, so the weight-one piece is the
    suspension of the input on the nose. eps is either None for the zero
    operator or a callable that receives a preview presentation exposing all
    generators and returns the generator-name -> image mapping.
    """
    if complex.owner is not owner:
        raise IncompatibleOwnersError(
            f"{name!r}: complex lives over {complex.owner.name!r}, want {owner.name!r}"
        )
    taken = {g.name for g in owner.gens}

    def fresh(want: str) -> str:
        while want in taken:
            want = want + "'"
        taken.add(want)
        return want

    grid: dict[tuple[int, int], str] = {}
    gens: list[Gen] = []
    for n in sorted(complex.terms):
        for i in range(complex.rank(n)):
            nm = fresh(complex.labels[n][i])
            grid[(n, i)] = nm
            gens.append(Gen(nm, deg=n - 1, weight=1))
    mixed_gens = tuple(gens)
    full = owner.gens + mixed_gens
    pad = (0,) * len(mixed_gens)
    pos = {nm: len(owner.gens) + k for k, nm in enumerate(g.name for g in mixed_gens)}

    d_images: dict[str, Polynomial] = {}
    for n, mat in complex.diffs.items():
        for i in range(complex.rank(n)):
            img = Polynomial.zero(full)
            for j in range(complex.rank(n + 1)):
                e = mat[j][i]
                if e.is_zero():
                    continue
                lifted = Polynomial(full, {ex + pad: c for ex, c in e.terms.items()})
                img = img + lifted * Polynomial.gen(full, pos[grid[(n + 1, j)]])
            if not img.is_zero():
                d_images[grid[(n, i)]] = img.scale(-1)

    eps_images = {}
    if eps is not None:
        preview = AlgebraPresentation(f"{name}.preview", owner, mixed_gens, (), d_images)
        eps_images = dict(eps(preview))

    base = owner.base if owner.base is not None else owner
    mixed = GradedMixedPresentation(name, base, owner, mixed_gens, d_images, eps_images, quasi_free=True)
    cot = _desuspend(mixed.weight_piece(1))
    base_cot = base_cotangent if base_cotangent is not None else cotangent_lci(owner, window)
    anchor = _anchor_from_eps(mixed, base_cot, cot)
    return FoliationPresentation(name, mixed, cot, anchor, base_cot)


# -- pull-back -------------------------------------------------------------------


def _pushout_parts(f: FoliationPresentation, phi: AlgebraMap):
    """Base-changed ingredients of the cotangent pushout along phi."""
    if phi.source is not f.owner:
        raise TypeMismatchError(
            f"pull-back of {f.name!r} along a map not defined on its owner"
        )
    bprime = phi.target
    x = f.base_cotangent.complex.base_change(phi)
    y1 = f.cotangent.base_change(phi)
    bk = kaehler(bprime)
    y2 = bk.complex
    y = y1.direct_sum(y2)
    mats: dict[int, list] = {}
    for n in x.terms:
        rows = y.rank(n)
        if not rows:
            continue
        m = zero_matrix(bprime, rows, x.rank(n))
        am = f.anchor.mat(n)
        for i in range(y1.rank(n)):
            for j in range(x.rank(n)):
                m[i][j] = phi.apply(am[i][j])
        if n == 0:
            # difference-map sign: the comparison leg into the target
            # differentials enters negated
            for gname, (cdeg, col) in f.base_cotangent.classes.items():
                if cdeg != 0:
                    continue
                img = phi.apply(f.owner.g(gname))
                for xg in bprime.own_gens:
                    xj = bprime.gen_index(xg.name)
                    part = Derivation(
                        bprime.gens, {xj: Polynomial.one(bprime.gens)}, deg_shift=0
                    )(img)
                    if not part.is_zero():
                        row = y1.rank(0) + bk.classes[xg.name][1]
                        m[row][col] = part.scale(-1)
        mats[n] = m
    psi = ChainMap(x, y, mats)
    return x, y1, y2, bk, cone(psi)


def pushout_cone(f: FoliationPresentation, phi: AlgebraMap):
    """The pushout cone of the cotangent along phi, plus the inclusion of f's leg.

    Returns (cone, inclusion of the base-changed cotangent of f). The cone
    realizes the pushout of the base-changed anchor against the comparison
    map into the target differentials.
    """
    x, y1, y2, bk, k = _pushout_parts(f, phi)
    bprime = phi.target
    inc_mats: dict[int, list] = {}
    for n in y1.terms:
        m = zero_matrix(bprime, k.rank(n), y1.rank(n))
        off = x.rank(n + 1)
        for i in range(y1.rank(n)):
            m[off + i][i] = Polynomial.one(bprime.gens)
        inc_mats[n] = m
    return k, ChainMap(y1, k, inc_mats)


def _cone_identification(
    f: FoliationPresentation,
    phi: AlgebraMap,
    pulled: GradedMixedPresentation,
    cotp: PerfectComplex,
) -> ChainMap:
    """Signed row bijection from the pushout cone onto the pulled cotangent.

    The transported generators hit the cone's target rows identically and the
    suspension generators hit the shifted source rows with a minus sign;
    chain-map validation of the result is the cross-check that the transport
    followed the pushout formula.
    """
    x, y1, y2, bk, k = _pushout_parts(f, phi)
    bprime = phi.target
    n_u = len(f.mixed.mixed_gens)
    n_d = len(bprime.own_gens)
    names_u = [g.name for g in pulled.mixed_gens[:n_u]]
    names_d = [g.name for g in pulled.mixed_gens[n_u : n_u + n_d]]
    names_s = [g.name for g in pulled.mixed_gens[n_u + n_d :]]
    mixedpos = {g.name: i for i, g in enumerate(f.mixed.mixed_gens)}
    class_of = {slot: nm for nm, slot in f.base_cotangent.classes.items()}
    own_index = {g.name: i for i, g in enumerate(f.owner.own_gens)}
    rowpos = {n: {nm: i for i, nm in enumerate(cotp.labels[n])} for n in cotp.terms}
    one = Polynomial.one(bprime.gens)
    mats: dict[int, list] = {}
    for t in k.terms:
        m = zero_matrix(bprime, cotp.rank(t), k.rank(t))
        col = 0
        for j in range(x.rank(t + 1)):
            gname = class_of[(t + 1, j)]
            s_name = names_s[own_index[gname]]
            m[rowpos[t][s_name]][col] = one.scale(-1)
            col += 1
        for i in range(y1.rank(t)):
            u_name = names_u[mixedpos[f.cotangent.labels[t][i]]]
            m[rowpos[t][u_name]][col] = one
            col += 1
        for j in range(y2.rank(t)):
            m[rowpos[t][names_d[j]]][col] = one
            col += 1
        mats[t] = m
    return ChainMap(k, cotp, mats)


def pullback_foliation(
    f: FoliationPresentation,
    phi: AlgebraMap,
    name: str | None = None,
    window: Window | None = None,
) -> FoliationPresentation:
    """Pull a foliation back along a map into a smooth presentation.

    The mixed structure is transported generator-wise and re-verified; the
    cotangent of the result is then identified against the pushout cone by an
    explicit signed bijection, so a transport that drifts from the pushout
    formula fails here instead of producing a quietly wrong complex.
    """
    if any(g.deg != 0 for g in f.owner.own_gens):
        raise UnsupportedInputError(
            f"pull-back of {f.name!r}: owner must be smooth over its base"
        )
    pulled = pullback_gm(f.mixed, phi, name=name, window=window)
    if pulled is f.mixed:
        return f
    cot = _desuspend(pulled.weight_piece(1))
    bk = kaehler(phi.target)
    anchor = _anchor_from_eps(pulled, bk, cot)
    out = FoliationPresentation(
        name or f"{f.name}.pb({phi.name})", pulled, cot, anchor, bk
    )
    _cone_identification(f, phi, pulled, cot)
    return out
