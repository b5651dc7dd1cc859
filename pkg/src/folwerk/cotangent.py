"""Cotangent complexes and the de Rham graded mixed algebra.

Smooth presentations get a free module of differentials in one stroke;
quotients by a regular sequence get the two-term conormal complex, or a
semi-free Koszul resolution when a strict model of the whole algebra is
needed. The de Rham object is a graded mixed presentation whose weight
pieces are the symmetric powers of the shifted differentials and whose
mixed operator is the de Rham differential on generators. Cohomology of the
totalization d + (-1)^weight eps is computed over a window and the
truncation is recorded in the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import AlgebraPresentation
from .complexes import (
    Matrix,
    PerfectComplex,
    _rows_to_int,
    homology_report,
    zero_matrix,
)
from .errors import (
    AmbiguousInputError,
    MissingBoundError,
    NotRegularError,
    UnsupportedInputError,
)
from .graded_mixed import GradedMixedPresentation
from .poly import Derivation, Gen, Polynomial
from ._kernel import rank_int, rank_nullspace_int
from .windows import DEFAULT_WINDOW, Window


def _partial(a: AlgebraPresentation, i: int) -> Derivation:
    # graded left partial derivative with respect to the i-th generator
    g = a.gens[i]
    return Derivation(
        a.gens, {i: Polynomial.one(a.gens)}, deg_shift=-g.deg, weight_shift=-g.weight
    )


def _fresh(taken: set[str], want: str) -> str:
    while want in taken:
        want = want + "'"
    taken.add(want)
    return want


@dataclass(frozen=True)
class CotangentModel:
    """Chain model of the relative differentials of owner over its base.

    classes maps each generator name to its basis slot (term degree, column)
    in the complex; the universal derivation sends the generator there.
    """

    owner: AlgebraPresentation
    complex: PerfectComplex
    classes: dict

    def rank(self, n: int) -> int:
        return self.complex.rank(n)


def kaehler(b: AlgebraPresentation, assume_smooth: bool = False) -> CotangentModel:
    """Module of differentials of a presentation, relative to its base.

    One basis element per own generator, placed in the generator's degree;
    the induced differential of a semi-free owner acts by formal partial
    derivatives of the generator differentials. Quotients are rejected
    unless the caller flags them smooth (entries are then reduced).
    """
    if b.own_relations and not assume_smooth:
        raise AmbiguousInputError(
            f"kaehler on {b.name!r}: quotient without a smoothness or regularity "
            "context; use cotangent_lci or pass assume_smooth"
        )
    own = b.own_gens
    offset = len(b.base.gens) if b.base is not None else 0
    by_deg: dict[int, list[int]] = {}
    for j, g in enumerate(own):
        by_deg.setdefault(g.deg, []).append(offset + j)
    terms = {n: len(ix) for n, ix in by_deg.items()}
    labels = {n: [f"d{b.gens[i].name}" for i in ix] for n, ix in by_deg.items()}
    slot = {}
    for n, ix in by_deg.items():
        for col, i in enumerate(ix):
            slot[b.gens[i].name] = (n, col)
    diffs: dict[int, Matrix] = {}
    for n, ix in by_deg.items():
        rows = by_deg.get(n + 1, ())
        if not rows:
            continue
        mat = zero_matrix(b, len(rows), len(ix))
        wrote = False
        for col, i in enumerate(ix):
            q = b.d_reduced(Polynomial.gen(b.gens, i))
            if q.is_zero():
                continue
            for rrow, itgt in enumerate(rows):
                coeff = b.reduce(_partial(b, itgt)(q))
                if not coeff.is_zero():
                    mat[rrow][col] = coeff
                    wrote = True
        if wrote:
            diffs[n] = mat
    return CotangentModel(b, PerfectComplex(b, terms, diffs, labels), slot)


def _koszul_complex(p: AlgebraPresentation, fs) -> PerfectComplex:
    """Tensor of the two-term complexes [p --f--> p], one per relation."""
    out = PerfectComplex.free(p, 1, 0)
    for f in fs:
        line = PerfectComplex(p, {-1: 1, 0: 1}, {-1: [[f]]})
        out = out.tensor(line)
    return out


def cotangent_lci(
    b: AlgebraPresentation,
    window: Window | None = None,
) -> CotangentModel:
    """Two-term conormal model for a quotient by a regular sequence.

    The degree -1 term is free on the relations, mapping by the Jacobian into
    the differentials of the cover. Regularity is taken on trust for
    infinite-dimensional owners; finite-dimensional ones get an executed
    Koszul homology check over the window.
    """
    if b.differential_images:
        raise UnsupportedInputError(
            f"cotangent_lci on {b.name!r}: owner already semi-free, use kaehler"
        )
    fs = b.own_relations
    if not fs:
        return kaehler(b)
    cover = AlgebraPresentation(f"{b.name}^", b.base, b.own_gens)
    if b.is_finite_dimensional:
        kz = _koszul_complex(cover, [Polynomial(cover.gens, f.terms) for f in fs])
        for i in range(1, len(fs) + 1):
            rep = homology_report(kz, i, window or DEFAULT_WINDOW)
            if rep.dimension:
                raise NotRegularError(
                    f"{b.name!r}: relation sequence is not regular, Koszul homology "
                    f"at chain index {i} has dimension {rep.dimension} in the window"
                )
    smooth = kaehler(cover)
    offset = len(b.base.gens) if b.base is not None else 0
    n_own = len(b.own_gens)
    terms = dict(smooth.complex.terms)
    terms[-1] = terms.get(-1, 0) + len(fs)
    labels = {n: list(ls) for n, ls in smooth.complex.labels.items()}
    labels.setdefault(-1, [])
    conormal_cols = len(labels[-1])
    labels[-1] = labels[-1] + [f"e{i + 1}" for i in range(len(fs))]
    mat = zero_matrix(b, smooth.complex.rank(0), terms[-1])
    for col, f in enumerate(fs):
        for j in range(n_own):
            i = offset + j
            coeff = b.reduce(_partial(b, i)(Polynomial(b.gens, f.terms)))
            if not coeff.is_zero():
                row = smooth.classes[b.gens[i].name][1]
                mat[row][conormal_cols + col] = coeff
        # entries of the smooth part's own differential would sit in the
        # leading columns; lci covers are discrete so there are none
    diffs = {-1: mat}
    slot = dict(smooth.classes)
    cx = PerfectComplex(b, terms, diffs, labels)
    return CotangentModel(b, cx, slot)


def koszul_model(
    b: AlgebraPresentation,
    window: Window | None = None,
    verify: bool = True,
) -> AlgebraPresentation:
    """Semi-free resolution of a quotient: one odd killer per relation.

    The cover keeps the generators, gains a degree -1 generator per relation
    with that relation as differential, and projects to the quotient. The
    projection is checked to be a quasi-isomorphism in degrees 0 and -1
    within the window; a failure means the sequence was not regular.
    """
    fs = b.own_relations
    if not fs:
        return b
    if b.differential_images:
        raise UnsupportedInputError(
            f"koszul_model on {b.name!r}: owner mixes relations and a differential"
        )
    taken = {g.name for g in b.gens}
    killers = tuple(Gen(_fresh(taken, f"e{i + 1}"), deg=-1) for i in range(len(fs)))
    gens = b.own_gens + killers
    full = (b.base.gens if b.base is not None else ()) + gens
    d_images = {
        k.name: Polynomial(full, {e + (0,) * len(killers): c for e, c in f.terms.items()})
        for k, f in zip(killers, fs)
    }
    model = AlgebraPresentation(f"{b.name}.kz", b.base, gens, (), d_images)
    if verify:
        w = window or DEFAULT_WINDOW
        model_line = PerfectComplex(model, {0: 1})
        b_line = PerfectComplex(b, {0: 1})
        for chain in (0, 1):
            got = homology_report(model_line, chain, w).dimension
            want = homology_report(b_line, chain, w).dimension
            if got != want:
                raise NotRegularError(
                    f"koszul_model on {b.name!r}: projection fails to be a "
                    f"quasi-isomorphism at chain index {chain} "
                    f"({got} vs {want} in the window)"
                )
    return model


@dataclass(frozen=True)
class DeRhamAlgebra:
    """De Rham graded mixed algebra of a presentation, with provenance."""

    mixed: GradedMixedPresentation
    source: AlgebraPresentation
    model: AlgebraPresentation
    cotangent: CotangentModel
    weight_bound: int | None

    def weight_piece(self, w: int) -> PerfectComplex:
        return self.mixed.weight_piece(w)

    def as_dict(self) -> dict:
        return {
            "source": self.source.name,
            "model": self.model.name,
            "weight_bound": self.weight_bound,
            "mixed_generators": [g.name for g in self.mixed.mixed_gens],
        }


def de_rham(
    b: AlgebraPresentation,
    weight_bound: int | None = None,
    window: Window | None = None,
) -> DeRhamAlgebra:
    """The graded mixed algebra of differential forms on a presentation.

    Quotients are routed through the Koszul semi-free model first, since the
    de Rham operator is only strict on semi-free presentations. Each own
    generator g contributes a weight-1 generator dg one degree lower;
    eps(g) = dg, eps(dg) = 0, and the internal differential moves dg by the
    negated formal differential of d(g) so that the two operators
    anticommute on the nose.
    """
    model = koszul_model(b, window) if b.own_relations else b
    base = model.base if model.base is not None else model
    offset = len(model.base.gens) if model.base is not None else 0
    taken = {g.name for g in model.gens}
    dnames = [_fresh(taken, f"d{g.name}") for g in model.own_gens]
    mixed = tuple(
        Gen(nm, deg=g.deg - 1, weight=1) for nm, g in zip(dnames, model.own_gens)
    )
    full = model.gens + mixed
    pad = (0,) * len(mixed)

    def lift(p: Polynomial) -> Polynomial:
        return Polynomial(full, {e + pad: c for e, c in p.terms.items()})

    eps_images = {}
    d_images = {}
    for j, g in enumerate(model.own_gens):
        eps_images[g.name] = Polynomial.gen(full, len(model.gens) + j)
        q = model.d_reduced(Polynomial.gen(model.gens, offset + j))
        if q.is_zero():
            continue
        img = Polynomial.zero(full)
        for i in range(len(model.own_gens)):
            coeff = _partial(model, offset + i)(q)
            if not coeff.is_zero():
                img = img + lift(coeff) * Polynomial.gen(full, len(model.gens) + i)
        d_images[dnames[j]] = -img
    gm = GradedMixedPresentation(
        f"DR({b.name})", base, model, mixed, d_images, eps_images, quasi_free=True
    )
    return DeRhamAlgebra(gm, b, model, kaehler(model), weight_bound)


# -- cohomology of the totalization ----------------------------------------------


@dataclass(frozen=True)
class TotalCohomologyReport:
    window: Window
    dims: dict

    def as_dict(self) -> dict:
        return {
            "window": self.window.as_dict(),
            "dims": {str(t): d for t, d in sorted(self.dims.items())},
        }


def de_rham_cohomology(
    dr: DeRhamAlgebra,
    window: Window | None = None,
) -> TotalCohomologyReport:
    """Cohomology of d + (-1)^weight eps, graded by degree plus twice weight.

    Monomials inside the window span the domain; their images keep every
    monomial they produce, so kernels are exact on the window subspace. The
    returned table lists nonzero dimensions by total degree.
    """
    f = dr.mixed
    alg = f.algebra
    if window is None:
        if not alg.is_finite_dimensional:
            raise MissingBoundError(
                f"de_rham_cohomology on {f.name!r}: a window is required"
            )
        window = DEFAULT_WINDOW

    def admit(e):
        deg, wt = f.exps_bidegree(e)
        return window.admits(wt, deg, sum(e))

    basis = alg.monomial_basis(max_polydeg=window.poly_degree, predicate=admit)
    tot = {}
    for e in basis:
        deg, wt = f.exps_bidegree(e)
        tot.setdefault(deg + 2 * wt, []).append((e, wt))

    def d_total(e, wt):
        m = Polynomial.monomial(alg.gens, e, 1)
        img = alg.reduce(f.d(m)) + alg.reduce(f.eps(m)).scale(-1 if wt & 1 else 1)
        return dict(img.terms)

    def rows_for(coords, index, images):
        rows = []
        for img in images:
            row = [Fraction(0)] * len(coords)
            for e2, c2 in img.items():
                row[index[e2]] = c2
            rows.append(row)
        return rows

    dims = {}
    for t in sorted(tot):
        dom = tot[t]
        images = [d_total(e, wt) for e, wt in dom]
        coords = sorted({e2 for img in images for e2 in img})
        index = {e2: i for i, e2 in enumerate(coords)}
        rows = _rows_to_int(rows_for(coords, index, images))
        mat = [list(col) for col in zip(*rows)] if rows and rows[0] else []
        _, cycles = rank_nullspace_int(mat, len(dom))
        if not cycles:
            continue
        prev = tot.get(t - 1, [])
        bnds = [d_total(e, wt) for e, wt in prev]
        cyc_vecs = []
        for v in cycles:
            cyc_vecs.append({e: Fraction(c) for (e, _), c in zip(dom, v) if c})
        allc = sorted({e2 for img in bnds + cyc_vecs for e2 in img})
        aidx = {e2: i for i, e2 in enumerate(allc)}
        arows = _rows_to_int(rows_for(allc, aidx, bnds + cyc_vecs))
        b_rows = arows[: len(bnds)]
        z_rows = arows[len(bnds):]
        ncols = len(arows[0]) if arows else 0
        h = rank_int(b_rows + z_rows, ncols) - rank_int(b_rows, ncols)
        if h:
            dims[t] = h
    return TotalCohomologyReport(window, dims)
