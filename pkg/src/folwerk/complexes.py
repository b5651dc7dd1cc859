"""Bounded complexes of finite free modules over a presented algebra.

Degrees here are displayed homological degrees: the internal differential
raises the displayed degree by one, generators of connective algebras sit in
degrees <= 0, and homology is indexed by the chain index n = -(displayed
degree), so chain index 0 is the rightmost spot. A matrix diffs[n] maps the
degree-n term to the degree-(n+1) term and has shape (rank(n+1), rank(n)).

Sign conventions, fixed once (see docs/signs.md):
  shift     d_{C[k]} = (-1)^k d_C, term at degree n moves to n - k
  dual      degree n hosts the dual of the term at -n; matrices are plain
            transposes with no extra sign, so the double dual is literally
            the original complex
  tensor    d(a ox b) = da ox b + (-1)^{|a|} a ox db
  cone      cone(f)^n = C^{n+1} (+) D^n, d(c, b) = (-dc, f(c) + db)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from ._kernel import rank_int, rank_nullspace_int
from .algebra import AlgebraMap, AlgebraPresentation
from .errors import IncompatibleOwnersError, InputError, MissingBoundError
from .poly import Derivation, Gen, Polynomial
from .windows import DEFAULT_WINDOW, Window

Matrix = list[list[Polynomial]]


def zero_matrix(owner: AlgebraPresentation, rows: int, cols: int) -> Matrix:
    z = owner.zero()
    return [[z for _ in range(cols)] for _ in range(rows)]


def identity_matrix(owner: AlgebraPresentation, n: int) -> Matrix:
    one, z = owner.one(), owner.zero()
    return [[one if i == j else z for j in range(n)] for i in range(n)]


def mat_mul(owner: AlgebraPresentation, a: Matrix, b: Matrix, cols: int | None = None) -> Matrix:
    rows = len(a)
    inner = len(b)
    if cols is None:
        cols = len(b[0]) if b else 0
    out = zero_matrix(owner, rows, cols)
    for i in range(rows):
        for j in range(cols):
            acc = owner.zero()
            for k in range(inner):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            out[i][j] = owner.reduce(acc)
    return out


def mat_transpose(m: Matrix) -> Matrix:
    if not m:
        return []
    return [[m[i][j] for i in range(len(m))] for j in range(len(m[0]))]


def mat_scale(m: Matrix, c) -> Matrix:
    return [[e.scale(c) for e in row] for row in m]


def mat_is_zero(m: Matrix) -> bool:
    return all(e.is_zero() for row in m for e in row)


class PerfectComplex:
    """Finite complex of free modules, with polynomial differentials."""

    def __init__(
        self,
        owner: AlgebraPresentation,
        terms: Mapping[int, int],
        diffs: Mapping[int, Matrix] | None = None,
        labels: Mapping[int, Sequence[str]] | None = None,
        check: bool = True,
    ):
        self.owner = owner
        self.terms = {n: r for n, r in sorted(terms.items()) if r > 0}
        diffs = diffs or {}
        self.diffs: dict[int, Matrix] = {}
        for n, m in diffs.items():
            if n not in self.terms or (n + 1) not in self.terms:
                if not mat_is_zero(m):
                    raise InputError(f"differential at degree {n} between missing terms")
                continue
            red = [[owner.reduce(owner.embed(e)) for e in row] for row in m]
            if not mat_is_zero(red):
                self.diffs[n] = red
        self.labels: dict[int, list[str]] = {}
        for n, r in self.terms.items():
            got = list(labels.get(n, ())) if labels else []
            if got and len(got) != r:
                raise InputError(f"bad label count at degree {n}")
            self.labels[n] = got or [f"b{n}_{i}" for i in range(r)]
        if check:
            self._check_shapes()
            self._check_square_zero()

    def _check_shapes(self):
        for n, m in self.diffs.items():
            want = (self.terms[n + 1], self.terms[n])
            got = (len(m), len(m[0]) if m else 0)
            if got != want:
                raise InputError(f"differential at degree {n} has shape {got}, want {want}")

    def _check_square_zero(self):
        for n in self.diffs:
            if (n + 1) in self.diffs:
                prod = mat_mul(self.owner, self.diffs[n + 1], self.diffs[n])
                if not mat_is_zero(prod):
                    raise InputError(f"d o d is nonzero from degree {n}")

    # -- views ---------------------------------------------------------------

    def rank(self, n: int) -> int:
        return self.terms.get(n, 0)

    def diff(self, n: int) -> Matrix:
        if n in self.diffs:
            return self.diffs[n]
        return zero_matrix(self.owner, self.rank(n + 1), self.rank(n))

    def amplitude(self) -> tuple[int, int] | None:
        if not self.terms:
            return None
        ks = sorted(self.terms)
        return ks[0], ks[-1]

    def total_rank(self) -> int:
        return sum(self.terms.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PerfectComplex)
            and self.owner is other.owner
            and self.terms == other.terms
            and {n: m for n, m in self.diffs.items()} == other.diffs
        )

    def __repr__(self) -> str:
        spots = ", ".join(f"{n}: {r}" for n, r in self.terms.items())
        return f"PerfectComplex({self.owner.name}; {{{spots}}})"

    # -- constructions ---------------------------------------------------------

    @staticmethod
    def zero(owner: AlgebraPresentation) -> "PerfectComplex":
        return PerfectComplex(owner, {})

    @staticmethod
    def free(owner: AlgebraPresentation, rank: int, degree: int = 0, labels=None) -> "PerfectComplex":
        lab = {degree: labels} if labels else None
        return PerfectComplex(owner, {degree: rank}, {}, lab)

    def shift(self, k: int) -> "PerfectComplex":
        terms = {n - k: r for n, r in self.terms.items()}
        sign = -1 if k & 1 else 1
        diffs = {n - k: mat_scale(m, sign) for n, m in self.diffs.items()}
        labels = {n - k: [f"{s}[{k}]" for s in self.labels[n]] for n in self.terms}
        return PerfectComplex(self.owner, terms, diffs, labels, check=False)

    def dual(self) -> "PerfectComplex":
        terms = {-n: r for n, r in self.terms.items()}
        diffs = {}
        for n, m in self.diffs.items():
            # d^v at degree -(n+1) is the transpose of d: n -> n+1
            diffs[-(n + 1)] = mat_transpose(m)
        labels = {-n: [f"{s}^" for s in self.labels[n]] for n in self.terms}
        return PerfectComplex(self.owner, terms, diffs, labels, check=False)

    def direct_sum(self, other: "PerfectComplex") -> "PerfectComplex":
        if other.owner is not self.owner:
            raise IncompatibleOwnersError("direct sum over different owners")
        terms: dict[int, int] = {}
        labels: dict[int, list[str]] = {}
        for n in sorted(set(self.terms) | set(other.terms)):
            terms[n] = self.rank(n) + other.rank(n)
            labels[n] = (
                self.labels.get(n, [f"b{n}_{i}" for i in range(self.rank(n))])
                + other.labels.get(n, [f"c{n}_{i}" for i in range(other.rank(n))])
            )
        diffs: dict[int, Matrix] = {}
        for n in sorted(set(self.diffs) | set(other.diffs)):
            a, b = self.diff(n), other.diff(n)
            rows = self.rank(n + 1) + other.rank(n + 1)
            cols = self.rank(n) + other.rank(n)
            m = zero_matrix(self.owner, rows, cols)
            for i in range(self.rank(n + 1)):
                for j in range(self.rank(n)):
                    m[i][j] = a[i][j]
            for i in range(other.rank(n + 1)):
                for j in range(other.rank(n)):
                    m[self.rank(n + 1) + i][self.rank(n) + j] = b[i][j]
            diffs[n] = m
        return PerfectComplex(self.owner, terms, diffs, labels, check=False)

    def tensor(self, other: "PerfectComplex") -> "PerfectComplex":
        if other.owner is not self.owner:
            raise IncompatibleOwnersError("tensor over different owners")
        pairs: dict[int, list[tuple[int, int]]] = {}
        for p in self.terms:
            for q in other.terms:
                pairs.setdefault(p + q, []).append((p, q))
        for n in pairs:
            pairs[n].sort()
        terms = {n: sum(self.rank(p) * other.rank(q) for p, q in pq) for n, pq in pairs.items()}
        labels = {}
        offsets: dict[int, dict[tuple[int, int], int]] = {}
        for n, pq in pairs.items():
            labs = []
            offsets[n] = {}
            for p, q in pq:
                offsets[n][(p, q)] = len(labs)
                for s in self.labels[p]:
                    for t in other.labels[q]:
                        labs.append(f"{s}*{t}")
            labels[n] = labs
        diffs: dict[int, Matrix] = {}
        for n, pq in pairs.items():
            if (n + 1) not in pairs:
                continue
            m = zero_matrix(self.owner, terms[n + 1], terms[n])
            wrote = False
            for p, q in pq:
                rp, rq = self.rank(p), other.rank(q)
                col0 = offsets[n][(p, q)]
                if (p + 1, q) in offsets.get(n + 1, {}):
                    a = self.diff(p)
                    row0 = offsets[n + 1][(p + 1, q)]
                    for i in range(self.rank(p + 1)):
                        for k in range(rp):
                            if a[i][k]:
                                for j in range(rq):
                                    m[row0 + i * rq + j][col0 + k * rq + j] = a[i][k]
                                wrote = True
                if (p, q + 1) in offsets.get(n + 1, {}):
                    b = other.diff(q)
                    sign = -1 if p & 1 else 1
                    row0 = offsets[n + 1][(p, q + 1)]
                    for i in range(other.rank(q + 1)):
                        for j in range(rq):
                            if b[i][j]:
                                for k in range(rp):
                                    m[row0 + k * other.rank(q + 1) + i][col0 + k * rq + j] = b[i][j].scale(sign)
                                wrote = True
            if wrote:
                diffs[n] = m
        return PerfectComplex(self.owner, terms, diffs, labels)

    def base_change(self, f: AlgebraMap) -> "PerfectComplex":
        if f.source is not self.owner:
            raise IncompatibleOwnersError("base change along a map with a different source")
        diffs = {n: [[f.apply(e) for e in row] for row in m] for n, m in self.diffs.items()}
        return PerfectComplex(f.target, dict(self.terms), diffs, dict(self.labels), check=False)


class ChainMap:
    """Degreewise matrices commuting with the differentials, exactly."""

    def __init__(
        self,
        source: PerfectComplex,
        target: PerfectComplex,
        mats: Mapping[int, Matrix],
        check: bool = True,
    ):
        if source.owner is not target.owner:
            raise IncompatibleOwnersError("chain map between different owners")
        self.source = source
        self.target = target
        self.owner = source.owner
        self.mats: dict[int, Matrix] = {}
        for n, m in mats.items():
            red = [[self.owner.reduce(self.owner.embed(e)) for e in row] for row in m]
            want = (target.rank(n), source.rank(n))
            got = (len(red), len(red[0]) if red else 0)
            if got != want:
                raise InputError(f"chain map at degree {n} has shape {got}, want {want}")
            if not mat_is_zero(red):
                self.mats[n] = red
        if check:
            self.validate()

    def mat(self, n: int) -> Matrix:
        if n in self.mats:
            return self.mats[n]
        return zero_matrix(self.owner, self.target.rank(n), self.source.rank(n))

    def validate(self):
        degs = set(self.source.terms) | set(self.target.terms)
        for n in degs:
            cols = self.source.rank(n)
            lhs = mat_mul(self.owner, self.mat(n + 1), self.source.diff(n), cols=cols)
            rhs = mat_mul(self.owner, self.target.diff(n), self.mat(n), cols=cols)
            same = all(
                (lhs[i][j] - rhs[i][j]).is_zero()
                for i in range(len(lhs))
                for j in range(cols)
            )
            if not same:
                raise InputError(f"chain map fails to commute with d at degree {n}")

    @staticmethod
    def identity(c: PerfectComplex) -> "ChainMap":
        mats = {n: identity_matrix(c.owner, r) for n, r in c.terms.items()}
        return ChainMap(c, c, mats, check=False)

    def __repr__(self) -> str:
        return f"ChainMap({self.source!r} -> {self.target!r})"


def cone(f: ChainMap) -> PerfectComplex:
    """Mapping cone: cone(f)^n = C^{n+1} (+) D^n, d(c, b) = (-dc, f(c) + db)."""
    C, D = f.source, f.target
    owner = f.owner
    terms: dict[int, int] = {}
    labels: dict[int, list[str]] = {}
    degs = sorted(set(n - 1 for n in C.terms) | set(D.terms))
    for n in degs:
        r = C.rank(n + 1) + D.rank(n)
        if r:
            terms[n] = r
            labels[n] = [f"{s}'" for s in C.labels.get(n + 1, [])] + list(D.labels.get(n, []))
    diffs: dict[int, Matrix] = {}
    for n in terms:
        if (n + 1) not in terms:
            continue
        rows, cols = terms[n + 1], terms[n]
        m = zero_matrix(owner, rows, cols)
        dc = C.diff(n + 1)
        for i in range(C.rank(n + 2)):
            for j in range(C.rank(n + 1)):
                m[i][j] = dc[i][j].scale(-1)
        fm = f.mat(n + 1)
        for i in range(D.rank(n + 1)):
            for j in range(C.rank(n + 1)):
                m[C.rank(n + 2) + i][j] = fm[i][j]
        dd = D.diff(n)
        for i in range(D.rank(n + 1)):
            for j in range(D.rank(n)):
                m[C.rank(n + 2) + i][C.rank(n + 1) + j] = dd[i][j]
        diffs[n] = m
    return PerfectComplex(owner, terms, diffs, labels)


# -- homology ------------------------------------------------------------------


@dataclass(frozen=True)
class HomologyReport:
    chain_index: int
    dimension: int
    exact: bool
    poly_degree_bound: int | None

    def as_dict(self) -> dict:
        return {
            "chain_index": self.chain_index,
            "dimension": self.dimension,
            "exact": self.exact,
            "poly_degree_bound": self.poly_degree_bound,
        }


def _rows_to_int(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def _mono_deg(owner: AlgebraPresentation, mono: tuple[int, ...]) -> int:
    return sum(a * g.deg for a, g in zip(mono, owner.gens))


def _d_total(c: PerfectComplex, n: int, k: int, mono) -> dict:
    """Full differential of the element mono * basis(n, k), as coordinates.

    Coordinates are triples (term, component, monomial). When the owner
    carries its own differential it acts on the coefficient; the matrix part
    picks up the Koszul sign of the coefficient's degree.
    """
    owner = c.owner
    p = Polynomial.monomial(owner.gens, mono, 1)
    out: dict[tuple[int, int, tuple[int, ...]], Fraction] = {}
    if owner.differential_images:
        for e2, c2 in owner.d_reduced(p).terms.items():
            key = (n, k, e2)
            out[key] = out.get(key, Fraction(0)) + c2
    sign = -1 if _mono_deg(owner, mono) & 1 else 1
    dmat = c.diff(n)
    for i in range(c.rank(n + 1)):
        e = dmat[i][k]
        if e:
            q = owner.reduce((p * e).scale(sign))
            for e2, c2 in q.terms.items():
                key = (n + 1, i, e2)
                out[key] = out.get(key, Fraction(0)) + c2
    return {key: v for key, v in out.items() if v}


def _coords_rows(vectors: list[dict]) -> tuple[list, list[list[Fraction]]]:
    seen = set()
    for vec in vectors:
        seen.update(vec.keys())
    coord_list = sorted(seen)
    index = {cc: i for i, cc in enumerate(coord_list)}
    rows = []
    for vec in vectors:
        row = [Fraction(0)] * len(coord_list)
        for key, v in vec.items():
            row[index[key]] = v
        rows.append(row)
    return coord_list, rows


def homology_report(
    c: PerfectComplex,
    chain_index: int,
    window: Window | None = None,
    slack: int = 0,
) -> HomologyReport:
    """Q-dimension of homology at a chain index, exact for finite owners.

    An element is a coefficient monomial times a term basis vector, graded by
    term degree plus coefficient degree; over a dg owner the differential has
    both the coefficient part and the signed matrix part. For
    infinite-dimensional owners the coefficients are truncated at the
    window's polynomial-degree bound; cycles are exact on that subspace
    (images keep every monomial they produce) and the report records the
    bound. slack widens only the boundary domain beyond the bound, which can
    kill truncation-artifact classes near the window edge but never creates
    new ones.
    """
    owner = c.owner
    exact = owner.is_finite_dimensional
    bound = None
    if exact:
        basis = owner.monomial_basis()
        basis_b = basis
    else:
        window = window or DEFAULT_WINDOW
        bound = window.poly_degree
        basis = owner.monomial_basis(max_polydeg=bound)
        basis_b = (
            basis if not slack else owner.monomial_basis(max_polydeg=bound + slack)
        )
    m = -chain_index
    deg_of = {mono: _mono_deg(owner, mono) for mono in basis_b}

    def dom_at(t: int, bas):
        return [
            (n, k, mono)
            for n in sorted(c.terms)
            for k in range(c.rank(n))
            for mono in bas
            if n + deg_of[mono] == t
        ]

    dom = dom_at(m, basis)
    if not dom:
        return HomologyReport(chain_index, 0, exact, bound)
    images = [_d_total(c, n, k, mono) for n, k, mono in dom]
    _, rows = _coords_rows(images)
    int_rows = _rows_to_int(rows)
    # kernel of the map dom -> coords: transpose so columns index dom
    mat = [list(col) for col in zip(*int_rows)] if int_rows and int_rows[0] else []
    _, cycles = rank_nullspace_int(mat, len(dom))

    if not cycles:
        return HomologyReport(chain_index, 0, exact, bound)

    prev = dom_at(m - 1, basis_b)
    if not prev:
        return HomologyReport(chain_index, len(cycles), exact, bound)
    bnds = [_d_total(c, n, k, mono) for n, k, mono in prev]
    cycle_vecs = []
    for v in cycles:
        vec = {}
        for coeff, key in zip(v, dom):
            if coeff:
                vec[key] = Fraction(coeff)
        cycle_vecs.append(vec)
    _, all_rows = _coords_rows(bnds + cycle_vecs)
    int_all = _rows_to_int(all_rows)
    b_rows = int_all[: len(bnds)]
    z_rows = int_all[len(bnds) :]
    ncols = len(int_all[0]) if int_all else 0
    r_b = rank_int(b_rows, ncols)
    r_stack = rank_int(b_rows + z_rows, ncols)
    return HomologyReport(chain_index, r_stack - r_b, exact, bound)


def homology_dims(
    c: PerfectComplex,
    window: Window | None = None,
    slack: int = 0,
) -> dict[int, int]:
    """All homology dimensions over the complex's support, by chain index.

    The support range accounts for coefficient degrees, so dg owners with
    negative-degree generators widen it below the term amplitude.
    """
    amp = c.amplitude()
    if amp is None:
        return {}
    lo, hi = amp
    owner = c.owner
    if owner.is_finite_dimensional:
        basis = owner.monomial_basis()
    else:
        w = window or DEFAULT_WINDOW
        basis = owner.monomial_basis(max_polydeg=w.poly_degree)
    degs = [_mono_deg(owner, mono) for mono in basis]
    if degs:
        lo += min(degs)
        hi += max(degs)
    out = {}
    for m in range(lo, hi + 1):
        rep = homology_report(c, -m, window, slack)
        if rep.dimension:
            out[-m] = rep.dimension
    return out


def is_acyclic(
    c: PerfectComplex, window: Window | None = None, slack: int = 0
) -> bool:
    return not homology_dims(c, window, slack)


def is_quasi_iso(
    f: ChainMap, window: Window | None = None, slack: int = 0
) -> bool:
    return is_acyclic(cone(f), window, slack)


# -- symmetric powers ------------------------------------------------------------


def sym_shift(
    L: PerfectComplex,
    weight_bound: int,
    name_prefix: str = "s",
) -> dict[int, PerfectComplex]:
    """Weight pieces of the free graded-commutative algebra on L[1].

    Each basis element of L[1] in displayed degree n becomes a generator of
    degree n and weight 1; odd-degree generators anticommute and square to
    zero. The weight-w piece is the free module on the weight-w monomials,
    with the differential induced from -d_L as a derivation. Weights
    0..weight_bound are returned.
    """
    owner = L.owner
    shifted = L.shift(1)
    gen_info: list[tuple[int, int, str]] = []  # (degree, index within term, label)
    for n in sorted(shifted.terms):
        for i in range(shifted.rank(n)):
            gen_info.append((n, i, shifted.labels[n][i]))
    module_gens = tuple(
        Gen(f"{name_prefix}{k}_{lab}", deg=n, weight=1) for k, (n, i, lab) in enumerate(gen_info)
    )
    big_gens = owner.gens + module_gens
    nown = len(owner.gens)

    def lift(p: Polynomial) -> Polynomial:
        return Polynomial(big_gens, {e + (0,) * len(module_gens): c for e, c in p.terms.items()})

    pos_of = {}
    for k, (n, i, _) in enumerate(gen_info):
        pos_of[(n, i)] = nown + k
    images: dict[int, Polynomial] = {}
    for k, (n, i, _) in enumerate(gen_info):
        mat = shifted.diff(n)
        img = Polynomial.zero(big_gens)
        for r in range(shifted.rank(n + 1)):
            if mat[r][i]:
                img = img + lift(mat[r][i]) * Polynomial.gen(big_gens, pos_of[(n + 1, r)])
        if not img.is_zero():
            images[nown + k] = img
    D = Derivation(big_gens, images, deg_shift=1, weight_shift=0)

    # weight-w monomials in the module generators
    def monomials_of_weight(w: int) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        k = len(module_gens)
        exps = [0] * k

        def rec(i: int, left: int):
            if i == k:
                if left == 0:
                    out.append(tuple(exps))
                return
            cap = 1 if module_gens[i].parity else left
            for a in range(min(cap, left) + 1):
                exps[i] = a
                rec(i + 1, left - a)
            exps[i] = 0

        rec(0, w)
        out.sort()
        return out

    result: dict[int, PerfectComplex] = {}
    for w in range(weight_bound + 1):
        monos = monomials_of_weight(w)
        by_deg: dict[int, list[tuple[int, ...]]] = {}
        for e in monos:
            d = sum(a * g.deg for a, g in zip(e, module_gens))
            by_deg.setdefault(d, []).append(e)
        terms = {d: len(es) for d, es in by_deg.items()}
        labels = {}
        index_in_deg: dict[tuple[int, ...], tuple[int, int]] = {}
        for d, es in by_deg.items():
            labs = []
            for j, e in enumerate(es):
                factors = []
                for a, g in zip(e, module_gens):
                    if a == 1:
                        factors.append(g.name)
                    elif a > 1:
                        factors.append(f"{g.name}^{a}")
                labs.append("*".join(factors) if factors else "1")
                index_in_deg[e] = (d, j)
            labels[d] = labs
        diffs: dict[int, Matrix] = {}
        for d, es in by_deg.items():
            if (d + 1) not in by_deg:
                continue
            tgt = by_deg[d + 1]
            mat = zero_matrix(owner, len(tgt), len(es))
            wrote = False
            for j, e in enumerate(es):
                full = (0,) * nown + e
                img = D(Polynomial(big_gens, {full: Fraction(1)}))
                for fe, coef in img.terms.items():
                    mod_part = fe[nown:]
                    own_part = fe[:nown] + (0,) * len(module_gens)
                    if mod_part not in index_in_deg:
                        raise InputError("derivation image leaves the weight graph")
                    dd, jj = index_in_deg[mod_part]
                    assert dd == d + 1
                    entry = Polynomial(owner.gens, {fe[:nown]: coef})
                    mat[jj][j] = mat[jj][j] + entry
                    wrote = True
            if wrote:
                diffs[d] = mat
        result[w] = PerfectComplex(owner, terms, diffs, labels)
    return result
