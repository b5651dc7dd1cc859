"""Pure-Python kernel: exact integer elimination and graded term merging.

This module is the reference implementation of the hot kernels. The compiled
twin in _speedups.pyx implements the same algorithms step for step; both must
produce byte-identical results on the same inputs (the benchmark and the test
suite compare them directly).

Conventions shared by both twins:
  * a polynomial term is (exps, num, den): exponent tuple, integer numerator,
    positive integer denominator, gcd(num, den) == 1;
  * matrices are lists of integer rows; callers clear denominators row-wise,
    which changes neither row space nor kernel;
  * all outputs are deterministically ordered.
"""

from __future__ import annotations

from math import gcd

BACKEND = "pure"


def merge_mul(aterms, bterms, parities):
    """Multiply two term lists with Koszul signs.

    Odd generators (parities[i] == 1) anticommute and square to zero; the sign
    of a monomial product counts crossings of odd factors. Returns terms as a
    list of (exps, num, den) sorted by exponent tuple, zero terms dropped.
    """
    acc: dict[tuple, tuple[int, int]] = {}
    n = len(parities)
    for aexps, anum, aden in aterms:
        # suffix counts of odd entries of aexps, reused across bterms
        suffix = [0] * (n + 1)
        for j in range(n - 1, -1, -1):
            suffix[j] = suffix[j + 1] + (1 if (parities[j] and aexps[j]) else 0)
        for bexps, bnum, bden in bterms:
            cross = 0
            dead = False
            for j in range(n):
                if parities[j] and bexps[j]:
                    if aexps[j]:
                        dead = True
                        break
                    cross += suffix[j + 1]
            if dead:
                continue
            exps = tuple(x + y for x, y in zip(aexps, bexps))
            num = anum * bnum
            if cross & 1:
                num = -num
            den = aden * bden
            cnum, cden = acc.get(exps, (0, 1))
            # exact rational addition num/den + cnum/cden
            rn = num * cden + cnum * den
            rd = den * cden
            if rn == 0:
                acc.pop(exps, None)
                continue
            g = gcd(rn, rd)
            acc[exps] = (rn // g, rd // g)
        # no per-a cleanup needed; acc holds only nonzero entries
    return [(e, c[0], c[1]) for e, c in sorted(acc.items())]


def _echelon(rows, ncols):
    """Integer row echelon with content reduction. Returns (matrix, pivot_cols)."""
    m = [list(r) for r in rows if any(r)]
    nr = len(m)
    piv_cols: list[int] = []
    r = 0
    for c in range(ncols):
        piv = -1
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        pv = pr[c]
        for i in range(r + 1, nr):
            ri = m[i]
            v = ri[c]
            if v:
                for j in range(c, ncols):
                    ri[j] = pv * ri[j] - v * pr[j]
                g = 0
                for j in range(c + 1, ncols):
                    g = gcd(g, ri[j])
                if g > 1:
                    for j in range(c + 1, ncols):
                        ri[j] //= g
        piv_cols.append(c)
        r += 1
        if r == nr:
            break
    return m, piv_cols


def rank_int(rows, ncols):
    """Rank of an integer matrix, exact."""
    if not rows:
        return 0
    _, piv = _echelon(rows, ncols)
    return len(piv)


def rank_nullspace_int(rows, ncols):
    """Exact rank and an integer kernel basis of an integer matrix.

    The kernel basis has one vector per free column, ordered by free column
    index; each vector is primitive (content 1) with positive entry at its
    free column.
    """
    if ncols == 0:
        return 0, []
    if not rows:
        return 0, [[1 if j == f else 0 for j in range(ncols)] for f in range(ncols)]
    m, piv_cols = _echelon(rows, ncols)
    rank = len(piv_cols)
    piv_set = set(piv_cols)
    free_cols = [c for c in range(ncols) if c not in piv_set]
    basis = []
    from fractions import Fraction

    for f in free_cols:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        # back-substitute pivot rows bottom-up
        for k in range(rank - 1, -1, -1):
            c = piv_cols[k]
            row = m[k]
            s = Fraction(0)
            for j in range(c + 1, ncols):
                if row[j] and x[j]:
                    s += Fraction(row[j]) * x[j]
            if s:
                x[c] = -s / row[c]
        # clear denominators, reduce content, free coordinate stays positive
        den = 1
        for v in x:
            den = den * v.denominator // gcd(den, v.denominator)
        ints = [int(v * den) for v in x]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        basis.append(ints)
    return rank, basis
