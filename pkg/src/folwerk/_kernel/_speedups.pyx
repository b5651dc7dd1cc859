# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel twin. Mirrors folwerk._kernel.pure exactly.

Arithmetic stays on Python big integers (exactness first); the win over the
pure twin is loop and indexing overhead. Any change here must be made in
pure.py as well, and vice versa; the test suite asserts identical outputs.
"""

from math import gcd
from fractions import Fraction

BACKEND = "c"


def merge_mul(aterms, bterms, parities):
    """Multiply two term lists with Koszul signs. See the pure twin."""
    cdef Py_ssize_t n = len(parities)
    cdef Py_ssize_t j
    cdef int cross, dead
    cdef list suffix
    acc = {}
    cdef list par = list(parities)
    for aexps, anum, aden in aterms:
        suffix = [0] * (n + 1)
        for j in range(n - 1, -1, -1):
            suffix[j] = suffix[j + 1] + (1 if (par[j] and aexps[j]) else 0)
        for bexps, bnum, bden in bterms:
            cross = 0
            dead = 0
            for j in range(n):
                if par[j] and bexps[j]:
                    if aexps[j]:
                        dead = 1
                        break
                    cross += <int> suffix[j + 1]
            if dead:
                continue
            exps = tuple([aexps[j] + bexps[j] for j in range(n)])
            num = anum * bnum
            if cross & 1:
                num = -num
            den = aden * bden
            cur = acc.get(exps)
            if cur is None:
                cnum, cden = 0, 1
            else:
                cnum, cden = cur
            rn = num * cden + cnum * den
            rd = den * cden
            if rn == 0:
                if cur is not None:
                    del acc[exps]
                continue
            g = gcd(rn, rd)
            acc[exps] = (rn // g, rd // g)
    return [(e, c[0], c[1]) for e, c in sorted(acc.items())]


def _echelon(rows, Py_ssize_t ncols):
    cdef list m = [list(row) for row in rows if any(row)]
    cdef Py_ssize_t nr = len(m)
    cdef list piv_cols = []
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef list pr, ri
    for c in range(ncols):
        piv = -1
        for i in range(r, nr):
            if (<list> m[i])[c]:
                piv = i
                break
        if piv < 0:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = <list> m[r]
        pv = pr[c]
        for i in range(r + 1, nr):
            ri = <list> m[i]
            v = ri[c]
            if v:
                for j in range(c, ncols):
                    ri[j] = pv * ri[j] - v * pr[j]
                g = 0
                for j in range(c + 1, ncols):
                    g = gcd(g, ri[j])
                if g > 1:
                    for j in range(c + 1, ncols):
                        ri[j] = ri[j] // g
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


def rank_nullspace_int(rows, Py_ssize_t ncols):
    """Exact rank and primitive integer kernel basis. See the pure twin."""
    cdef Py_ssize_t k, j, f
    if ncols == 0:
        return 0, []
    if not rows:
        return 0, [[1 if j == f else 0 for j in range(ncols)] for f in range(ncols)]
    m, piv_cols = _echelon(rows, ncols)
    rank = len(piv_cols)
    piv_set = set(piv_cols)
    free_cols = [c for c in range(ncols) if c not in piv_set]
    basis = []
    for f in free_cols:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for k in range(rank - 1, -1, -1):
            c = piv_cols[k]
            row = m[k]
            s = Fraction(0)
            for j in range(c + 1, ncols):
                if row[j] and x[j]:
                    s += Fraction(row[j]) * x[j]
            if s:
                x[c] = -s / row[c]
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
