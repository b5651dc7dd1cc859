import random
from fractions import Fraction

from folwerk._kernel import BACKEND, merge_mul, rank_int, rank_nullspace_int
from folwerk._kernel import pure

try:
    from folwerk._kernel import _speedups
except ImportError:
    _speedups = None

BACKENDS = [pure] + ([_speedups] if _speedups is not None else [])


def test_merge_mul_commutative_vars():
    # (1 + x) * (1 - x) = 1 - x^2 with x even
    a = [((0,), 1, 1), ((1,), 1, 1)]
    b = [((0,), 1, 1), ((1,), -1, 1)]
    for k in BACKENDS:
        out = k.merge_mul(a, b, (0,))
        assert sorted(out) == [((0,), 1, 1), ((2,), -1, 1)]


def test_merge_mul_odd_square_dies():
    # e odd: e * e = 0
    a = [((1,), 1, 1)]
    for k in BACKENDS:
        assert k.merge_mul(a, a, (1,)) == []


def test_merge_mul_koszul_sign():
    # e1, e2 both odd: e2 * e1 = -(e1 e2)
    e1 = [((1, 0), 1, 1)]
    e2 = [((0, 1), 1, 1)]
    for k in BACKENDS:
        assert k.merge_mul(e2, e1, (1, 1)) == [((1, 1), -1, 1)]
        assert k.merge_mul(e1, e2, (1, 1)) == [((1, 1), 1, 1)]


def test_merge_mul_mixed_parity_crossing():
    # (x*e1) * e0 with gens (e0 odd, x even, e1 odd): crossing over e1 only
    a = [((0, 1, 1), 1, 1)]
    b = [((1, 0, 0), 1, 1)]
    for k in BACKENDS:
        assert k.merge_mul(a, b, (1, 0, 1)) == [((1, 1, 1), -1, 1)]


def test_merge_mul_fraction_arithmetic():
    # (1/2 x) * (1/3 x) + cancellation of a pair summing to zero
    a = [((1,), 1, 2), ((0,), 1, 1)]
    b = [((1,), 1, 3), ((0,), -1, 1)]
    for k in BACKENDS:
        out = dict(((e, (n, d)) for e, n, d in k.merge_mul(a, b, (0,))))
        assert out[(2,)] == (1, 6)
        assert out[(0,)] == (-1, 1)
        # x terms: -1/2 + 1/3 = -1/6
        assert out[(1,)] == (-1, 6)


def test_rank_int_basic():
    for k in BACKENDS:
        assert k.rank_int([[1, 0], [0, 1]], 2) == 2
        assert k.rank_int([[1, 2], [2, 4]], 2) == 1
        assert k.rank_int([[0, 0], [0, 0]], 2) == 0
        assert k.rank_int([], 3) == 0
        assert k.rank_int([[2, 2, 2], [3, 3, 3]], 3) == 1


def test_nullspace_exact():
    for k in BACKENDS:
        r, basis = k.rank_nullspace_int([[1, 2], [1, 2]], 2)
        assert r == 1
        assert basis == [[-2, 1]]
        r, basis = k.rank_nullspace_int([[2, 2, 2], [3, 3, 3]], 3)
        assert r == 1
        assert basis == [[-1, 1, 0], [-1, 0, 1]]
        r, basis = k.rank_nullspace_int([], 2)
        assert r == 0
        assert basis == [[1, 0], [0, 1]]
        r, basis = k.rank_nullspace_int([[1, 0], [0, 1]], 2)
        assert (r, basis) == (2, [])
        r, basis = k.rank_nullspace_int([[3]], 0)
        assert (r, basis) == (0, [])


def test_nullspace_vectors_actually_annihilate():
    rng = random.Random(7)
    for trial in range(40):
        m = rng.randrange(0, 5)
        n = rng.randrange(0, 5)
        rows = [[rng.randrange(-4, 5) for _ in range(n)] for _ in range(m)]
        for k in BACKENDS:
            r, basis = k.rank_nullspace_int(rows, n)
            assert r + len(basis) == n
            for v in basis:
                for row in rows:
                    assert sum(a * b for a, b in zip(row, v)) == 0


def test_backends_agree_on_random_input():
    if _speedups is None:
        return
    rng = random.Random(11)
    for trial in range(30):
        n = rng.randrange(1, 4)
        pars = tuple(rng.randrange(2) for _ in range(n))
        def rand_terms():
            out = []
            for _ in range(rng.randrange(1, 4)):
                e = tuple(rng.randrange(2) if pars[i] else rng.randrange(3) for i in range(n))
                out.append((e, rng.randrange(-3, 4), rng.randrange(1, 4)))
            return out
        a, b = rand_terms(), rand_terms()
        assert pure.merge_mul(a, b, pars) == _speedups.merge_mul(a, b, pars)
        m = rng.randrange(0, 4)
        rows = [[rng.randrange(-5, 6) for _ in range(n)] for _ in range(m)]
        assert pure.rank_nullspace_int(rows, n) == _speedups.rank_nullspace_int(rows, n)


def test_active_backend_exports():
    assert BACKEND in ("pure", "c")
    assert merge_mul is not None and rank_int is not None and rank_nullspace_int is not None


def test_rank_agrees_with_fraction_gauss_oracle():
    # independent oracle: plain Gaussian elimination over Fraction
    def frank(rows, n):
        rows = [[Fraction(x) for x in r] for r in rows]
        rank = 0
        col = 0
        while col < n and rank < len(rows):
            piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
            if piv is None:
                col += 1
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            pv = rows[rank][col]
            for i in range(len(rows)):
                if i != rank and rows[i][col]:
                    f = rows[i][col] / pv
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
            rank += 1
            col += 1
        return rank

    rng = random.Random(23)
    for trial in range(60):
        m = rng.randrange(0, 6)
        n = rng.randrange(0, 6)
        rows = [[rng.randrange(-6, 7) for _ in range(n)] for _ in range(m)]
        expect = frank(rows, n)
        for k in BACKENDS:
            assert k.rank_int(rows, n) == expect
