import random
from fractions import Fraction

import pytest

from skelpot import SingularMatrixError, is_psd_exact, rank_exact, solve_exact


F = Fraction


def test_solve_simple():
    a = [[F(2), F(1)], [F(1), F(3)]]
    b = [F(5), F(10)]
    x = solve_exact(a, b)
    assert [sum(r[j] * x[j] for j in range(2)) for r in a] == b


def test_solve_with_fractions():
    a = [[F(1, 3), F(1, 7)], [F(2, 5), F(1)]]
    b = [F(1), F(0)]
    x = solve_exact(a, b)
    assert [sum(r[j] * x[j] for j in range(2)) for r in a] == b


def test_singular_raises():
    with pytest.raises(SingularMatrixError):
        solve_exact([[F(1), F(2)], [F(2), F(4)]], [F(1), F(1)])


def test_rank():
    assert rank_exact([[F(1), F(2)], [F(2), F(4)]]) == 1
    assert rank_exact([[F(1), F(0)], [F(0), F(1)]]) == 2
    assert rank_exact([[F(0), F(0)]]) == 0


def _minor_psd(m):
    """Independent PSD oracle: all principal minors nonnegative."""
    import itertools
    n = len(m)

    def det(sub):
        k = len(sub)
        if k == 0:
            return F(1)
        total = F(0)
        for perm in itertools.permutations(range(k)):
            sign = 1
            p = list(perm)
            for i in range(k):
                for j in range(i + 1, k):
                    if p[i] > p[j]:
                        sign = -sign
            term = F(sign)
            for i in range(k):
                term *= sub[i][perm[i]]
            total += term
        return total

    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            sub = [[m[i][j] for j in idx] for i in idx]
            if det(sub) < 0:
                return False
    return True


def test_psd_known_cases():
    assert is_psd_exact([[F(2), F(0)], [F(0), F(2)]])
    assert not is_psd_exact([[F(1), F(0)], [F(0), F(-1)]])
    assert is_psd_exact([[F(1), F(1)], [F(1), F(1)]])       # rank-1 PSD
    assert not is_psd_exact([[F(0), F(1)], [F(1), F(0)]])   # zero diagonal
    assert is_psd_exact([[F(0), F(0)], [F(0), F(3)]])


def test_psd_matches_minor_oracle():
    rng = random.Random(5)
    for _ in range(150):
        n = rng.randint(1, 4)
        raw = [[F(rng.randint(-3, 3), rng.randint(1, 3))
                for _ in range(n)] for _ in range(n)]
        sym = [[raw[i][j] + raw[j][i] for j in range(n)] for i in range(n)]
        assert is_psd_exact(sym) == _minor_psd(sym)
        gram = [[sum(raw[i][k] * raw[j][k] for k in range(n))
                 for j in range(n)] for i in range(n)]
        assert is_psd_exact(gram)


def test_psd_rejects_asymmetric():
    with pytest.raises(ValueError):
        is_psd_exact([[F(1), F(2)], [F(0), F(1)]])
