"""Exact rational linear algebra: fraction-free (Bareiss) elimination.

Rows are cleared to integers first; the elimination then stays in
arbitrary-precision integers, with a single exact division per step.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class SingularMatrixError(ValueError):
    pass


def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Solve A x = b exactly; A must be square and nonsingular."""
    n = len(a)
    if n == 0:
        return []
    m = []
    for i in range(n):
        row = [Fraction(x) for x in a[i]] + [Fraction(b[i])]
        den = 1
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
        m.append([int(x * den) for x in row])

    prev = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]

    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(m[i][n])
        for j in range(i + 1, n):
            s -= m[i][j] * x[j]
        x[i] = s / m[i][i]
    return x


def rank_exact(a: list[list[Fraction]]) -> int:
    """Row rank over the rationals (plain exact elimination)."""
    m = [[Fraction(x) for x in row] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows):
            if m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def is_psd_exact(a: list[list[Fraction]]) -> bool:
    """Exact positive-semidefiniteness of a symmetric rational matrix,
    via pivoted LDL^T (Schur complements on the largest diagonal entry)."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    for i in range(n):
        for j in range(i):
            if m[i][j] != m[j][i]:
                raise ValueError("matrix is not symmetric")
    idx = list(range(n))
    while idx:
        piv = max(idx, key=lambda i: m[i][i])
        if m[piv][piv] < 0:
            return False
        if m[piv][piv] == 0:
            # all diagonal entries <= 0 here; PSD iff remaining block is zero
            return all(m[i][j] == 0 for i in idx for j in idx)
        d = m[piv][piv]
        rest = [i for i in idx if i != piv]
        for i in rest:
            for j in rest:
                m[i][j] -= m[i][piv] * m[piv][j] / d
        idx = rest
    return True
