"""Exact linear solves over the rationals."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


class SingularMatrixError(ArithmeticError):
    pass


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve ``a x = b`` exactly with fraction-free (Bareiss) elimination.

    Each row is scaled to integers first; row scaling leaves the solution
    unchanged. Pivots are the first nonzero entry in the column.
    """
    n = len(a)
    if n == 0:
        return []
    m = []
    for row, rhs in zip(a, b):
        if len(row) != n:
            raise ValueError("matrix is not square")
        entries = [Fraction(x) for x in row] + [Fraction(rhs)]
        scale = lcm(*(x.denominator for x in entries))
        m.append([x.numerator * (scale // x.denominator) for x in entries])

    prev = 1
    for k in range(n):
        pivot = next((r for r in range(k, n) if m[r][k] != 0), None)
        if pivot is None:
            raise SingularMatrixError(f"no pivot in column {k}")
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
        mk = m[k]
        pk = mk[k]
        for i in range(k + 1, n):
            mi = m[i]
            f = mi[k]
            if f == 0:
                # Bareiss step with a zero multiplier reduces to scaling
                for j in range(k + 1, n + 1):
                    mi[j] = mi[j] * pk // prev
            else:
                for j in range(k + 1, n + 1):
                    mi[j] = (mi[j] * pk - f * mk[j]) // prev
            mi[k] = 0
        prev = pk

    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(m[i][n])
        for j in range(i + 1, n):
            if m[i][j]:
                acc -= m[i][j] * x[j]
        x[i] = acc / m[i][i]
    return x
