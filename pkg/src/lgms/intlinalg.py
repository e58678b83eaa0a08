"""Exact integer and rational linear algebra on nested Python lists.

Everything here works on plain ``int`` / ``Fraction`` entries so that results
are certificates rather than floating point approximations.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(A))]


def matvec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def transpose(A: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*A)]


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(S, U, V)`` with ``U @ A @ V == S`` and S in Smith normal form.

    U and V are unimodular. The diagonal of S is non-negative and each entry
    divides the next.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    S = [[int(x) for x in row] for row in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (S, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        for M in (S, U):
            M[dst] = [a + q * b for a, b in zip(M[dst], M[src])]

    def add_col(src, dst, q):
        for M in (S, V):
            for row in M:
                row[dst] += q * row[src]

    for k in range(min(m, n)):
        # pivot: smallest non-zero absolute value in the trailing block
        while True:
            best = None
            for i in range(k, m):
                for j in range(k, n):
                    if S[i][j] and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return S, U, V
            swap_rows(k, best[0])
            swap_cols(k, best[1])
            p = S[k][k]
            dirty = False
            for i in range(k + 1, m):
                q = S[i][k] // p
                if q:
                    add_row(k, i, -q)
                dirty |= S[i][k] != 0
            for j in range(k + 1, n):
                q = S[k][j] // p
                if q:
                    add_col(k, j, -q)
                dirty |= S[k][j] != 0
            if dirty:
                continue
            # divisibility of the trailing block
            bad = next(((i, j) for i in range(k + 1, m) for j in range(k + 1, n)
                        if S[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], k, 1)
        if S[k][k] < 0:
            S[k] = [-x for x in S[k]]
            U[k] = [-x for x in U[k]]
    return S, U, V


def solve_rational(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve the square system ``A x = b`` exactly; None when A is singular."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def inverse_rational(A: Sequence[Sequence]) -> list[list[Fraction]] | None:
    n = len(A)
    cols = []
    for j in range(n):
        col = solve_rational(A, [int(i == j) for i in range(n)])
        if col is None:
            return None
        cols.append(col)
    return transpose(cols)


def determinant(A: Sequence[Sequence]) -> Fraction:
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


def as_integers(v: Sequence[Fraction]) -> tuple[int, ...] | None:
    if all(Fraction(x).denominator == 1 for x in v):
        return tuple(int(x) for x in v)
    return None
