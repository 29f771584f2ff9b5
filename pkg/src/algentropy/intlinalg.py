"""Exact integer linear algebra on Python integers.

Both routines work on lists of lists of ``int`` and never touch floats.
"""
from __future__ import annotations

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def _copy(A: Sequence[Sequence[int]]) -> Matrix:
    return [[int(v) for v in row] for row in A]


def bareiss_determinant(A: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free elimination.

    Every intermediate entry is a minor of ``A``, so all divisions are exact.
    """
    M = _copy(A)
    n = len(M)
    if n == 0:
        return 1
    if any(len(row) != n for row in M):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        pivot = M[k][k]
        row_k = M[k]
        for i in range(k + 1, n):
            row_i = M[i]
            a = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (pivot * row_i[j] - a * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * M[n - 1][n - 1]


def smith_normal_form(A: Sequence[Sequence[int]]) -> Tuple[List[int], Matrix, Matrix]:
    """Smith normal form ``L @ A @ R = diag(d)`` with unimodular ``L`` and ``R``.

    Returns the diagonal (``d[i]`` divides ``d[i+1]``, zeros last) and both
    transforms.
    """
    D = _copy(A)
    m = len(D)
    n = len(D[0]) if m else 0
    L = [[int(i == j) for j in range(m)] for i in range(m)]
    R = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in R:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row_dst += c * row_src
        D[dst] = [a + c * b for a, b in zip(D[dst], D[src])]
        L[dst] = [a + c * b for a, b in zip(L[dst], L[src])]

    def add_col(src, dst, c):
        for row in D:
            row[dst] += c * row[src]
        for row in R:
            row[dst] += c * row[src]

    for t in range(min(m, n)):
        # pivot: smallest nonzero magnitude in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(t, i, -(D[i][t] // D[t][t]))
                    if D[i][t]:
                        done = False
                        swap_rows(t, i)
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(t, j, -(D[t][j] // D[t][t]))
                    if D[t][j]:
                        done = False
                        swap_cols(t, j)
            if not done:
                continue
            # the pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if D[t][t] < 0:
            D[t] = [-v for v in D[t]]
            L[t] = [-v for v in L[t]]
    diag = [D[i][i] for i in range(min(m, n))]
    return diag, L, R


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]
