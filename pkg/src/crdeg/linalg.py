"""Small exact linear algebra over Q(i).

Matrices are lists of rows of GaussianRational.  Everything here is plain
Gaussian elimination; the matrices we meet are tiny.
"""
from __future__ import annotations

from .series import ONE, ZERO, gr


class SingularMatrixError(ArithmeticError):
    pass


def as_matrix(rows):
    return [[gr(x) for x in row] for row in rows]


def rref(rows):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = as_matrix(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    if not rows or not len(rows[0]):
        return 0
    return len(rref(rows)[1])


def nullspace(rows, ncols=None):
    """Basis of {x : A x = 0}."""
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols or 0)]
    ncols = len(rows[0])
    m, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for r, c in enumerate(piv):
            v[c] = -m[r][f]
        basis.append(v)
    return basis


def det(rows):
    m = as_matrix(rows)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    d = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c]), None)
        if p is None:
            return ZERO
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d = d * m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def inverse(rows):
    m = as_matrix(rows)
    n = len(m)
    aug = [r + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise SingularMatrixError("matrix is singular")
    return [r[n:] for r in red]


def matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), ZERO) for col in zip(*b)] for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


def independent_rows(rows):
    """Indices of the greedy (first-come) maximal independent subset."""
    chosen, basis = [], []
    for i, r in enumerate(rows):
        if rank(basis + [r]) > len(basis):
            basis.append(list(r))
            chosen.append(i)
    return chosen
