"""Dense exact linear algebra over the fields of :mod:`soergelkit.field`.

Matrices are lists of row lists.  Every routine is exact; zero tests use the
truth value of the entry, which is exact for both scalar kinds.
"""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

from .field import Scalar

Matrix = list[list[Scalar]]
Vector = list[Scalar]

ZERO = mpq(0)
ONE = mpq(1)


def zeros(n: int, m: int) -> Matrix:
    return [[ZERO] * m for _ in range(n)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = ONE
    return out


def copy(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def transpose(a: Matrix, ncols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def shape(a: Matrix, ncols: int = 0) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else ncols)


def matmul(a: Matrix, b: Matrix, inner: int | None = None, ncols: int | None = None) -> Matrix:
    n = len(a)
    m = len(b[0]) if b else (ncols or 0)
    out = zeros(n, m)
    for i, row in enumerate(a):
        acc = out[i]
        for k, x in enumerate(row):
            if not x:
                continue
            bk = b[k]
            for j in range(m):
                y = bk[j]
                if y:
                    acc[j] = acc[j] + x * y
    return out


def matvec(a: Matrix, v: Sequence[Scalar]) -> Vector:
    out = []
    for row in a:
        s: Scalar = ZERO
        for x, y in zip(row, v):
            if x and y:
                s = s + x * y
        out.append(s)
    return out


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(r, s)] for r, s in zip(a, b)]


def scale(c: Scalar, a: Matrix) -> Matrix:
    return [[c * x for x in r] for r in a]


def is_zero(a: Matrix) -> bool:
    return all(not x for r in a for x in r)


def equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(
        len(r) == len(s) and all(x == y for x, y in zip(r, s)) for r, s in zip(a, b)
    )


def rref(a: Matrix, ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns (input untouched)."""
    m = copy(a)
    nrows = len(m)
    ncols = len(m[0]) if m else (ncols or 0)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        row = m[r]
        inv = ONE / row[c]
        if inv != 1:
            row = [x * inv if x else x for x in row]
            m[r] = row
        nz = [j for j in range(c, ncols) if row[j]]
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f:
                    ri = m[i]
                    for j in nz:
                        ri[j] = ri[j] - f * row[j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def nullspace(a: Matrix, ncols: int | None = None) -> list[Vector]:
    """Basis of {x : a x = 0}."""
    n = len(a[0]) if a else (ncols or 0)
    if not a:
        return [[ONE if i == j else ZERO for i in range(n)] for j in range(n)]
    red, piv = rref(a, n)
    pivset = set(piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for row, p in zip(red, piv):
            if row[f]:
                v[p] = -row[f]
        basis.append(v)
    return basis


def row_space(rows: list[Vector], ncols: int) -> list[Vector]:
    if not rows:
        return []
    return rref(rows, ncols)[0]


def column_basis(a: Matrix) -> list[int]:
    """Indices of a maximal independent set of columns."""
    if not a or not a[0]:
        return []
    return rref(a)[1]


def solve(a: Matrix, b: Matrix) -> Matrix | None:
    """One solution X of a X = b, or None."""
    n = len(a)
    m = len(a[0]) if a else 0
    k = len(b[0]) if b else 0
    aug = [a[i][:] + b[i][:] for i in range(n)]
    red, piv = rref(aug, m + k)
    x = zeros(m, k)
    for row, p in zip(red, piv):
        if p >= m:
            return None
        for j in range(k):
            x[p][j] = row[m + j]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    x = solve(a, identity(n))
    if x is None or rank(a) < n:
        raise ZeroDivisionError("matrix is singular")
    return x


def block_diag(*blocks: Matrix, sizes: Sequence[int] | None = None) -> Matrix:
    dims = list(sizes) if sizes is not None else [len(b) for b in blocks]
    n = sum(dims)
    out = zeros(n, n)
    off = 0
    for b, d in zip(blocks, dims):
        for i in range(d):
            out[off + i][off : off + d] = b[i][:]
        off += d
    return out


def det(a: Matrix) -> Scalar:
    m = copy(a)
    n = len(m)
    d: Scalar = ONE
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
            f = m[i][c] * inv
            if f:
                for j in range(c, n):
                    m[i][j] = m[i][j] - f * m[c][j]
    return d
