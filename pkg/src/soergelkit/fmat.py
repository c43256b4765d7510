"""Exact matrices over Q or Q(sqrt d), backed by python-flint.

A matrix over Q(sqrt d) is stored through the ring embedding that sends the
scalar a + b*sqrt(d) to the 2x2 rational block [[a, d*b], [b, a]].  Blocks
are interleaved, so entry (i, j) occupies rows 2i, 2i+1 and columns 2j, 2j+1.
Sums and products of embedded matrices are embedded sums and products, and a
column of the original matrix is independent of the earlier columns exactly
when the even embedded column is a pivot of the rational echelon form.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import flint
from gmpy2 import mpq

from .field import QuadraticElement, Scalar

_fq = flint.fmpq


def _to_fmpq(x) -> flint.fmpq:
    x = mpq(x)
    return _fq(int(x.numerator), int(x.denominator))


def _to_mpq(x: flint.fmpq) -> mpq:
    return mpq(int(x.p), int(x.q))


class FMat:
    """rows x cols matrix over Q(sqrt d); d == 1 means the rationals."""

    __slots__ = ("m", "rows", "cols", "d")

    def __init__(self, m: flint.fmpq_mat, rows: int, cols: int, d: int) -> None:
        self.m = m
        self.rows = rows
        self.cols = cols
        self.d = d

    @property
    def k(self) -> int:
        return 1 if self.d == 1 else 2

    # -- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int, d: int) -> FMat:
        k = 1 if d == 1 else 2
        return cls(flint.fmpq_mat(k * rows, k * cols), rows, cols, d)

    @classmethod
    def identity(cls, n: int, d: int) -> FMat:
        k = 1 if d == 1 else 2
        m = flint.fmpq_mat(k * n, k * n)
        for i in range(k * n):
            m[i, i] = 1
        return cls(m, n, n, d)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]], d: int, ncols: int | None = None) -> FMat:
        r = len(rows)
        c = len(rows[0]) if rows else (ncols or 0)
        return cls.from_entries(r, c, ((i, j, x) for i, row in enumerate(rows) for j, x in enumerate(row) if x), d)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int, Scalar]], d: int) -> FMat:
        """Sparse constructor from (i, j, value) triples; repeated positions add up."""
        if d == 1:
            flat = [_fq(0)] * (rows * cols)
            for i, j, x in entries:
                flat[i * cols + j] += _to_fmpq(x)
            return cls(flint.fmpq_mat(rows, cols, flat) if rows and cols else flint.fmpq_mat(rows, cols), rows, cols, d)
        R, C = 2 * rows, 2 * cols
        flat = [_fq(0)] * (R * C)
        for i, j, x in entries:
            if isinstance(x, QuadraticElement):
                a, b = _to_fmpq(x.a), _to_fmpq(x.b)
            else:
                a, b = _to_fmpq(x), _fq(0)
            base = 2 * i * C + 2 * j
            flat[base] += a
            flat[base + 1] += d * b
            flat[base + C] += b
            flat[base + C + 1] += a
        return cls(flint.fmpq_mat(R, C, flat) if R and C else flint.fmpq_mat(R, C), rows, cols, d)

    @classmethod
    def scalar(cls, n: int, c: Scalar, d: int) -> FMat:
        return cls.from_entries(n, n, ((i, i, c) for i in range(n)), d)

    # -- access --------------------------------------------------------------
    def entry(self, i: int, j: int) -> Scalar:
        if self.d == 1:
            return _to_mpq(self.m[i, j])
        a = _to_mpq(self.m[2 * i, 2 * j])
        b = _to_mpq(self.m[2 * i + 1, 2 * j])
        return QuadraticElement.make(a, b, self.d)

    def to_rows(self) -> list[list[Scalar]]:
        if self.rows == 0 or self.cols == 0:
            return [[] for _ in range(self.rows)]
        flat = self.m.entries()
        if self.d == 1:
            C = self.cols
            return [[_to_mpq(flat[i * C + j]) for j in range(C)] for i in range(self.rows)]
        C2 = 2 * self.cols
        out = []
        for i in range(self.rows):
            r0 = 2 * i * C2
            r1 = r0 + C2
            row = []
            for j in range(self.cols):
                a = flat[r0 + 2 * j]
                b = flat[r1 + 2 * j]
                row.append(
                    _to_mpq(a) if b == 0 else QuadraticElement(_to_mpq(a), _to_mpq(b), self.d)
                )
            out.append(row)
        return out

    def is_zero(self) -> bool:
        if self.rows == 0 or self.cols == 0:
            return True
        return all(x == 0 for x in self.m.entries())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FMat):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        if self.rows == 0 or self.cols == 0:
            return True
        return self.m == other.m

    __hash__ = None  # type: ignore[assignment]

    # -- arithmetic ------------------------------------------------------------
    def __add__(self, other: FMat) -> FMat:
        if self.rows == 0 or self.cols == 0:
            return self
        return FMat(self.m + other.m, self.rows, self.cols, self.d)

    def __sub__(self, other: FMat) -> FMat:
        if self.rows == 0 or self.cols == 0:
            return self
        return FMat(self.m - other.m, self.rows, self.cols, self.d)

    def __neg__(self) -> FMat:
        if self.rows == 0 or self.cols == 0:
            return self
        return FMat(-self.m, self.rows, self.cols, self.d)

    def __matmul__(self, other: FMat) -> FMat:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return FMat.zeros(self.rows, other.cols, self.d)
        return FMat(self.m * other.m, self.rows, other.cols, self.d)

    def scale(self, c: Scalar) -> FMat:
        if self.rows == 0 or self.cols == 0:
            return self
        if isinstance(c, QuadraticElement):
            return FMat.scalar(self.rows, c, self.d) @ self
        return FMat(self.m * _to_fmpq(c), self.rows, self.cols, self.d)

    def T(self) -> FMat:
        if self.d == 1 or self.rows == 0 or self.cols == 0:
            return FMat(self.m.transpose(), self.cols, self.rows, self.d)
        # emb(x)^T = D emb(x) D^-1 with D = diag(1, d) on every 2x2 block
        t = self.m.transpose()
        R, C = 2 * self.cols, 2 * self.rows
        flat = t.entries()
        d = self.d
        for i in range(R):
            for j in range(C):
                if (i & 1) != (j & 1):
                    x = flat[i * C + j]
                    if x != 0:
                        flat[i * C + j] = x / d if i & 1 else x * d
        return FMat(flint.fmpq_mat(R, C, flat), self.cols, self.rows, d)

    # -- shape manipulation ---------------------------------------------------
    def submatrix(self, rows: Sequence[int] | None, cols: Sequence[int] | None) -> FMat:
        rs = list(range(self.rows)) if rows is None else list(rows)
        cs = list(range(self.cols)) if cols is None else list(cols)
        if not rs or not cs:
            return FMat.zeros(len(rs), len(cs), self.d)
        k = self.k
        flat = self.m.entries()
        C = k * self.cols
        if k == 1:
            out = [flat[i * C + j] for i in rs for j in cs]
        else:
            er = [2 * i + t for i in rs for t in (0, 1)]
            ec = [2 * j + t for j in cs for t in (0, 1)]
            out = [flat[i * C + j] for i in er for j in ec]
        return FMat(flint.fmpq_mat(k * len(rs), k * len(cs), out), len(rs), len(cs), self.d)

    @staticmethod
    def hstack(mats: Sequence[FMat], rows: int | None = None, d: int = 1) -> FMat:
        mats = [m for m in mats if m.cols]
        if not mats:
            return FMat.zeros(rows or 0, 0, d)
        r = mats[0].rows
        dd = mats[0].d
        k = mats[0].k
        if r == 0:
            return FMat.zeros(0, sum(m.cols for m in mats), dd)
        flats = [m.m.entries() for m in mats]
        widths = [k * m.cols for m in mats]
        out = []
        for i in range(k * r):
            for f, w in zip(flats, widths):
                out.extend(f[i * w : (i + 1) * w])
        return FMat(flint.fmpq_mat(k * r, sum(widths), out), r, sum(m.cols for m in mats), dd)

    @staticmethod
    def vstack(mats: Sequence[FMat], cols: int | None = None, d: int = 1) -> FMat:
        mats = [m for m in mats if m.rows]
        if not mats:
            return FMat.zeros(0, cols or 0, d)
        c = mats[0].cols
        dd = mats[0].d
        k = mats[0].k
        if c == 0:
            return FMat.zeros(sum(m.rows for m in mats), 0, dd)
        out = []
        for m in mats:
            out.extend(m.m.entries())
        return FMat(flint.fmpq_mat(k * sum(m.rows for m in mats), k * c, out), sum(m.rows for m in mats), c, dd)

    @staticmethod
    def block_diag(mats: Sequence[FMat], d: int) -> FMat:
        r = sum(m.rows for m in mats)
        c = sum(m.cols for m in mats)
        k = 1 if d == 1 else 2
        out = flint.fmpq_mat(k * r, k * c)
        ro = co = 0
        for m in mats:
            if m.rows and m.cols:
                flat = m.m.entries()
                w = k * m.cols
                for i in range(k * m.rows):
                    for j in range(w):
                        x = flat[i * w + j]
                        if x != 0:
                            out[k * ro + i, k * co + j] = x
            ro += m.rows
            co += m.cols
        return FMat(out, r, c, d)

    def flatten_column(self) -> FMat:
        """The entries as one column, row-major."""
        n = self.rows * self.cols
        if n == 0:
            return FMat.zeros(0, 1, self.d)
        flat = self.m.entries()
        if self.d == 1:
            return FMat(flint.fmpq_mat(n, 1, flat), n, 1, 1)
        C2 = 2 * self.cols
        out = []
        for i in range(self.rows):
            r0 = 2 * i * C2
            r1 = r0 + C2
            for j in range(self.cols):
                a, b = flat[r0 + 2 * j], flat[r1 + 2 * j]
                out.extend((a, self.d * b, b, a))
        return FMat(flint.fmpq_mat(2 * n, 2, out), n, 1, self.d)

    # -- elimination -------------------------------------------------------------
    def _rref(self) -> tuple[list, list[int], dict[int, int]]:
        """Entries of the rational rref of the embedded matrix, field pivots, and the
        row holding each embedded pivot column."""
        R, _ = self.m.rref()
        k = self.k
        flat = R.entries()
        C = k * self.cols
        nr = k * self.rows
        prow: dict[int, int] = {}
        r = 0
        for c in range(C):
            if r >= nr:
                break
            if flat[r * C + c] != 0:
                prow[c] = r
                r += 1
        piv = [c // k for c in range(0, C, k) if c in prow]
        return flat, piv, prow

    def pivots(self) -> list[int]:
        if self.rows == 0 or self.cols == 0:
            return []
        return self._rref()[1]

    def rank(self) -> int:
        return len(self.pivots())

    def nullspace(self) -> FMat:
        """Columns form a basis of {x : self x = 0}."""
        n = self.cols
        if self.rows == 0 or n == 0:
            return FMat.identity(n, self.d)
        flat, piv, prow = self._rref()
        k = self.k
        C = k * n
        pivset = set(piv)
        free = [j for j in range(n) if j not in pivset]
        entries = []
        for t, f in enumerate(free):
            entries.append((f, t, mpq(1)))
            for j in piv:
                x = flat[prow[k * j] * C + k * f]
                if k == 1:
                    if x != 0:
                        entries.append((j, t, -_to_mpq(x)))
                else:
                    y = flat[prow[k * j + 1] * C + k * f]
                    if x != 0 or y != 0:
                        entries.append((j, t, -QuadraticElement.make(_to_mpq(x), _to_mpq(y), self.d)))
        return FMat.from_entries(n, len(free), entries, self.d)

    def solve_right(self, b: FMat) -> FMat:
        """X with self @ X = b for an invertible square self."""
        if self.rows == 0:
            return FMat.zeros(0, b.cols, self.d)
        return FMat(self.m.solve(b.m), self.cols, b.cols, self.d)

    def inverse(self) -> FMat:
        return self.solve_right(FMat.identity(self.rows, self.d))

    def trace(self) -> Scalar:
        t: Scalar = mpq(0)
        for i in range(self.rows):
            t = t + self.entry(i, i)
        return t

    def __repr__(self) -> str:
        return f"FMat({self.rows}x{self.cols}, d={self.d})"
