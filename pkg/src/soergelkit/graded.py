"""Finite-dimensional graded modules over R = Sym(V*) and their degree-wise maps.

A :class:`GradedModule` stores one exact matrix per coordinate form ``x_i`` of
V and per degree, mapping the degree ``k`` piece to the degree ``k + 2``
piece, optionally with a graded symmetric form pairing degrees ``k`` and
``-k``.  Maps are dictionaries ``{source degree: matrix}``.

The Hom solver walks the degrees upwards: on the image of the operators a
map is forced by what happened two degrees lower, and on a complement it is
free.  Only the running set of partial solutions is kept, so the cost grows
with the number of module generators rather than with the square of the
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import flint
import numpy as np
from gmpy2 import mpq

from .field import Scalar
from .fmat import FMat

Blocks = dict[int, FMat]


@dataclass
class GradedModule:
    d: int
    nops: int
    dims: dict[int, int]
    ops: list[Blocks]
    form: Blocks | None = None
    word: tuple[int, ...] | None = None
    extra: dict[str, list[Blocks]] = field(default_factory=dict)
    labels: dict[int, list[tuple[int, ...]]] | None = None

    def __post_init__(self) -> None:
        self.dims = {k: v for k, v in sorted(self.dims.items()) if v}

    # -- shape -------------------------------------------------------------
    @property
    def degrees(self) -> list[int]:
        return list(self.dims)

    @property
    def dim(self) -> int:
        return sum(self.dims.values())

    def graded_dims(self) -> dict[int, int]:
        return dict(self.dims)

    def lowest_degree(self) -> int | None:
        return min(self.dims) if self.dims else None

    def highest_degree(self) -> int | None:
        return max(self.dims) if self.dims else None

    def is_zero(self) -> bool:
        return not self.dims

    # -- operators ---------------------------------------------------------
    def op(self, i: int, k: int, ops: list[Blocks] | None = None) -> FMat:
        """Matrix of x_i from degree k to degree k + 2 (zero matrix if absent)."""
        table = self.ops if ops is None else ops
        got = table[i].get(k)
        if got is not None:
            return got
        return FMat.zeros(self.dims.get(k + 2, 0), self.dims.get(k, 0), self.d)

    def linear_op(self, xi: Sequence[Scalar], k: int, ops: list[Blocks] | None = None) -> FMat:
        out = FMat.zeros(self.dims.get(k + 2, 0), self.dims.get(k, 0), self.d)
        for i, c in enumerate(xi):
            if c:
                out = out + self.op(i, k, ops).scale(c)
        return out

    def linear_blocks(self, xi: Sequence[Scalar], ops: list[Blocks] | None = None) -> Blocks:
        return {k: self.linear_op(xi, k, ops) for k in self.dims if k + 2 in self.dims}

    def power_op(self, blocks: Blocks, k: int, n: int) -> FMat:
        """blocks^n from degree k to degree k + 2n."""
        out = FMat.identity(self.dims.get(k, 0), self.d)
        for j in range(n):
            step = blocks.get(k + 2 * j)
            if step is None:
                return FMat.zeros(self.dims.get(k + 2 * n, 0), self.dims.get(k, 0), self.d)
            out = step @ out
        return out

    def form_block(self, k: int) -> FMat:
        """Gram matrix of the pairing M^k x M^-k."""
        if self.form is None:
            raise ValueError("module carries no form")
        got = self.form.get(k)
        if got is not None:
            return got
        return FMat.zeros(self.dims.get(k, 0), self.dims.get(-k, 0), self.d)

    def op_tables(self) -> list[list[Blocks]]:
        return [self.ops] + list(self.extra.values())


# -- graded maps ----------------------------------------------------------------


@dataclass
class GradedMap:
    """A map src -> dst raising degrees by ``degree``; ``blocks[k]`` acts on src^k."""

    src: GradedModule
    dst: GradedModule
    degree: int
    blocks: Blocks

    def block(self, k: int) -> FMat:
        got = self.blocks.get(k)
        if got is not None:
            return got
        return FMat.zeros(self.dst.dims.get(k + self.degree, 0), self.src.dims.get(k, 0), self.src.d)

    @classmethod
    def identity(cls, M: GradedModule) -> GradedMap:
        return cls(M, M, 0, {k: FMat.identity(n, M.d) for k, n in M.dims.items()})

    @classmethod
    def zero(cls, src: GradedModule, dst: GradedModule, degree: int = 0) -> GradedMap:
        return cls(src, dst, degree, {})

    def __matmul__(self, other: GradedMap) -> GradedMap:
        """Composition self o other."""
        out = {}
        for k in other.src.dims:
            mid = k + other.degree
            if mid in self.src.dims and mid + self.degree in self.dst.dims:
                out[k] = self.block(mid) @ other.block(k)
        return GradedMap(other.src, self.dst, self.degree + other.degree, out)

    def __add__(self, other: GradedMap) -> GradedMap:
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.src, self.dst, self.degree, {k: self.block(k) + other.block(k) for k in keys})

    def __sub__(self, other: GradedMap) -> GradedMap:
        keys = set(self.blocks) | set(other.blocks)
        return GradedMap(self.src, self.dst, self.degree, {k: self.block(k) - other.block(k) for k in keys})

    def scale(self, c: Scalar) -> GradedMap:
        return GradedMap(self.src, self.dst, self.degree, {k: b.scale(c) for k, b in self.blocks.items()})

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def trace(self) -> Scalar:
        t: Scalar = mpq(0)
        for b in self.blocks.values():
            t = t + b.trace()
        return t

    def flatten(self) -> FMat:
        """All block entries stacked into one column (degree order of the source)."""
        cols = []
        for k in self.src.dims:
            n = self.dst.dims.get(k + self.degree, 0) * self.src.dims[k]
            if n:
                cols.append(self.block(k).flatten_column())
        return FMat.vstack(cols, 1, self.src.d)

    def is_invertible(self) -> bool:
        if self.degree != 0 or self.src.dims != self.dst.dims:
            return False
        return all(self.block(k).rank() == n for k, n in self.src.dims.items())

    def commutes(self, tables: Iterable[tuple[list[Blocks], list[Blocks]]] | None = None) -> bool:
        """phi o x_i == x_i o phi for every operator table pair (default: the module actions)."""
        pairs = list(tables) if tables is not None else list(zip(self.src.op_tables(), self.dst.op_tables()))
        for src_ops, dst_ops in pairs:
            for i in range(self.src.nops):
                for k in self.src.dims:
                    lhs = self.block(k + 2) @ self.src.op(i, k, src_ops)
                    rhs = self.dst.op(i, k + self.degree, dst_ops) @ self.block(k)
                    if not lhs == rhs:
                        return False
        return True


def linear_combination(maps: Sequence[GradedMap], coeffs: Sequence[Scalar]) -> GradedMap:
    out = GradedMap.zero(maps[0].src, maps[0].dst, maps[0].degree)
    for f, c in zip(maps, coeffs):
        if c:
            out = out + f.scale(c)
    return out


def independent_subset(maps: Sequence[GradedMap]) -> list[GradedMap]:
    if not maps:
        return []
    cols = FMat.hstack([f.flatten() for f in maps], None, maps[0].src.d)
    if cols.rows == 0:
        return []
    return [maps[j] for j in cols.pivots()]


# -- tensor reshaping on embedded matrices --------------------------------------


def retensor(X: FMat, row_shape: Sequence[int], col_shape: Sequence[int], perm: Sequence[int], nrow: int) -> FMat:
    """Reinterpret X as a tensor with axes row_shape + col_shape, permute the axes
    and split them again after the first ``nrow`` axes."""
    shape = tuple(row_shape) + tuple(col_shape)
    new_shape = [shape[p] for p in perm]
    nr = prod(new_shape[:nrow])
    nc = prod(new_shape[nrow:])
    if nr == 0 or nc == 0 or X.rows == 0 or X.cols == 0:
        return FMat.zeros(nr, nc, X.d)
    flat = X.m.entries()
    if X.k == 1:
        arr = np.array(flat, dtype=object).reshape(shape).transpose(perm)
        return FMat(flint.fmpq_mat(nr, nc, arr.ravel().tolist()), nr, nc, X.d)
    a = len(row_shape)
    arr = np.array(flat, dtype=object).reshape(tuple(row_shape) + (2,) + tuple(col_shape) + (2,))

    def ax(p: int) -> int:
        return p if p < a else p + 1

    axes = [ax(p) for p in perm[:nrow]] + [a] + [ax(p) for p in perm[nrow:]] + [len(shape) + 1]
    arr = arr.transpose(axes)
    return FMat(flint.fmpq_mat(2 * nr, 2 * nc, arr.ravel().tolist()), nr, nc, X.d)


def _selector(m: int, cols: Sequence[int], d: int) -> FMat:
    return FMat.from_entries(m, len(cols), ((c, t, mpq(1)) for t, c in enumerate(cols)), d)


def _kron_identity_left(n: int, X: FMat) -> FMat:
    """kron(I_n, X^T) as used for freshly introduced parameters."""
    rows = X.to_rows()  # f x m
    f = len(rows)
    m = X.cols
    entries = []
    for i in range(n):
        for t in range(f):
            for j, x in enumerate(rows[t]):
                if x:
                    entries.append((i * m + j, i * f + t, x))
    return FMat.from_entries(n * m, n * f, entries, X.d)


def hom_space(
    M: GradedModule,
    N: GradedModule,
    degree: int = 0,
    tables: Sequence[tuple[list[Blocks], list[Blocks]]] | None = None,
) -> list[GradedMap]:
    """Basis of the maps M -> N raising degrees by ``degree`` that intertwine every
    operator (by default the x_i actions; ``tables`` adds further degree-2 operators)."""
    pairs = list(tables) if tables is not None else list(zip(M.op_tables(), N.op_tables()))
    dd = M.d
    if M.is_zero() or N.is_zero():
        return []
    r = len(pairs) * M.nops
    lo, hi = min(M.dims), max(M.dims)
    S: dict[int, FMat] = {}
    P = 0

    def rhs(prev: int, mp: int, n: int) -> FMat | None:
        npv = N.dims.get(prev + degree, 0)
        if P == 0 or mp == 0 or npv == 0 or n == 0:
            return None
        Sre = retensor(S[prev], (npv, mp), (P,), (0, 1, 2), 1)
        blocks = []
        for _, nops in pairs:
            for i in range(M.nops):
                blocks.append(N.op(i, prev + degree, nops) @ Sre)
        return FMat.hstack(blocks, n, dd)

    for k in range(lo, hi + 3):
        m = M.dims.get(k, 0)
        n = N.dims.get(k + degree, 0)
        if n == 0:
            S[k] = FMat.zeros(0, P, dd)
            continue
        prev = k - 2
        mp = M.dims.get(prev, 0)
        if mp:
            U = FMat.hstack([M.op(i, prev, mops) for mops, _ in pairs for i in range(M.nops)], m, dd)
        else:
            U = FMat.zeros(m, 0, dd)
        T = rhs(prev, mp, n)
        if T is not None:
            ker = U.nullspace() if m else FMat.identity(U.cols, dd)
            kappa = ker.cols
            if kappa:
                Tt = retensor(T, (n,), (r * mp, P), (0, 2, 1), 2)
                Z = Tt @ ker
                con = retensor(Z, (n, P), (kappa,), (0, 2, 1), 2)
                C = con.nullspace()
                if C.cols < P:
                    for key in S:
                        S[key] = S[key] @ C if S[key].rows else FMat.zeros(0, C.cols, dd)
                    P = C.cols
                    T = rhs(prev, mp, n)
        if m == 0:
            S[k] = FMat.zeros(0, P, dd)
            continue
        piv = U.pivots() if U.cols else []
        rank = len(piv)
        if rank:
            A = U.submatrix(None, piv)
            rows_i = set(A.T().pivots())
            free = [t for t in range(m) if t not in rows_i]
            B = FMat.hstack([A, _selector(m, free, dd)], m, dd)
            Binv = B.inverse()
        else:
            free = list(range(m))
            Binv = FMat.identity(m, dd)
        if T is not None and rank:
            Tt = retensor(T, (n,), (r * mp, P), (0, 2, 1), 2)
            sel = Tt.submatrix(None, piv) @ Binv.submatrix(list(range(rank)), None)
            old = retensor(sel, (n, P), (m,), (0, 2, 1), 2)
        else:
            old = FMat.zeros(n * m, P, dd)
        nf = len(free)
        if nf:
            new = _kron_identity_left(n, Binv.submatrix(list(range(rank, m)), None))
            for key in S:
                S[key] = FMat.hstack([S[key], FMat.zeros(S[key].rows, n * nf, dd)], S[key].rows, dd)
            S[k] = FMat.hstack([old, new], n * m, dd)
            P += n * nf
        else:
            S[k] = old
    out = []
    for p in range(P):
        blocks = {}
        for k, mk in M.dims.items():
            n = N.dims.get(k + degree, 0)
            if n:
                col = S[k].submatrix(None, [p])
                blocks[k] = retensor(col, (n, mk), (1,), (0, 1, 2), 1)
        out.append(GradedMap(M, N, degree, blocks))
    return out


# -- submodules cut out by idempotents ------------------------------------------


@dataclass
class Summand:
    """Image of an idempotent: the module, its inclusion and its projection."""

    module: GradedModule
    inclusion: GradedMap
    projection: GradedMap

    @property
    def idempotent(self) -> GradedMap:
        return self.inclusion @ self.projection


def image_of(p: GradedMap) -> Summand:
    """The summand p(M) of an idempotent degree-0 endomorphism p of M."""
    M = p.src
    dd = M.d
    incl: Blocks = {}
    proj: Blocks = {}
    dims: dict[int, int] = {}
    for k, n in M.dims.items():
        b = p.block(k)
        piv = b.pivots()
        if not piv:
            continue
        iota = b.submatrix(None, piv)
        rows = iota.T().pivots()
        Y = iota.submatrix(rows, None).inverse() @ b.submatrix(rows, None)
        incl[k] = iota
        proj[k] = Y
        dims[k] = len(piv)
    ops = []
    for table in M.ops:
        ops.append(_restrict_table(M, table, incl, proj, dims))
    extra = {name: [_restrict_table(M, t, incl, proj, dims) for t in tabs] for name, tabs in M.extra.items()}
    form = None
    if M.form is not None:
        form = {}
        for k in dims:
            if -k in dims:
                form[k] = incl[k].T() @ M.form_block(k) @ incl[-k]
    sub = GradedModule(dd, M.nops, dims, ops, form, M.word, extra)
    return Summand(sub, GradedMap(sub, M, 0, incl), GradedMap(M, sub, 0, proj))


def _restrict_table(M: GradedModule, table: Blocks, incl: Blocks, proj: Blocks, dims: dict[int, int]) -> Blocks:
    out = {}
    for k in dims:
        if k + 2 in dims and k in table:
            out[k] = proj[k + 2] @ table[k] @ incl[k]
    return out
