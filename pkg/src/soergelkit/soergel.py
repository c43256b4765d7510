"""Bott-Samelson and Soergel modules after right augmentation.

``BS(word) (x)_R k`` has the basis ``c_eps`` (eps a 0/1 vector, ``c_e`` for a 0
and ``c_s`` for a 1) in degree ``2|eps| - n``.  A linear form is pushed from the
left through the factors with

    f . c_e = c_e . s(f) + c_s . d_s(f)        f . c_s = c_s . f

and whatever reaches the right end is augmented to its constant term.  The
modules are built by prepending one factor at a time, which only needs the
left action and the form of the tail.

Indecomposable modules ``B_w`` are produced recursively: ``B_w`` is the
complement, inside ``B_s (x) B_x`` with ``s`` the first letter of the
canonical reduced word of ``w``, of the summands predicted by the Hecke
algebra.  Each predicted summand ``B_z(j)`` is split off through the pairing
``Hom(B_z(j), M) x Hom(M, B_z(j)) -> End(B_z) = k`` whose rank is its exact
multiplicity, and the complement is certified indecomposable through its
degree-0 endomorphism ring.

>>> from soergelkit.coxeter import build_system, preset
>>> cat = SoergelCategory(build_system(preset("A2")))
>>> W = cat.W
>>> cat.extract(W.from_word((0, 1, 0))).module.graded_dims()
{-3: 1, -1: 2, 1: 2, 3: 1}
>>> cat.decomposition_report((0, 0)).match
True
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Sequence

import sympy
from gmpy2 import mpq

from .coxeter import CoxeterSystem, GroupElement, Word
from .field import QuadraticElement, Scalar
from .fmat import FMat
from .graded import (
    Blocks,
    GradedMap,
    GradedModule,
    Summand,
    hom_space as _hom_space,
    image_of,
    independent_subset,
    linear_combination,
)
from .hecke import HeckeAlgebra, LaurentPoly
from .polyalg import GradedPolynomial, PolynomialRing, reflect_linear

ZERO_Q = mpq(0)
ONE_Q = mpq(1)


class InfiniteGroupError(ValueError):
    """Module-level computations need a finite Coxeter group."""


class SplittingError(RuntimeError):
    """No idempotent could be found (retry budget spent or field too small)."""


class VerificationFailure(AssertionError):
    """A statement that must hold for Soergel modules failed; carries a witness."""

    def __init__(self, message: str, witness: dict | None = None) -> None:
        super().__init__(message)
        self.witness = witness or {}


# -- building modules -----------------------------------------------------------


def empty_module(W: CoxeterSystem) -> GradedModule:
    """The ground field in degree 0 with a unit form: the module of the empty word."""
    d = W.field.d
    n = W.realization.dim
    return GradedModule(d, n, {0: 1}, [{} for _ in range(n)], {0: FMat.identity(1, d)}, (), {}, {0: [()]})


def _block2(tl: FMat, tr: FMat, bl: FMat, br: FMat, r1: int, r2: int, c1: int, c2: int, d: int) -> FMat:
    top = FMat.hstack([tl, tr], r1, d) if r1 else FMat.zeros(0, c1 + c2, d)
    bot = FMat.hstack([bl, br], r2, d) if r2 else FMat.zeros(0, c1 + c2, d)
    return FMat.vstack([top, bot], c1 + c2, d)


def _zero(r: int, c: int, d: int) -> FMat:
    return FMat.zeros(r, c, d)


def prepend(W: CoxeterSystem, s: int, N: GradedModule) -> GradedModule:
    """B_s (x) N, for N a graded left module with a form.

    The degree-k piece is ``c_e (x) N^{k+1}`` followed by ``c_s (x) N^{k-1}``.
    Extra operator tables of N act on the second tensor factor.
    """
    d = N.d
    real = W.realization
    cor = real.coroots[s]
    nd = N.dims
    degs = sorted({k - 1 for k in nd} | {k + 1 for k in nd})
    dims = {k: nd.get(k + 1, 0) + nd.get(k - 1, 0) for k in degs}
    dims = {k: v for k, v in dims.items() if v}

    def a(k: int) -> int:
        return nd.get(k + 1, 0)

    def b(k: int) -> int:
        return nd.get(k - 1, 0)

    ops: list[Blocks] = []
    for i in range(N.nops):
        unit = [ONE_Q if j == i else ZERO_Q for j in range(N.nops)]
        sx = reflect_linear(W, s, unit)
        table: Blocks = {}
        for k in dims:
            if k + 2 not in dims:
                continue
            aa = N.linear_op(sx, k + 1)  # N^{k+1} -> N^{k+3}
            ab = FMat.scalar(a(k), cor[i], d) if cor[i] else _zero(b(k + 2), a(k), d)
            bb = N.op(i, k - 1)  # N^{k-1} -> N^{k+1}
            table[k] = _block2(aa, _zero(a(k + 2), b(k), d), ab, bb, a(k + 2), b(k + 2), a(k), b(k), d)
        ops.append(table)
    extra = {}
    for name, tabs in N.extra.items():
        new_tabs = []
        for tab in tabs:
            t: Blocks = {}
            for k in dims:
                if k + 2 in dims:
                    t[k] = _block2(
                        _tab(N, tab, k + 1),
                        _zero(a(k + 2), b(k), d),
                        _zero(b(k + 2), a(k), d),
                        _tab(N, tab, k - 1),
                        a(k + 2),
                        b(k + 2),
                        a(k),
                        b(k),
                        d,
                    )
            new_tabs.append(t)
        extra[name] = new_tabs
    form = None
    if N.form is not None:
        alpha = real.roots[s]
        form = {}
        for k in dims:
            if -k not in dims:
                continue
            ab = N.form_block(k + 1)  # N^{k+1} x N^{-k-1}
            ba = N.form_block(k - 1)  # N^{k-1} x N^{-k+1}
            bb = N.linear_op(alpha, k - 1).T() @ N.form_block(k + 1)
            form[k] = _block2(_zero(a(k), a(-k), d), ab, ba, bb, a(k), b(k), a(-k), b(-k), d)
    labels = None
    if N.labels is not None:
        labels = {}
        for k in dims:
            labels[k] = [(0,) + e for e in N.labels.get(k + 1, [])] + [(1,) + e for e in N.labels.get(k - 1, [])]
    word = (s,) + N.word if N.word is not None else None
    return GradedModule(d, N.nops, dims, ops, form, word, extra, labels)


def _tab(N: GradedModule, tab: Blocks, k: int) -> FMat:
    got = tab.get(k)
    if got is not None:
        return got
    return FMat.zeros(N.dims.get(k + 2, 0), N.dims.get(k, 0), N.d)


def tensor_map(W: CoxeterSystem, s: int, phi: GradedMap, src: GradedModule, dst: GradedModule) -> GradedMap:
    """id_{B_s} (x) phi between prepend(s, phi.src) = src and prepend(s, phi.dst) = dst."""
    blocks = {}
    for k in src.dims:
        if k + phi.degree in dst.dims:
            blocks[k] = FMat.block_diag([phi.block(k + 1), phi.block(k - 1)], src.d)
    return GradedMap(src, dst, phi.degree, blocks)


def bs_direct(W: CoxeterSystem, word: Sequence[int]) -> GradedModule:
    """BS(word) (x) k from the closed pushing formula (no recursion; no form).

    ``x . c_eps = sum over k with eps_k = 0 of <x_k, alpha_{s_k}^vee> c_{eps + e_k}``
    where ``x_1 = x`` and ``x_{k+1}`` is ``s_k(x_k)`` or ``x_k`` as eps_k is 0 or 1.
    """
    real = W.realization
    d = W.field.d
    n = len(word)
    nv = real.dim
    labels: dict[int, list[tuple[int, ...]]] = {}
    for mask in range(2**n):
        eps = tuple((mask >> (n - 1 - j)) & 1 for j in range(n))
        labels.setdefault(2 * sum(eps) - n, []).append(eps)
    for k in labels:
        labels[k].sort()
    index = {e: (k, i) for k, es in labels.items() for i, e in enumerate(es)}
    ops: list[Blocks] = []
    for v in range(nv):
        entries: dict[int, list] = {}
        for eps, (k, col) in index.items():
            xi = [ONE_Q if j == v else ZERO_Q for j in range(nv)]
            for pos, s in enumerate(word):
                if eps[pos] == 0:
                    c = real.pairing(xi, real.coroots[s])
                    if c:
                        tgt = eps[:pos] + (1,) + eps[pos + 1 :]
                        entries.setdefault(k, []).append((index[tgt][1], col, c))
                    xi = reflect_linear(W, s, xi)
        table = {
            k: FMat.from_entries(len(labels[k + 2]), len(labels[k]), ents, d) for k, ents in entries.items()
        }
        ops.append(table)
    dims = {k: len(v) for k, v in labels.items()}
    return GradedModule(d, nv, dims, ops, None, tuple(word), {}, labels)


def poly_action(M: GradedModule, f: GradedPolynomial, k: int) -> FMat:
    """Matrix of a homogeneous polynomial acting from M^k (zero-size if out of range)."""
    deg = f.degree() if f else 0
    out = FMat.zeros(M.dims.get(k + deg, 0), M.dims.get(k, 0), M.d)
    for mono, c in f.terms.items():
        cur = FMat.identity(M.dims.get(k, 0), M.d)
        kk = k
        for i, e in enumerate(mono):
            for _ in range(e):
                cur = M.op(i, kk) @ cur
                kk += 2
        out = out + cur.scale(c)
    return out


def bimodule_normal_form(R: PolynomialRing, s: int, left: GradedPolynomial, right: GradedPolynomial):
    """Normal form of ``left (x) right`` in R (x)_{R^s} R as the pair (P, Q) with
    ``left (x) right = 1 (x) P + alpha_s (x) Q``, using R = R^s + R^s alpha_s."""
    a = R.root(s)
    odd = R.demazure(s, left) * mpq(1, 2)
    even = left - odd * a
    return even * right, odd * right


# -- the category ---------------------------------------------------------------


@dataclass
class SoergelSummand:
    """A summand of a module, with its label ``B_label(shift)`` once identified."""

    parent: GradedModule
    summand: Summand
    label: GroupElement | None = None
    shift: int = 0

    @property
    def module(self) -> GradedModule:
        return self.summand.module

    @property
    def idempotent(self) -> GradedMap:
        return self.summand.idempotent

    @property
    def inclusion(self) -> GradedMap:
        return self.summand.inclusion

    @property
    def projection(self) -> GradedMap:
        return self.summand.projection


@dataclass
class Reference:
    """The indecomposable B_w with its embedding into BS(canonical word of w)."""

    w: GroupElement
    word: Word
    module: GradedModule
    # the chain of inclusions is composed lazily
    _tail: Reference | None = None
    _local: Summand | None = None
    _first: int | None = None
    _cat: SoergelCategory | None = None
    _embedding: Summand | None = None

    def embedding(self) -> SoergelSummand:
        """B_w as a summand of BS(word) with inclusion and projection maps."""
        if self._embedding is None:
            cat = self._cat
            assert cat is not None
            bs = cat.bs(self.word)
            if self._tail is None:
                self._embedding = Summand(self.module, GradedMap.identity(bs), GradedMap.identity(bs))
            else:
                tail = self._tail.embedding()
                s = self._first
                M = self._local.inclusion.dst  # B_s (x) B_x
                up = tensor_map(cat.W, s, tail.inclusion, M, bs)
                down = tensor_map(cat.W, s, tail.projection, bs, M)
                self._embedding = Summand(
                    self.module, up @ self._local.inclusion, self._local.projection @ down
                )
        emb = self._embedding
        return SoergelSummand(self._cat.bs(self.word), emb, self.w, 0)


@dataclass
class PieceRecord:
    label: GroupElement
    shift: int
    certified_by: str


@dataclass
class PairDecomposition:
    """B_s (x) B_x split into labelled pieces."""

    s: int
    x: GroupElement
    pieces: list[PieceRecord]
    predicted: dict[tuple[GroupElement, int], int]


@dataclass
class DecompositionReport:
    word: Word
    summands: list[dict]
    predicted: dict[str, dict[int, int]]
    found: dict[str, dict[int, int]]
    match: bool
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "word": list(self.word),
            "summands": self.summands,
            "predicted": self.predicted,
            "found": self.found,
            "match": self.match,
            **({"witness": self.witness} if self.witness else {}),
        }


def _poly_to_dict(p: LaurentPoly) -> dict[int, int]:
    return {e: c for e, c in sorted(p.items())}


class SoergelCategory:
    """Soergel modules of a finite Coxeter group, with memoized references.

    All memo tables follow a fill-once contract guarded by one re-entrant lock, so
    the object may be shared between threads.
    """

    def __init__(self, W: CoxeterSystem, seed: int = 0, retry_budget: int = 60) -> None:
        if not W.is_finite():
            raise InfiniteGroupError("Soergel modules are only handled for finite Coxeter groups")
        self.W = W
        self.H = HeckeAlgebra(W)
        self.R = PolynomialRing(W)
        self.seed = seed
        self.retry_budget = retry_budget
        self._lock = threading.RLock()
        self._bs: dict[Word, GradedModule] = {(): empty_module(W)}
        self._ref: dict[GroupElement, Reference] = {}
        self._pairs: dict[tuple[int, GroupElement], PairDecomposition] = {}
        self._end_dims: dict[GroupElement, int] = {}

    # -- Bott-Samelson modules ---------------------------------------------
    def bs(self, word: Sequence[int]) -> GradedModule:
        word = tuple(word)
        with self._lock:
            got = self._bs.get(word)
            if got is None:
                got = prepend(self.W, word[0], self.bs(word[1:]))
                self._bs[word] = got
            return got

    def hom_space(self, M: GradedModule, N: GradedModule, degree: int = 0) -> list[GradedMap]:
        return _hom_space(M, N, degree)

    # -- references -----------------------------------------------------------------
    def extract(self, w: GroupElement) -> Reference:
        """B_w, built inside B_s (x) B_{sw} for s the first letter of the canonical word."""
        with self._lock:
            got = self._ref.get(w)
            if got is not None:
                return got
            W = self.W
            word = W.reduced_word(w)
            if not word:
                ref = Reference(w, (), self.bs(()), _cat=self)
                self._ref[w] = ref
                return ref
            s = word[0]
            x = W.lmul(s, w)
            tail = self.extract(x)
            M = prepend(W, s, tail.module)
            pieces, rest = self._split_predicted(s, x, M, exclude_top=True)
            rem = rest.module
            lw = len(word)
            if rem.lowest_degree() != -lw or rem.dims.get(-lw) != 1:
                raise VerificationFailure(
                    "top summand does not start in degree -l(w) with dimension 1",
                    {"w": W.word_label(w), "dims": rem.graded_dims()},
                )
            end = self.hom_space(rem, rem, 0)
            if len(end) != 1:
                raise VerificationFailure(
                    "top summand is decomposable", {"w": W.word_label(w), "end0": len(end)}
                )
            ref = Reference(w, word, rem, tail, rest, s, self)
            self._ref[w] = ref
            self._end_dims[w] = 1
            self._pairs[(s, x)] = PairDecomposition(
                s, x, [PieceRecord(z, j, "pairing-rank") for z, j, _ in pieces] + [PieceRecord(w, 0, "top")],
                self._prediction(s, x),
            )
            return ref

    def extract_Bw(self, w: GroupElement) -> SoergelSummand:
        """B_w as a summand of BS(canonical reduced word of w)."""
        return self.extract(w).embedding()

    def _prediction(self, s: int, x: GroupElement) -> dict[tuple[GroupElement, int], int]:
        H = self.H
        prod = H.std_mult(H.kl(self.W.gen(s)), H.kl(x))
        out = {}
        for z, p in H.expand_in_kl(prod).items():
            for j, c in p.items():
                out[(z, j)] = c
        return out

    def _split_predicted(self, s: int, x: GroupElement, M: GradedModule, exclude_top: bool):
        """Split the predicted summands off B_s (x) B_x; returns the pieces and the rest."""
        W = self.W
        sx = W.lmul(s, x)
        pred = self._prediction(s, x)
        cands = sorted(
            (key for key in pred if not (exclude_top and key[0] == sx and key[1] == 0)),
            key=lambda zj: (-W.length(zj[0]), W.reduced_word(zj[0]), zj[1]),
        )
        cur = GradedMap.identity(M)
        rest = Summand(M, cur, cur)
        pieces = []
        for z, j in cands:
            ref = self.extract(z)
            found = self._split_off(ref, j, rest)
            for piece in found:
                pieces.append((z, j, piece))
            if found:
                rest = self._complement(rest, [p for p in found])
        return pieces, rest

    def _pairing_scalar(self, ref: Reference, gf: GradedMap) -> Scalar:
        lo = -len(ref.word)
        return gf.block(lo).entry(0, 0)

    def _split_off(self, ref: Reference, j: int, rest: Summand) -> list[GradedMap]:
        """Idempotents of ``rest.module`` cutting out every copy of B_z(j) (as
        endomorphisms of rest.module)."""
        C = rest.module
        if C.is_zero():
            return []
        F = self.hom_space(ref.module, C, -j)
        if not F:
            return []
        G = self.hom_space(C, ref.module, j)
        if not G:
            return []
        P = FMat.from_rows([[self._pairing_scalar(ref, g @ f) for f in F] for g in G], C.d)
        cols = P.pivots()
        if not cols:
            return []
        rows = P.submatrix(None, cols).T().pivots()
        Q = P.submatrix(rows, cols).inverse().to_rows()
        out = []
        for i, c in enumerate(cols):
            g = linear_combination([G[r] for r in rows], Q[i])
            out.append(F[c] @ g)
        return out

    def _complement(self, rest: Summand, idems: list[GradedMap]) -> Summand:
        C = rest.module
        e = idems[0]
        for f in idems[1:]:
            e = e + f
        sub = image_of(GradedMap.identity(C) - e)
        return Summand(sub.module, rest.inclusion @ sub.inclusion, sub.projection @ rest.projection)

    # -- B_s (x) B_x for arbitrary pairs -------------------------------------------
    def pair_decomposition(self, s: int, x: GroupElement) -> PairDecomposition:
        with self._lock:
            got = self._pairs.get((s, x))
            if got is not None:
                return got
            W = self.W
            sx = W.lmul(s, x)
            canonical = W.length(sx) > W.length(x) and W.reduced_word(sx)[0] == s
            if canonical:
                self.extract(sx)
                return self._pairs[(s, x)]
            M = prepend(W, s, self.extract(x).module)
            pieces, rest = self._split_predicted(s, x, M, exclude_top=W.length(sx) > W.length(x))
            records = [PieceRecord(z, j, "pairing-rank") for z, j, _ in pieces]
            rem = rest.module
            if W.length(sx) > W.length(x):
                if self._isomorphic_to(rem, sx, 0):
                    records.append(PieceRecord(sx, 0, "invertible-hom"))
                    rem = None
            if rem is not None and not rem.is_zero():
                for piece in self.split_indecomposables(rem):
                    records.append(PieceRecord(piece.label, piece.shift, "generic-split"))
            out = PairDecomposition(s, x, records, self._prediction(s, x))
            self._pairs[(s, x)] = out
            return out

    def _isomorphic_to(self, M: GradedModule, z: GroupElement, shift: int) -> bool:
        """Whether M is isomorphic to B_z(shift): equal graded dimensions and an
        invertible degree-0 map B_z(shift) -> M."""
        ref = self.extract(z).module
        want = {k - shift: v for k, v in ref.dims.items()}
        if M.graded_dims() != want:
            return False
        maps = self.hom_space(ref, M, -shift)
        if not maps:
            return False
        rng = random.Random(self.seed)
        trials = list(maps) + [linear_combination(maps, [mpq(rng.randint(-9, 9)) for _ in maps]) for _ in range(3)]
        for f in trials:
            if all(f.block(k).rank() == n for k, n in ref.dims.items()):
                return True
        return False

    def decompose_word(self, word: Sequence[int]) -> dict[tuple[GroupElement, int], int]:
        """Multiset of (label, shift) of BS(word), via B_s (x) (BS(tail)) one letter at a time."""
        word = tuple(word)
        cur: dict[tuple[GroupElement, int], int] = {(self.W.identity, 0): 1}
        for s in reversed(word):
            nxt: dict[tuple[GroupElement, int], int] = {}
            for (x, k), m in cur.items():
                for rec in self.pair_decomposition(s, x).pieces:
                    key = (rec.label, rec.shift + k)
                    nxt[key] = nxt.get(key, 0) + m
            cur = nxt
        return cur

    def decomposition_report(self, word: Sequence[int]) -> DecompositionReport:
        W = self.W
        word = tuple(word)
        found = self.decompose_word(word)
        pred = self.H.predicted_multiplicities(word)
        pred_map = {(z, j): c for z, p in pred.items() for j, c in p.items()}
        match = found == pred_map

        def group(m):
            out: dict[str, dict[int, int]] = {}
            for (z, j), c in sorted(m.items(), key=lambda t: (W.length(t[0][0]), W.reduced_word(t[0][0]), t[0][1])):
                out.setdefault(W.word_label(z), {})[j] = c
            return out

        summands = []
        for (z, j), c in sorted(found.items(), key=lambda t: (W.length(t[0][0]), W.reduced_word(t[0][0]), t[0][1])):
            dims = {k - j: v for k, v in self.extract(z).module.dims.items()}
            for _ in range(c):
                summands.append({"label": W.word_label(z), "shift": j, "graded_dims": {str(k): v for k, v in dims.items()}})
        witness = {}
        if not match:
            witness = {"predicted": group(pred_map), "found": group(found)}
        return DecompositionReport(word, summands, group(pred_map), group(found), match, witness)

    # -- generic splitting ------------------------------------------------------
    def split_indecomposables(self, M: GradedModule, label: bool = True) -> list[SoergelSummand]:
        """Primitive orthogonal idempotents of End^0(M) summing to the identity,
        each image labelled as some B_z(k)."""
        idems = primitive_idempotents(M, self.hom_space(M, M, 0), random.Random(self.seed), self.retry_budget)
        out = []
        for e in idems:
            sub = image_of(e)
            piece = SoergelSummand(M, sub)
            if label:
                piece.label, piece.shift = self.identify(sub.module)
            out.append(piece)
        out.sort(key=lambda p: (self.W.length(p.label) if p.label is not None else -1,
                                self.W.reduced_word(p.label) if p.label is not None else (), p.shift))
        return out

    def identify(self, S: GradedModule) -> tuple[GroupElement, int]:
        """The (z, k) with S isomorphic to B_z(k): characters first, then an invertible map."""
        W = self.W
        lo, hi = S.lowest_degree(), S.highest_degree()
        if (lo + hi) % 2:
            raise VerificationFailure("summand with non-symmetric degree range", {"dims": S.graded_dims()})
        k = -(lo + hi) // 2
        length = (hi - lo) // 2
        for z in W.enumerate():
            if W.length(z) != length:
                continue
            if self.predicted_dims(z) != {d + k: v for d, v in S.dims.items()}:
                continue
            if self._isomorphic_to(S, z, k):
                return z, k
        raise VerificationFailure("summand matches no reference module", {"dims": S.graded_dims()})

    def predicted_dims(self, z: GroupElement) -> dict[int, int]:
        """Graded dimension of B_z from the Hecke algebra: sum_y h_{y,z}(v) v^{-l(y)}."""
        out: dict[int, int] = {}
        for y, h in self.H.kl(z).terms.items():
            ly = self.W.length(y)
            for e, c in h.items():
                out[e - ly] = out.get(e - ly, 0) + c
        return {k: v for k, v in sorted(out.items()) if v}


# -- idempotent refinement ------------------------------------------------------------


def _flatten_all(maps: Sequence[GradedMap]) -> FMat:
    return FMat.hstack([f.flatten() for f in maps], None, maps[0].src.d)


def trace_form_rank(alg: Sequence[GradedMap]) -> int:
    """Rank of (a, b) -> tr(ab): the dimension of the algebra modulo its radical."""
    n = len(alg)
    gram = [[(alg[i] @ alg[j]).trace() for j in range(n)] for i in range(n)]
    return FMat.from_rows(gram, alg[0].src.d).rank() if n else 0


def corner_algebra(f: GradedMap, basis: Sequence[GradedMap]) -> list[GradedMap]:
    return independent_subset([f @ a @ f for a in basis])


def _sym(x: Scalar, d: int):
    if isinstance(x, QuadraticElement):
        return sympy.Rational(int(x.a.numerator), int(x.a.denominator)) + sympy.Rational(
            int(x.b.numerator), int(x.b.denominator)
        ) * sympy.sqrt(d)
    x = mpq(x)
    return sympy.Rational(int(x.numerator), int(x.denominator))


def _from_sym(c, d: int) -> Scalar:
    c = sympy.expand(c)
    if d == 1:
        r = sympy.Rational(c)
        return mpq(int(r.p), int(r.q))
    b = sympy.Rational(c.coeff(sympy.sqrt(d)))
    a = sympy.Rational(sympy.expand(c - b * sympy.sqrt(d)))
    return QuadraticElement.make(mpq(int(a.p), int(a.q)), mpq(int(b.p), int(b.q)), d)


def minimal_polynomial(a: GradedMap, unit: GradedMap) -> list[Scalar]:
    """Monic coefficients (constant term first) of the minimal polynomial of a in the
    algebra with identity ``unit``."""
    powers = [unit]
    while True:
        nxt = powers[-1] @ a
        powers.append(nxt)
        mat = _flatten_all(powers)
        null = mat.nullspace()
        if null.cols:
            col = [null.entry(i, 0) for i in range(null.rows)]
            lead = col[-1]
            return [c / lead for c in col]


def _poly_eval(coeffs: Sequence[Scalar], a: GradedMap, unit: GradedMap) -> GradedMap:
    out = GradedMap.zero(unit.src, unit.dst, 0)
    for c in reversed(coeffs):
        out = out @ a
        if c:
            out = out + unit.scale(c)
    return out


def _split_by_polynomial(a: GradedMap, unit: GradedMap, d: int) -> tuple[GradedMap, GradedMap] | None:
    """Two nonzero orthogonal idempotents summing to ``unit`` from a coprime
    factorization of the minimal polynomial of a, or None if it is primary."""
    mu = minimal_polynomial(a, unit)
    x = sympy.Symbol("x")
    expr = sum(_sym(c, d) * x**i for i, c in enumerate(mu))
    kw = {"extension": sympy.sqrt(d)} if d != 1 else {}
    _, factors = sympy.factor_list(expr, x, **kw)
    if len(factors) < 2:
        return None
    p, e = factors[0]
    pe = sympy.Poly(p**e, x, **kw)
    q = sympy.Poly(sympy.quo(sympy.Poly(expr, x, **kw), pe), x, **kw)
    u, v, g = sympy.gcdex(q, pe)
    # u q + v pe = g, g a nonzero constant
    uq = sympy.Poly(sympy.expand((u * q).as_expr() / g.as_expr()), x, **kw)
    coeffs = [_from_sym(c, d) for c in reversed(uq.all_coeffs())]
    e1 = _poly_eval(coeffs, a, unit)
    e2 = unit - e1
    if e1.is_zero() or e2.is_zero():
        return None
    return e1, e2


def primitive_idempotents(
    M: GradedModule, basis: Sequence[GradedMap], rng: random.Random, budget: int = 60
) -> list[GradedMap]:
    """Refine the identity of M into primitive orthogonal idempotents of the algebra
    spanned by ``basis`` (which must contain the identity)."""
    d = M.d
    pending = [GradedMap.identity(M)]
    done: list[GradedMap] = []
    while pending:
        f = pending.pop()
        alg = corner_algebra(f, basis)
        if trace_form_rank(alg) <= 1:
            done.append(f)
            continue
        split = None
        for attempt in range(budget):
            a = _pick_element(M, f, alg, rng, attempt)
            split = _split_by_polynomial(a, f, d)
            if split is not None:
                break
        if split is None:
            raise SplittingError("no splitting idempotent found; the field may be too small")
        pending.extend(split)
    return done


def _pick_element(M: GradedModule, f: GradedMap, alg: Sequence[GradedMap], rng: random.Random, attempt: int) -> GradedMap:
    """A random element of the corner algebra; every other attempt it is steered to
    act as a rank-one idempotent on the lowest degree of the image of f."""
    rand = linear_combination(alg, [mpq(rng.randint(-5, 5)) for _ in alg])
    if attempt % 2 == 0:
        return rand
    lows = [k for k in M.dims if f.block(k).rank()]
    if not lows:
        return rand
    lo = min(lows)
    img = f.block(lo)
    piv = img.pivots()
    basis_lo = img.submatrix(None, piv)  # columns span the lowest piece of the image
    m = len(piv)
    rows = basis_lo.T().pivots()
    coords = basis_lo.submatrix(rows, None).inverse()

    def restrict(a: GradedMap) -> FMat:
        return coords @ (a.block(lo) @ basis_lo).submatrix(rows, None)

    target = [[ONE_Q if (i == 0 and j == 0) else ZERO_Q for j in range(m)] for i in range(m)]
    A = FMat.hstack([restrict(a).flatten_column() for a in alg], m * m, M.d)
    b = FMat.from_rows(target, M.d).flatten_column()
    aug = FMat.hstack([A, b], m * m, M.d)
    if aug.rank() != A.rank():
        return rand
    # particular solution from the pivot columns
    piv_a = A.pivots()
    sub = A.submatrix(None, piv_a)
    rws = sub.T().pivots()
    sol = sub.submatrix(rws, None).inverse() @ b.submatrix(rws, None)
    elem = linear_combination([alg[p] for p in piv_a], [sol.entry(i, 0) for i in range(len(piv_a))])
    # perturb inside the kernel of the restriction to avoid accidental coincidences
    ker = A.nullspace()
    if ker.cols:
        coeffs = [mpq(0)] * len(alg)
        for c in range(ker.cols):
            r = rng.randint(-3, 3)
            for i in range(len(alg)):
                coeffs[i] += r * ker.entry(i, c)
        elem = elem + linear_combination(alg, coeffs)
    return elem
