"""Hecke algebra of a Coxeter system over Z[v, v^-1].

Conventions: ``H_w H_s = H_ws`` if ``ws > w`` and ``H_ws + (v^-1 - v) H_w``
otherwise; the Kazhdan-Lusztig element ``kl(w)`` is bar invariant and lies in
``H_w + sum_y v Z[v] H_y``.

>>> from soergelkit.coxeter import build_system, preset
>>> H = HeckeAlgebra(build_system(preset("A1")))
>>> s = H.W.gen(0)
>>> H.kl(s).coefficient(s), H.kl(s).coefficient(H.W.identity)
(LaurentPoly({0: 1}), LaurentPoly({1: 1}))
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import sparse

from .coxeter import CoxeterSystem, GroupElement, Word


class LaurentPoly:
    """Sparse Laurent polynomial in v with integer coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Mapping[int, int] | None = None) -> None:
        self.c: dict[int, int] = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def const(cls, a: int) -> LaurentPoly:
        return cls({0: a})

    @classmethod
    def monomial(cls, e: int, a: int = 1) -> LaurentPoly:
        return cls({e: a})

    def __bool__(self) -> bool:
        return bool(self.c)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.c == other.c

    def __hash__(self) -> int:
        return hash(frozenset(self.c.items()))

    def __add__(self, other: LaurentPoly | int) -> LaurentPoly:
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other: LaurentPoly | int) -> LaurentPoly:
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        return self + (-other)

    def __rsub__(self, other: int) -> LaurentPoly:
        return LaurentPoly.const(other) - self

    def __mul__(self, other: LaurentPoly | int) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly({k: v * other for k, v in self.c.items()})
        out: dict[int, int] = {}
        for a, x in self.c.items():
            for b, y in other.c.items():
                out[a + b] = out.get(a + b, 0) + x * y
        return LaurentPoly(out)

    __rmul__ = __mul__

    def bar(self) -> LaurentPoly:
        return LaurentPoly({-k: v for k, v in self.c.items()})

    def shift(self, e: int) -> LaurentPoly:
        return LaurentPoly({k + e: v for k, v in self.c.items()})

    def coeff(self, e: int) -> int:
        return self.c.get(e, 0)

    def degrees(self) -> list[int]:
        return sorted(self.c)

    def min_degree(self) -> int | None:
        return min(self.c) if self.c else None

    def max_degree(self) -> int | None:
        return max(self.c) if self.c else None

    def at_one(self) -> int:
        return sum(self.c.values())

    def is_nonnegative(self) -> bool:
        return all(v > 0 for v in self.c.values())

    def items(self) -> list[tuple[int, int]]:
        return sorted(self.c.items())

    def to_sparse(self) -> str:
        """``exp:coef`` pairs separated by commas; ``0`` for the zero polynomial."""
        if not self.c:
            return "0"
        return ",".join(f"{k}:{v}" for k, v in self.items())

    def __repr__(self) -> str:
        return f"LaurentPoly({dict(self.items())})"

    def __str__(self) -> str:
        if not self.c:
            return "0"
        parts = []
        for k, v in sorted(self.c.items(), reverse=True):
            mono = "" if k == 0 else ("v" if k == 1 else f"v^{k}")
            coef = str(v) if (abs(v) != 1 or not mono) else ("-" if v < 0 else "")
            parts.append(coef + mono)
        return " + ".join(parts).replace("+ -", "- ")


ZERO = LaurentPoly()
ONE = LaurentPoly.const(1)
V = LaurentPoly.monomial(1)
VINV = LaurentPoly.monomial(-1)
QUAD = VINV - V  # v^-1 - v


def quantum_integer(m: int) -> LaurentPoly:
    """[m] = v^(-m+1) + v^(-m+3) + ... + v^(m-1)."""
    return LaurentPoly({e: 1 for e in range(-m + 1, m, 2)})


class HeckeElement:
    """Finite combination of standard basis elements H_w."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[GroupElement, LaurentPoly] | None = None) -> None:
        self.terms: dict[GroupElement, LaurentPoly] = {w: p for w, p in (terms or {}).items() if p}

    def coefficient(self, w: GroupElement) -> LaurentPoly:
        return self.terms.get(w, ZERO)

    def support(self) -> list[GroupElement]:
        return list(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeElement):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other: HeckeElement) -> HeckeElement:
        out = dict(self.terms)
        for w, p in other.terms.items():
            q = out.get(w)
            out[w] = p if q is None else q + p
        return HeckeElement(out)

    def __sub__(self, other: HeckeElement) -> HeckeElement:
        return self + other.scale(LaurentPoly.const(-1))

    def scale(self, p: LaurentPoly | int) -> HeckeElement:
        if isinstance(p, int):
            p = LaurentPoly.const(p)
        return HeckeElement({w: q * p for w, q in self.terms.items()})

    def __repr__(self) -> str:
        return f"HeckeElement({len(self.terms)} terms)"


def _accumulate(out: dict, w: GroupElement, p: LaurentPoly) -> None:
    q = out.get(w)
    out[w] = p if q is None else q + p


@dataclass
class UnimodalityReport:
    passed: bool
    decompositions: dict[str, dict[int, int]] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)


def decompose_quantum(p: LaurentPoly) -> dict[int, int] | None:
    """Greedy expansion of p in quantum integers; None if some multiplicity is negative
    or p is not such a combination."""
    rest = dict(p.c)
    out: dict[int, int] = {}
    while rest:
        top = max(rest)
        c = rest[top]
        if top < 0 or c < 0:
            return None
        m = top + 1
        out[m] = out.get(m, 0) + c
        for e in range(-m + 1, m, 2):
            v = rest.get(e, 0) - c
            if v:
                rest[e] = v
            else:
                rest.pop(e, None)
    return out


class HeckeAlgebra:
    """Standard-basis arithmetic, bar involution and Kazhdan-Lusztig data.

    KL elements are memoized; fills are idempotent and guarded by a lock so the
    cache can be shared between threads.
    """

    def __init__(self, W: CoxeterSystem) -> None:
        self.W = W
        self._lock = threading.Lock()
        self._kl: dict[GroupElement, HeckeElement] = {W.identity: self.basis(W.identity)}
        self._bar_std: dict[GroupElement, HeckeElement] = {W.identity: self.basis(W.identity)}

    # -- standard basis ----------------------------------------------------
    def basis(self, w: GroupElement) -> HeckeElement:
        return HeckeElement({w: ONE})

    def element(self, terms: Mapping[GroupElement, LaurentPoly]) -> HeckeElement:
        return HeckeElement(terms)

    def times_generator(self, a: HeckeElement, s: int) -> HeckeElement:
        """a * H_s."""
        W = self.W
        out: dict[GroupElement, LaurentPoly] = {}
        for w, p in a.terms.items():
            ws = W.rmul(w, s)
            _accumulate(out, ws, p)
            if W.length(ws) < W.length(w):
                _accumulate(out, w, p * QUAD)
        return HeckeElement(out)

    def generator_times(self, s: int, a: HeckeElement) -> HeckeElement:
        """H_s * a."""
        W = self.W
        out: dict[GroupElement, LaurentPoly] = {}
        for w, p in a.terms.items():
            sw = W.lmul(s, w)
            _accumulate(out, sw, p)
            if W.length(sw) < W.length(w):
                _accumulate(out, w, p * QUAD)
        return HeckeElement(out)

    def times_standard(self, a: HeckeElement, y: GroupElement) -> HeckeElement:
        for s in self.W.reduced_word(y):
            a = self.times_generator(a, s)
        return a

    def std_mult(self, a: HeckeElement, b: HeckeElement) -> HeckeElement:
        out: dict[GroupElement, LaurentPoly] = {}
        for y, q in b.terms.items():
            for w, p in self.times_standard(a, y).terms.items():
                _accumulate(out, w, p * q)
        return HeckeElement(out)

    def from_word(self, word: Sequence[int]) -> HeckeElement:
        """H_{s1} H_{s2} ... H_{sk}."""
        a = self.basis(self.W.identity)
        for s in word:
            a = self.times_generator(a, s)
        return a

    # -- bar involution --------------------------------------------------------
    def _bar_standard(self, w: GroupElement) -> HeckeElement:
        got = self._bar_std.get(w)
        if got is not None:
            return got
        word = self.W.reduced_word(w)
        s = word[-1]
        prev = self._bar_standard(self.W.rmul(w, s))
        # bar(H_s) = H_s + (v - v^-1)
        res = self.times_generator(prev, s) + prev.scale(V - VINV)
        with self._lock:
            return self._bar_std.setdefault(w, res)

    def bar(self, a: HeckeElement) -> HeckeElement:
        out: dict[GroupElement, LaurentPoly] = {}
        for w, p in a.terms.items():
            pb = p.bar()
            for y, q in self._bar_standard(w).terms.items():
                _accumulate(out, y, q * pb)
        return HeckeElement(out)

    # -- Kazhdan-Lusztig basis ----------------------------------------------
    def _sorted_by_length(self, elems: Iterable[GroupElement], reverse: bool = False) -> list[GroupElement]:
        W = self.W
        return sorted(elems, key=lambda w: (W.length(w), W.reduced_word(w)), reverse=reverse)

    def kl(self, w: GroupElement) -> HeckeElement:
        """The Kazhdan-Lusztig basis element of w."""
        got = self._kl.get(w)
        if got is not None:
            return got
        W = self.W
        s = W.reduced_word(w)[-1]
        y = W.rmul(w, s)
        cur = self.kl(y)
        # kl(y) (H_s + v)
        prod = self.times_generator(cur, s) + cur.scale(V)
        terms = dict(prod.terms)
        lw = W.length(w)
        for z in self._sorted_by_length([z for z in terms if z != w], reverse=True):
            p = terms.get(z)
            if not p:
                continue
            c = p.coeff(0)
            if c:
                if W.length(z) >= lw:
                    raise ArithmeticError("KL correction above the top element")
                for u, q in self.kl(z).terms.items():
                    _accumulate(terms, u, q * (-c))
        res = HeckeElement(terms)
        with self._lock:
            return self._kl.setdefault(w, res)

    def kl_basis_element(self, w: GroupElement) -> HeckeElement:
        return self.kl(w)

    def kl_poly(self, y: GroupElement, w: GroupElement) -> LaurentPoly:
        """h_{y,w}: the coefficient of H_y in kl(w)."""
        return self.kl(w).coefficient(y)

    def expand_in_kl(self, a: HeckeElement) -> dict[GroupElement, LaurentPoly]:
        """Coordinates of a in the KL basis, by triangular back-substitution."""
        W = self.W
        terms = dict(a.terms)
        out: dict[GroupElement, LaurentPoly] = {}
        while terms:
            top = max(terms, key=lambda w: (W.length(w), W.reduced_word(w)))
            p = terms[top]
            out[top] = p
            for u, q in self.kl(top).terms.items():
                r = terms.get(u, ZERO) - q * p
                if r:
                    terms[u] = r
                else:
                    terms.pop(u, None)
        return out

    def mu(self, x: GroupElement, y: GroupElement) -> dict[GroupElement, LaurentPoly]:
        """Structure constants: kl(x) kl(y) = sum_z mu^z kl(z)."""
        return self.expand_in_kl(self.std_mult(self.kl(x), self.kl(y)))

    def mu_row(self, x: GroupElement, ys: Iterable[GroupElement]) -> dict[GroupElement, dict[GroupElement, LaurentPoly]]:
        """mu(x, y) for many y, sharing the products kl(x) H_u along a spanning tree."""
        W = self.W
        ys = list(ys)
        need: set[GroupElement] = set()
        for y in ys:
            need.update(self.kl(y).terms)
        base = self.kl(x)
        right: dict[GroupElement, HeckeElement] = {W.identity: base}
        for u in self._sorted_by_length(need):
            if u in right:
                continue
            word = W.reduced_word(u)
            prefix = W.identity
            for k, s in enumerate(word):
                nxt = W.rmul(prefix, s)
                if nxt not in right:
                    right[nxt] = self.times_generator(right[prefix], s)
                prefix = nxt
        out = {}
        for y in ys:
            acc: dict[GroupElement, LaurentPoly] = {}
            for u, q in self.kl(y).terms.items():
                for w, p in right[u].terms.items():
                    _accumulate(acc, w, p * q)
            out[y] = self.expand_in_kl(HeckeElement(acc))
        return out

    def inverse_kl(self, w: GroupElement) -> dict[GroupElement, LaurentPoly]:
        """g_{y,w} with H_w = sum_y g_{y,w} kl(y)."""
        return self.expand_in_kl(self.basis(w))

    # -- pairing, characters ---------------------------------------------------
    @staticmethod
    def pairing(a: HeckeElement, b: HeckeElement) -> LaurentPoly:
        """Bilinear form with (H_x, H_y) = delta_xy."""
        out = ZERO
        for w, p in a.terms.items():
            q = b.terms.get(w)
            if q:
                out = out + p * q
        return out

    def hom_formula(self, x: GroupElement, y: GroupElement) -> LaurentPoly:
        """(bar(kl(x)), kl(y)): predicted graded dimension of Hom(B_x, B_y)."""
        return self.pairing(self.bar(self.kl(x)), self.kl(y))

    def bs_character(self, word: Sequence[int]) -> HeckeElement:
        W = self.W
        out = self.basis(W.identity)
        for s in word:
            out = self.times_generator(out, s) + out.scale(V)
        return out

    def predicted_multiplicities(self, word: Sequence[int]) -> dict[GroupElement, LaurentPoly]:
        return self.expand_in_kl(self.bs_character(word))

    # -- checks ------------------------------------------------------------------
    def unimodality_check(self, x: GroupElement, y: GroupElement) -> UnimodalityReport:
        return self.unimodality_of(self.mu(x, y), x, y)

    def unimodality_of(self, mus: Mapping[GroupElement, LaurentPoly], x=None, y=None) -> UnimodalityReport:
        W = self.W
        rep = UnimodalityReport(True)
        for z, p in mus.items():
            dec = decompose_quantum(p)
            label = W.word_label(z)
            if dec is None:
                rep.passed = False
                rep.failures.append(
                    {
                        "x": W.word_label(x) if x is not None else None,
                        "y": W.word_label(y) if y is not None else None,
                        "z": label,
                        "mu": p.to_sparse(),
                    }
                )
            else:
                rep.decompositions[label] = dec
        return rep

    def ideal_below(self, w: GroupElement) -> list[GroupElement]:
        return self._sorted_by_length(self.kl(w).terms)

    # -- structure constants in bulk ----------------------------------------------
    def structure_constants(
        self, xs: Iterable[GroupElement] | None = None, ys: Iterable[GroupElement] | None = None
    ) -> Iterator[MuBlock]:
        """Yield, for each x, every mu(x, y) at once as an integer array.

        Right multiplication by kl(s) is sparse in the KL basis (the W-graph):
        ``kl(z) kl(s)`` is ``(v + v^-1) kl(z)`` when ``zs < z`` and otherwise
        ``kl(zs) + sum mu(u, z) kl(u)`` over ``u < z`` with ``us < u``, where
        ``mu(u, z)`` is the coefficient of ``v`` in ``h_{u,z}``.  Walking each
        ``y`` up from a shorter ``y' = ys`` turns the whole table into sparse
        integer matrix products.  Both element lists default to the whole group,
        which must then be finite.
        """
        W = self.W
        if (xs is None or ys is None) and not W.is_finite():
            raise ValueError("an infinite group needs explicit element lists")
        xs = W.enumerate() if xs is None else list(xs)
        ys = W.enumerate() if ys is None else list(ys)
        yield from _WGraphProducts(self, xs, ys).blocks()


_LIMIT = 2**50
_CHUNK_BYTES = 64 * 2**20


@dataclass
class MuBlock:
    """mu(x, y)^z for fixed x as ``coeffs[y, z, e]``, the coefficient of ``v^(e - offset)``."""

    x: GroupElement
    ys: list[GroupElement]
    zs: list[GroupElement]
    coeffs: np.ndarray
    offset: int

    def poly(self, yi: int, zi: int) -> LaurentPoly:
        row = self.coeffs[yi, zi]
        return LaurentPoly({int(e) - self.offset: int(row[e]) for e in np.nonzero(row)[0]})

    def row(self, yi: int) -> dict[GroupElement, LaurentPoly]:
        return {self.zs[zi]: self.poly(yi, zi) for zi in np.nonzero(self.coeffs[yi].any(axis=1))[0]}

    def _support(self) -> np.ndarray:
        got = self.__dict__.get("_nz")
        if got is None:
            got = self.__dict__["_nz"] = np.argwhere(self.coeffs.any(axis=2))
        return got

    def _pairs(self, mask: np.ndarray) -> list[tuple[int, int]]:
        return [tuple(map(int, t)) for t in self._support()[mask]]

    def nonzero(self) -> list[tuple[int, int]]:
        return self._pairs(np.ones(len(self._support()), dtype=bool))

    def negative(self) -> list[tuple[int, int]]:
        nz = self._support()
        return self._pairs((self.coeffs[nz[:, 0], nz[:, 1]] < 0).any(axis=1))

    def not_unimodal(self) -> list[tuple[int, int]]:
        """(y, z) whose polynomial is not a nonnegative sum of quantum integers: the
        coefficients must be symmetric and weakly decrease in steps of two away from 0."""
        nz = self._support()
        c = self.coeffs[nz[:, 0], nz[:, 1]]
        bad = np.any(c != c[:, ::-1], axis=1)
        tail = np.concatenate([c[:, self.offset :], np.zeros((len(c), 2), dtype=c.dtype)], axis=1)
        bad |= np.any(tail[:, :-2] < tail[:, 2:], axis=1)
        return self._pairs(bad)


class _WGraphProducts:
    def __init__(self, H: HeckeAlgebra, xs: list[GroupElement], ys: list[GroupElement]) -> None:
        W = H.W
        self.H, self.xs, self.ys = H, xs, ys
        lx = max((W.length(x) for x in xs), default=0)
        ly = max((W.length(y) for y in ys), default=0)
        self.top = lx + ly
        self.U = U = W.enumerate(self.top)
        self.index = index = {w: i for i, w in enumerate(U)}
        self.ball = W.enumerate(ly)  # every y is reached through shorter elements
        n = len(U)
        # right multiplication by kl(s), as (v^-1, v^0, v^1) parts acting on row vectors
        self.mult = []
        for s in range(W.rank):
            parts = [([], [], []) for _ in range(3)]

            def put(k: int, i: int, j: int, c: int) -> None:
                parts[k][0].append(i)
                parts[k][1].append(j)
                parts[k][2].append(c)

            for i, z in enumerate(U):
                if W.length(z) >= self.top:
                    continue
                zs = W.rmul(z, s)
                if W.length(zs) < W.length(z):
                    put(0, i, i, 1)
                    put(2, i, i, 1)
                    continue
                put(1, i, index[zs], 1)
                for u, c in self._edges(z, s):
                    put(1, i, index[u], c)
            # stored transposed: column vectors indexed by z are multiplied from the left
            self.mult.append([sparse.csr_matrix((d, (c, r)), shape=(n, n), dtype=np.int64) for r, c, d in parts])
        self.growth = max((int(np.abs(m).sum(axis=1).max()) for ms in self.mult for m in ms), default=0)

    def _edges(self, z: GroupElement, s: int) -> list[tuple[GroupElement, int]]:
        W = self.H.W
        out = []
        for u, h in self.H.kl(z).terms.items():
            c = h.coeff(1)
            if c and u != z and W.length(W.rmul(u, s)) < W.length(u):
                out.append((u, c))
        return out

    def blocks(self) -> Iterator[MuBlock]:
        W = self.H.W
        ly = max((W.length(y) for y in self.ys), default=0)
        width = 2 * ly + 1
        n = len(self.U)
        pos = {y: i for i, y in enumerate(self.ball)}
        steps = []
        for y in self.ball[1:]:
            s = W.reduced_word(y)[-1]
            prev = W.rmul(y, s)
            corr = [(pos[u], c) for u, c in self._edges(prev, s)]
            steps.append((pos[y], pos[prev], s, corr))
        chunk = max(1, _CHUNK_BYTES // (len(self.ball) * width * n * 8))
        want = [pos[y] for y in self.ys]
        for start in range(0, len(self.xs), chunk):
            xs = self.xs[start : start + chunk]
            m = len(xs)
            # vec[y, z, x, e]: coefficient of kl(z) in kl(x) kl(y) at v^(e - ly)
            vec = np.zeros((len(self.ball), n, m, width), dtype=np.int64)
            for k, x in enumerate(xs):
                vec[0, self.index[x], k, ly] = 1
            for yi, pi, s, corr in steps:
                # entries stay below _LIMIT, so one step cannot leave int64
                if (self.growth + sum(abs(c) for _, c in corr)) * _LIMIT >= 2**62:
                    raise OverflowError("structure constants too large for exact int64 arithmetic")
                src = vec[pi].reshape(n, m * width)
                lo, mid, hi = (part @ src for part in self.mult[s])
                out = mid.reshape(n, m, width)
                out[:, :, :-1] += lo.reshape(n, m, width)[:, :, 1:]
                out[:, :, 1:] += hi.reshape(n, m, width)[:, :, :-1]
                for ui, c in corr:
                    out -= c * vec[ui]
                if out.max(initial=0) >= _LIMIT or -out.min(initial=0) >= _LIMIT:
                    raise OverflowError("structure constants too large for exact int64 arithmetic")
                vec[yi] = out
            for k, x in enumerate(xs):
                yield MuBlock(x, self.ys, self.U, np.ascontiguousarray(vec[want, :, k, :]), ly)


def word_of(W: CoxeterSystem, w: GroupElement) -> Word:
    return W.reduced_word(w)
