"""Coxeter systems realized exactly on a vector space V.

Each generator s acts by ``v -> v - <alpha_s, v> alpha_s^vee``; group
elements are stored as their matrices and compared as such.  Descents are
read off the positivity form rho: ``s`` is a left descent of ``w`` exactly
when ``<w(rho), alpha_s^vee> < 0``.

Words are tuples of 0-based generator indices.

>>> W = build_system(preset("A2"))
>>> w = W.from_word((0, 1, 0))
>>> W.length(w), W.reduced_word(w), W.from_word((1, 0, 1)) == w
(3, (0, 1, 0), True)
>>> len(W.enumerate())
6
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import linalg
from .field import QuadraticField, Scalar, sign, unify_fields

INF = math.inf

Word = tuple[int, ...]


class CoxeterError(ValueError):
    """Invalid Coxeter data or a realization that fails a defining check."""


class UnsupportedFieldError(CoxeterError):
    pass


@dataclass(frozen=True)
class CoxeterMatrix:
    entries: tuple[tuple[float, ...], ...]
    name: str = ""

    def __post_init__(self) -> None:
        m = self.entries
        r = len(m)
        if r == 0:
            raise CoxeterError("rank must be positive")
        for i in range(r):
            if len(m[i]) != r:
                raise CoxeterError("Coxeter matrix must be square")
            if m[i][i] != 1:
                raise CoxeterError(f"m[{i}][{i}] = {m[i][i]}, must be 1")
            for j in range(r):
                x = m[i][j]
                if x != m[j][i]:
                    raise CoxeterError(f"m[{i}][{j}] != m[{j}][{i}]")
                if i != j and not (x == INF or (float(x).is_integer() and x >= 2)):
                    raise CoxeterError(f"m[{i}][{j}] = {x}, must be an integer >= 2 or inf")

    @property
    def rank(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> float:
        return self.entries[ij[0]][ij[1]]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], name: str = "") -> CoxeterMatrix:
        def conv(x):
            if isinstance(x, str) and x.strip().lower() in {"inf", "infinity", "oo"}:
                return INF
            if isinstance(x, float) and x != INF and not x.is_integer():
                raise CoxeterError(f"non-integer entry {x}")
            return INF if x == INF else int(x)

        try:
            return cls(tuple(tuple(conv(x) for x in row) for row in rows), name)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, CoxeterError):
                raise
            raise CoxeterError(str(exc)) from exc


def _linear(n: int, labels: dict[tuple[int, int], float]) -> CoxeterMatrix:
    rows = [[1 if i == j else 2 for j in range(n)] for i in range(n)]
    for (i, j), m in labels.items():
        rows[i][j] = rows[j][i] = m
    return CoxeterMatrix(tuple(tuple(r) for r in rows))


def preset(name: str) -> CoxeterMatrix:
    """Named Coxeter matrices: An, Bn, Dn, H3, H4, G2, F4, I2(m), Atilde1, Atilde2."""
    key = name.strip()
    mm = re.fullmatch(r"I2\(?(\d+|inf)\)?", key, re.IGNORECASE)
    if mm:
        m = INF if mm.group(1).lower() == "inf" else int(mm.group(1))
        if m != INF and m < 2:
            raise CoxeterError("I2(m) needs m >= 2")
        return CoxeterMatrix(((1, m), (m, 1)), f"I2({mm.group(1)})")
    if key.lower() in {"atilde1", "a~1", "affine_a1"}:
        return CoxeterMatrix(((1, INF), (INF, 1)), "Atilde1")
    if key.lower() in {"atilde2", "a~2", "affine_a2"}:
        return CoxeterMatrix(((1, 3, 3), (3, 1, 3), (3, 3, 1)), "Atilde2")
    mm = re.fullmatch(r"([ABDHFG])(\d+)", key.upper())
    if not mm:
        raise CoxeterError(f"unknown preset {name!r}")
    kind, n = mm.group(1), int(mm.group(2))
    chain = {(i, i + 1): 3 for i in range(n - 1)}
    if kind == "A" and n >= 1:
        out = _linear(n, chain)
    elif kind == "B" and n >= 2:
        chain[(n - 2, n - 1)] = 4
        out = _linear(n, chain)
    elif kind == "D" and n >= 4:
        chain = {(i, i + 1): 3 for i in range(n - 2)}
        chain[(n - 3, n - 1)] = 3
        out = _linear(n, chain)
    elif kind == "H" and n in (3, 4):
        chain[(0, 1)] = 5
        out = _linear(n, chain)
    elif kind == "F" and n == 4:
        chain[(1, 2)] = 4
        out = _linear(4, chain)
    elif kind == "G" and n == 2:
        out = _linear(2, {(0, 1): 6})
    else:
        raise CoxeterError(f"unknown preset {name!r}")
    return CoxeterMatrix(out.entries, key.upper())


def geometric_pairing(m: float) -> Scalar:
    """-2 cos(pi/m) for the supported orders, exactly."""
    if m == 2:
        return mpq(0)
    if m == 3:
        return mpq(-1)
    if m == 4:
        return QuadraticField(2)(0, -1)
    if m == 5:
        return QuadraticField(5)(mpq(-1, 2), mpq(-1, 2))
    if m == 6:
        return QuadraticField(3)(0, -1)
    if m == INF:
        return mpq(-2)
    raise UnsupportedFieldError(
        f"m = {m}: -2cos(pi/m) is not in a supported field; give an explicit realization"
    )


def _field_of(x: Scalar) -> QuadraticField:
    d = getattr(x, "d", 1)
    return QuadraticField(d)


class GroupElement:
    """A group element, identified by its matrix on V."""

    __slots__ = ("matrix", "_hash")

    def __init__(self, matrix: tuple[tuple[Scalar, ...], ...]) -> None:
        self.matrix = matrix
        self._hash = hash(matrix)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self._hash == other._hash and self.matrix == other.matrix

    def __repr__(self) -> str:
        return f"GroupElement({[[str(x) for x in r] for r in self.matrix]})"


@dataclass
class Realization:
    field: QuadraticField
    dim: int
    coroots: list[list[Scalar]]  # alpha_s^vee, vectors in V
    roots: list[list[Scalar]]  # alpha_s, linear forms on V
    rho: list[Scalar]  # linear form on V
    mode: str = "geometric"

    def pairing(self, form: Sequence[Scalar], vec: Sequence[Scalar]) -> Scalar:
        s: Scalar = mpq(0)
        for a, b in zip(form, vec):
            if a and b:
                s = s + a * b
        return s


class ElementCapExceeded(RuntimeError):
    pass


class NonTerminationError(RuntimeError):
    """Stripping descents did not reach the identity: rho-positivity is violated."""


class CoxeterSystem:
    def __init__(self, matrix: CoxeterMatrix, realization: Realization, element_cap: int = 200_000) -> None:
        self.matrix = matrix
        self.realization = realization
        self.field = realization.field
        self.rank = matrix.rank
        self.element_cap = element_cap
        n = realization.dim
        self._gens: list[GroupElement] = []
        for s in range(self.rank):
            cv, rt = realization.coroots[s], realization.roots[s]
            rows = tuple(
                tuple((mpq(1) if i == j else mpq(0)) - cv[i] * rt[j] for j in range(n))
                for i in range(n)
            )
            self._gens.append(GroupElement(rows))
        self.identity = GroupElement(tuple(tuple(r) for r in linalg.identity(n)))
        self._lock = threading.Lock()
        self._rho_image: dict[GroupElement, list[Scalar]] = {self.identity: list(realization.rho)}
        self._reduced: dict[GroupElement, Word] = {self.identity: ()}
        self._enumerated: dict[float, list[GroupElement]] = {}
        self._finite: bool | None = None
        self._rmul_cache: dict[tuple[GroupElement, int], GroupElement] = {}
        self._lmul_cache: dict[tuple[int, GroupElement], GroupElement] = {}

    # -- arithmetic -------------------------------------------------------
    @property
    def generators(self) -> list[GroupElement]:
        return list(self._gens)

    def gen(self, s: int) -> GroupElement:
        return self._gens[s]

    def mul(self, x: GroupElement, y: GroupElement) -> GroupElement:
        a, b = x.matrix, y.matrix
        n = len(a)
        return GroupElement(
            tuple(
                tuple(_dot(a[i], [b[k][j] for k in range(n)]) for j in range(n))
                for i in range(n)
            )
        )

    def from_word(self, word: Iterable[int]) -> GroupElement:
        w = self.identity
        for s in word:
            w = self.mul(w, self._gens[s])
        return w

    def inverse(self, w: GroupElement) -> GroupElement:
        return self.from_word(reversed(self.reduced_word(w)))

    def lmul(self, s: int, w: GroupElement) -> GroupElement:
        key = (s, w)
        got = self._lmul_cache.get(key)
        if got is None:
            got = self._lmul_cache[key] = self.mul(self._gens[s], w)
        return got

    def rmul(self, w: GroupElement, s: int) -> GroupElement:
        key = (w, s)
        got = self._rmul_cache.get(key)
        if got is None:
            got = self._rmul_cache[key] = self.mul(w, self._gens[s])
        return got

    # -- descents and lengths ---------------------------------------------
    def rho_image(self, w: GroupElement) -> list[Scalar]:
        """w(rho) = rho o w^{-1}, as a linear form on V."""
        img = self._rho_image.get(w)
        if img is None:
            inv = linalg.inverse([list(r) for r in w.matrix])
            rho = self.realization.rho
            n = len(rho)
            img = [_dot(rho, [inv[k][j] for k in range(n)]) for j in range(n)]
            self._rho_image[w] = img
        return img

    def descent_value(self, s: int, w: GroupElement) -> Scalar:
        return self.realization.pairing(self.rho_image(w), self.realization.coroots[s])

    def is_left_descent(self, s: int, w: GroupElement) -> bool:
        return sign(self.descent_value(s, w)) < 0

    def is_right_descent(self, w: GroupElement, s: int) -> bool:
        return self.length(self.rmul(w, s)) < self.length(w)

    def left_descents(self, w: GroupElement) -> list[int]:
        return [s for s in range(self.rank) if self.is_left_descent(s, w)]

    def right_descents(self, w: GroupElement) -> list[int]:
        word = self.reduced_word(w)
        return [s for s in range(self.rank) if self.is_right_descent(w, s)] if word else []

    def reduced_word(self, w: GroupElement, bound: int = 10_000) -> Word:
        """Lexicographically smallest reduced word, by stripping the smallest left descent."""
        got = self._reduced.get(w)
        if got is not None:
            return got
        strip: list[int] = []
        cur = w
        path = []
        while cur not in self._reduced:
            if len(strip) > bound:
                raise NonTerminationError("descent stripping exceeded its bound")
            s = next((t for t in range(self.rank) if self.is_left_descent(t, cur)), None)
            if s is None:
                raise NonTerminationError("element without left descents is not the identity")
            path.append(cur)
            strip.append(s)
            cur = self.lmul(s, cur)
        tail = self._reduced[cur]
        for k in range(len(path) - 1, -1, -1):
            tail = (strip[k],) + tail
            self._reduced[path[k]] = tail
        return self._reduced[w]

    def length(self, w: GroupElement) -> int:
        return len(self.reduced_word(w))

    # -- Bruhat order ------------------------------------------------------
    def bruhat_leq(self, x: GroupElement, y: GroupElement) -> bool:
        """Subword test of x against the fixed reduced word of y (greedy, left to right)."""
        if self.length(x) > self.length(y):
            return False
        cur = x
        remaining = self.length(x)
        word = self.reduced_word(y)
        for k, s in enumerate(word):
            if remaining == 0:
                return True
            if len(word) - k < remaining:
                return False
            if self.is_left_descent(s, cur):
                cur = self.lmul(s, cur)
                remaining -= 1
        return remaining == 0

    # -- enumeration ---------------------------------------------------------
    def is_finite(self) -> bool:
        """Finiteness by positive definiteness of the Coxeter form (Sylvester's criterion)."""
        if self._finite is None:
            r = self.rank
            try:
                gram = [
                    [mpq(2) if i == j else geometric_pairing(self.matrix[i, j]) for j in range(r)]
                    for i in range(r)
                ]
            except UnsupportedFieldError:
                self._finite = len(self.enumerate(None)) < self.element_cap
                return self._finite
            self._finite = all(
                sign(linalg.det([row[:k] for row in gram[:k]])) > 0 for k in range(1, r + 1)
            )
        return self._finite

    def enumerate(self, max_length: float | None = None) -> list[GroupElement]:
        """Elements of length <= max_length (all of W if None), sorted by (length, word)."""
        key = INF if max_length is None else max_length
        got = self._enumerated.get(key)
        if got is not None:
            return got
        if max_length is None and self._finite is False:
            raise ElementCapExceeded("infinite group needs a finite max_length")
        seen = {self.identity}
        out = [self.identity]
        frontier = [self.identity]
        depth = 0
        while frontier and depth < key:
            nxt = []
            for w in frontier:
                for s in range(self.rank):
                    u = self.rmul(w, s)
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
                        if len(seen) > self.element_cap:
                            raise ElementCapExceeded(
                                f"more than {self.element_cap} elements; lower max_length"
                            )
            depth += 1
            out.extend(nxt)
            frontier = nxt
        out.sort(key=lambda w: (self.length(w), self.reduced_word(w)))
        with self._lock:
            self._enumerated[key] = out
        return out

    def longest_element(self) -> GroupElement:
        return self.enumerate()[-1]

    def reflections(self, max_length: float | None = None) -> set[GroupElement]:
        """{w s w^-1} for enumerated w."""
        out = set()
        for w in self.enumerate(max_length):
            wi = self.inverse(w)
            for s in range(self.rank):
                out.add(self.mul(self.mul(w, self._gens[s]), wi))
        return out

    def reduced_words(self, w: GroupElement) -> list[Word]:
        """All reduced words of w, sorted lexicographically."""
        if w == self.identity:
            return [()]
        out = []
        for s in self.left_descents(w):
            for tail in self.reduced_words(self.lmul(s, w)):
                out.append((s,) + tail)
        return sorted(out)

    def word_label(self, w: GroupElement) -> str:
        word = self.reduced_word(w)
        return "e" if not word else "".join(f"s{s + 1}" for s in word)


def _dot(a: Sequence[Scalar], b: Sequence[Scalar]) -> Scalar:
    s: Scalar = mpq(0)
    for x, y in zip(a, b):
        if x and y:
            s = s + x * y
    return s


# -- construction ------------------------------------------------------------


def _order(W: CoxeterSystem, s: int, t: int, limit: int) -> int | None:
    st = W.mul(W.gen(s), W.gen(t))
    cur = st
    for k in range(1, limit + 1):
        if cur == W.identity:
            return k
        cur = W.mul(cur, st)
    return None


def build_system(
    matrix: CoxeterMatrix,
    mode: str = "geometric",
    *,
    cartan: Sequence[Sequence] | None = None,
    alpha: Sequence[Sequence] | None = None,
    alphavee: Sequence[Sequence] | None = None,
    rho: Sequence | None = None,
    field: QuadraticField | None = None,
    element_cap: int = 200_000,
) -> CoxeterSystem:
    """Realize a Coxeter matrix.

    ``mode`` is ``"geometric"`` (pairings -2cos(pi/m)), ``"cartan"`` (integer
    generalized Cartan matrix with ``cartan[s][t] = <alpha_t, alpha_s^vee>``)
    or ``"explicit"`` (roots ``alpha`` as linear forms, coroots ``alphavee``
    as vectors, both in coordinates of V).
    """
    r = matrix.rank
    if mode in ("geometric", "cartan"):
        if mode == "geometric":
            pair = [[mpq(2) if s == t else geometric_pairing(matrix[s, t]) for t in range(r)] for s in range(r)]
            fld = unify_fields(*(_field_of(x) for row in pair for x in row))
        else:
            if cartan is None:
                raise CoxeterError("cartan mode needs a cartan matrix")
            if len(cartan) != r or any(len(row) != r for row in cartan):
                raise CoxeterError("cartan matrix has the wrong shape")
            if any(not float(x).is_integer() for row in cartan for x in row):
                raise CoxeterError("cartan entries must be integers")
            pair = [[mpq(int(x)) for x in row] for row in cartan]
            fld = QuadraticField(1)
        if field is not None:
            fld = unify_fields(fld, field)
        coroots = [[mpq(1) if i == s else mpq(0) for i in range(r)] for s in range(r)]
        roots = [[pair[i][t] for i in range(r)] for t in range(r)]
        dim = r
    elif mode == "explicit":
        if alpha is None or alphavee is None:
            raise CoxeterError("explicit mode needs alpha and alphavee")
        fld = field or QuadraticField(1)
        roots = [[fld.parse(x) for x in row] for row in alpha]
        coroots = [[fld.parse(x) for x in row] for row in alphavee]
        if len(roots) != r or len(coroots) != r:
            raise CoxeterError("need one root and one coroot per generator")
        dim = len(roots[0])
        if any(len(v) != dim for v in roots + coroots):
            raise CoxeterError("roots and coroots must live in a common V")
    else:
        raise CoxeterError(f"unknown realization mode {mode!r}")

    if rho is None:
        # <rho, alpha_s^vee> = 1 for all s; any particular solution will do
        sol = linalg.solve(coroots, [[mpq(1)] for _ in range(r)])
        if sol is None:
            raise CoxeterError("no rho with <rho, alpha_s^vee> = 1; supply rho")
        rho_v = [row[0] for row in sol]
    else:
        rho_v = [fld.parse(x) for x in rho]
        if len(rho_v) != dim:
            raise CoxeterError("rho has the wrong dimension")

    real = Realization(fld, dim, coroots, roots, rho_v, mode)
    for s in range(r):
        if real.pairing(roots[s], coroots[s]) != 2:
            raise CoxeterError(f"<alpha_{s}, alpha_{s}^vee> != 2")
        if sign(real.pairing(rho_v, coroots[s])) <= 0:
            raise CoxeterError(f"rho-positivity fails: <rho, alpha_{s}^vee> <= 0")
    W = CoxeterSystem(matrix, real, element_cap)
    for s in range(r):
        for t in range(s + 1, r):
            m = matrix[s, t]
            limit = 24 if m == INF else int(m)
            k = _order(W, s, t, limit)
            if (m == INF and k is not None) or (m != INF and k != m):
                raise CoxeterError(f"order of s{s + 1}s{t + 1} is {k}, expected {m}")
    return W


def default_system(matrix: CoxeterMatrix, element_cap: int = 200_000) -> CoxeterSystem:
    """The geometric realization, enlarged when its pairing matrix is singular.

    For affine types the geometric representation is not reflection faithful
    (translations fix a hyperplane).  There the roots are made linearly
    independent by adding one coordinate per missing rank, which is the minimal
    realization of the generalized Cartan matrix.

    >>> W = default_system(preset("Atilde1"))
    >>> W.realization.dim, check_reflection_faithful(W, 6).passed
    (3, True)
    """
    r = matrix.rank
    pair = [[mpq(2) if s == t else geometric_pairing(matrix[s, t]) for t in range(r)] for s in range(r)]
    roots = [[pair[i][t] for i in range(r)] for t in range(r)]
    # roots are rows; those outside a row basis get a fresh coordinate each
    basis_rows = set(linalg.column_basis(linalg.transpose(roots, r)))
    extra = [t for t in range(r) if t not in basis_rows]
    if not extra:
        return build_system(matrix, element_cap=element_cap)
    fld = unify_fields(*(_field_of(x) for row in pair for x in row))
    dim = r + len(extra)
    alpha = [roots[t] + [mpq(int(t == e)) for e in extra] for t in range(r)]
    alphavee = [[mpq(int(i == s)) for i in range(dim)] for s in range(r)]
    return build_system(matrix, "explicit", alpha=alpha, alphavee=alphavee, field=fld, element_cap=element_cap)


@dataclass
class FaithfulnessReport:
    passed: bool
    elements: int
    reflections: int
    violations: list[dict] = field(default_factory=list)


def check_reflection_faithful(W: CoxeterSystem, max_length: float | None = None) -> FaithfulnessReport:
    """Hyperplane test: for x != e, ker(x - id) has codimension 1 iff x is a reflection."""
    elems = W.enumerate(max_length)
    T = W.reflections(max_length)
    violations: list[dict] = []
    mats = set()
    for w in elems:
        if w.matrix in mats:
            violations.append({"element": W.word_label(w), "reason": "duplicate matrix"})
        mats.add(w.matrix)
        if w == W.identity:
            continue
        diff = [[x - (1 if i == j else 0) for j, x in enumerate(row)] for i, row in enumerate(w.matrix)]
        codim = linalg.rank(diff)
        if (codim == 1) != (w in T):
            violations.append(
                {"element": W.word_label(w), "codim": codim, "is_reflection": w in T}
            )
    # a collapsed representation breaks length(ws) = length(w) +- 1
    for w in elems:
        for s in range(W.rank):
            if abs(W.length(W.rmul(w, s)) - W.length(w)) != 1:
                violations.append({"element": W.word_label(w), "reason": "length mismatch"})
    nT = sum(1 for t in T if max_length is None or W.length(t) <= max_length)
    return FaithfulnessReport(not violations, len(elems), nT, violations)
