"""The graded polynomial ring R = Sym(V*) of a realization.

Variables ``x1, ..., xn`` are the coordinate forms of V, so a linear form
given as a row vector ``xi`` is the polynomial ``sum_i xi[i] * x_{i+1}``.
Linear forms sit in graded degree 2.  W acts contragrediently,
``w(f) = f o w^-1``, and the Demazure operator is ``(f - s(f)) / alpha_s``.

>>> from soergelkit.coxeter import build_system, preset
>>> R = PolynomialRing(build_system(preset("A2")))
>>> a = R.root(0)
>>> R.act_gen(0, a) == -a, R.demazure(0, a)
(True, GradedPolynomial(2, {(0, 0): mpq(2,1)}))
"""

from __future__ import annotations

import random
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .coxeter import CoxeterSystem, GroupElement
from .field import OrderedFieldElement, QuadraticElement, Scalar, format_scalar

Monomial = tuple[int, ...]


def _key(m: Monomial) -> tuple:
    # graded lexicographic
    return (sum(m), m)


class GradedPolynomial:
    """Sparse polynomial in ``nvars`` variables; no zero coefficients are stored."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Scalar] | None = None) -> None:
        self.nvars = nvars
        self.terms: dict[Monomial, Scalar] = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, nvars: int, c) -> GradedPolynomial:
        return cls(nvars, {(0,) * nvars: mpq(c) if isinstance(c, int) else c})

    @classmethod
    def linear(cls, xi: Sequence[Scalar]) -> GradedPolynomial:
        n = len(xi)
        return cls(n, {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(xi)})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, GradedPolynomial):
            return self.terms == other.terms
        if isinstance(other, (int, type(mpq(0)))):
            return self == GradedPolynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def _coerce(self, other) -> GradedPolynomial:
        if isinstance(other, GradedPolynomial):
            return other
        return GradedPolynomial.constant(self.nvars, other)

    def __add__(self, other) -> GradedPolynomial:
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return GradedPolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> GradedPolynomial:
        return GradedPolynomial(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> GradedPolynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> GradedPolynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> GradedPolynomial:
        if not isinstance(other, GradedPolynomial):
            return GradedPolynomial(self.nvars, {m: c * other for m, c in self.terms.items()})
        out: dict[Monomial, Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return GradedPolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> GradedPolynomial:
        out = GradedPolynomial.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def degree(self) -> int:
        """Graded degree of the top component (twice the polynomial degree); -inf for 0."""
        return max((2 * sum(m) for m in self.terms), default=-(10**9))

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def homogeneous_part(self, graded_degree: int) -> GradedPolynomial:
        return GradedPolynomial(self.nvars, {m: c for m, c in self.terms.items() if 2 * sum(m) == graded_degree})

    def leading(self) -> tuple[Monomial, Scalar]:
        m = max(self.terms, key=_key)
        return m, self.terms[m]

    def substitute(self, images: Sequence[GradedPolynomial]) -> GradedPolynomial:
        """Algebra map sending the i-th variable to ``images[i]``."""
        n = len(images)
        out = GradedPolynomial(n)
        powers: dict[tuple[int, int], GradedPolynomial] = {}
        for m, c in self.terms.items():
            t = GradedPolynomial.constant(n, c)
            for i, e in enumerate(m):
                if e:
                    p = powers.get((i, e))
                    if p is None:
                        p = powers[(i, e)] = images[i] ** e
                    t = t * p
            out = out + t
        return out

    def divide_exact(self, g: GradedPolynomial) -> GradedPolynomial:
        """The quotient self / g; raises ArithmeticError if g does not divide self."""
        if not g:
            raise ZeroDivisionError("division by the zero polynomial")
        gm, gc = g.leading()
        rest = self
        q = GradedPolynomial(self.nvars)
        while rest:
            m, c = rest.leading()
            if any(a < b for a, b in zip(m, gm)):
                raise ArithmeticError("polynomial division is not exact")
            t = GradedPolynomial(self.nvars, {tuple(a - b for a, b in zip(m, gm)): c / gc})
            q = q + t
            rest = rest - t * g
        return q

    def constant_term(self) -> Scalar:
        return self.terms.get((0,) * self.nvars, mpq(0))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_key, reverse=True):
            x = self.terms[m]
            c = format_scalar(x)
            if isinstance(x, QuadraticElement) and x.a != 0:
                c = f"({c})"
            mono = "*".join(f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e)
            parts.append(f"{c}*{mono}" if mono else c)
        return " + ".join(parts)

    def __repr__(self) -> str:
        body = ", ".join(f"{m}: {self.terms[m]!r}" for m in sorted(self.terms, key=_key))
        return f"GradedPolynomial({self.nvars}, {{{body}}})"


class PolynomialRing:
    """Sym(V*) for the realization of a Coxeter system."""

    def __init__(self, W: CoxeterSystem) -> None:
        self.W = W
        self.nvars = W.realization.dim
        self._act_cache: dict[GroupElement, list[GradedPolynomial]] = {}

    def zero(self) -> GradedPolynomial:
        return GradedPolynomial(self.nvars)

    def one(self) -> GradedPolynomial:
        return GradedPolynomial.constant(self.nvars, 1)

    def constant(self, c) -> GradedPolynomial:
        return GradedPolynomial.constant(self.nvars, c)

    def variable(self, i: int) -> GradedPolynomial:
        return GradedPolynomial.linear([mpq(int(i == j)) for j in range(self.nvars)])

    def linear(self, xi: Sequence[Scalar]) -> GradedPolynomial:
        return GradedPolynomial.linear(list(xi))

    def root(self, s: int) -> GradedPolynomial:
        return self.linear(self.W.realization.roots[s])

    def rho(self) -> GradedPolynomial:
        return self.linear(self.W.realization.rho)

    def _images(self, w: GroupElement) -> list[GradedPolynomial]:
        imgs = self._act_cache.get(w)
        if imgs is None:
            inv = self.W.inverse(w).matrix
            # x_i o w^-1 is the i-th row of the matrix of w^-1
            imgs = [self.linear(inv[i]) for i in range(self.nvars)]
            self._act_cache[w] = imgs
        return imgs

    def act(self, w: GroupElement, f: GradedPolynomial) -> GradedPolynomial:
        """w(f) = f o w^-1."""
        if w == self.W.identity:
            return f
        return f.substitute(self._images(w))

    def act_gen(self, s: int, f: GradedPolynomial) -> GradedPolynomial:
        return self.act(self.W.gen(s), f)

    def demazure(self, s: int, f: GradedPolynomial) -> GradedPolynomial:
        """(f - s(f)) / alpha_s, exact."""
        num = f - self.act_gen(s, f)
        if not num:
            return self.zero()
        return num.divide_exact(self.root(s))

    @staticmethod
    def augment(f: GradedPolynomial) -> OrderedFieldElement:
        return f.constant_term()

    def random(self, rng: random.Random, max_degree: int = 3, coeff_range: int = 5) -> GradedPolynomial:
        """Random polynomial of polynomial degree <= max_degree with small integer
        coefficients (and irrational ones when the field is not Q)."""
        fld = self.W.field
        terms: dict[Monomial, Scalar] = {}
        for _ in range(rng.randint(1, 6)):
            deg = rng.randint(0, max_degree)
            m = [0] * self.nvars
            for _ in range(deg):
                m[rng.randrange(self.nvars)] += 1
            a = rng.randint(-coeff_range, coeff_range)
            b = 0 if fld.is_rational else rng.randint(-coeff_range, coeff_range)
            terms[tuple(m)] = terms.get(tuple(m), 0) + fld(a, b)
        return GradedPolynomial(self.nvars, terms)


def act_linear(W: CoxeterSystem, w: GroupElement, xi: Sequence[Scalar]) -> list[Scalar]:
    """w(xi) = xi o w^-1 for a linear form given as a row vector."""
    inv = W.inverse(w).matrix
    n = len(xi)
    out = []
    for j in range(n):
        acc: Scalar = mpq(0)
        for i in range(n):
            if xi[i] and inv[i][j]:
                acc = acc + xi[i] * inv[i][j]
        out.append(acc)
    return out


def reflect_linear(W: CoxeterSystem, s: int, xi: Sequence[Scalar]) -> list[Scalar]:
    """s(xi) = xi - <xi, alpha_s^vee> alpha_s."""
    real = W.realization
    c = real.pairing(xi, real.coroots[s])
    return [x - c * a for x, a in zip(xi, real.roots[s])]


def sum_polys(polys: Iterable[GradedPolynomial], nvars: int) -> GradedPolynomial:
    out = GradedPolynomial(nvars)
    for p in polys:
        out = out + p
    return out
