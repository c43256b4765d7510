"""Independent reference computations used to check the library."""

from __future__ import annotations

import random
from itertools import combinations

import sympy
from gmpy2 import mpq
from sympy.polys.matrices import DomainMatrix

from soergelkit.field import QuadraticElement, QuadraticField, sign
from soergelkit.hecke import LaurentPoly
from soergelkit.polyalg import PolynomialRing

v = sympy.Symbol("v")


# -- Bruhat order by subwords -----------------------------------------------------------


def subword_products(W, y) -> set:
    """Everything obtained from one reduced word of y by deleting letters."""
    rw = W.reduced_words(y)[-1]
    out = set()
    for k in range(len(rw) + 1):
        for pos in combinations(range(len(rw)), k):
            out.add(W.from_word([rw[p] for p in pos]))
    return out


# -- an independent model of the dihedral Hecke algebra ---------------------------------
#
# Elements of I2(m) are alternating words, stored as (first letter, length) with the
# identity (0, 0) and the two spellings of the longest element identified.


class Dihedral:
    def __init__(self, m: int) -> None:
        self.m = m
        self.elements = [(0, 0)] + [(a, k) for k in range(1, m) for a in (0, 1)] + [(0, m)]

    def norm(self, a: int, k: int) -> tuple[int, int]:
        return (0, k) if k in (0, self.m) else (a, k)

    def last(self, w) -> int:
        a, k = w
        return a if k % 2 else 1 - a

    def word(self, w) -> list[int]:
        a, k = w
        return [(a + i) % 2 for i in range(k)]

    def times_s(self, w, s):
        """(w s, whether the length goes down)."""
        a, k = w
        if k == 0:
            return (s, 1), False
        if k == self.m:
            # the longest element ends in either letter
            first = s if self.m % 2 else 1 - s
            return self.norm(first, k - 1), True
        if self.last(w) == s:
            return self.norm(a, k - 1), True
        return self.norm(a, k + 1), False

    def mult_s(self, elt: dict, s: int) -> dict:
        out: dict = {}
        for w, p in elt.items():
            ws, down = self.times_s(w, s)
            out[ws] = out.get(ws, 0) + p
            if down:
                out[w] = out.get(w, 0) + p * (1 / v - v)
        return {w: sympy.expand(p) for w, p in out.items() if sympy.expand(p) != 0}

    def bar_standard(self, w) -> dict:
        out = {(0, 0): sympy.Integer(1)}
        for s in self.word(w):
            prod = self.mult_s(out, s)
            for u, p in out.items():
                prod[u] = prod.get(u, 0) + p * (v - 1 / v)
            out = {u: sympy.expand(p) for u, p in prod.items() if sympy.expand(p) != 0}
        return out

    def bar(self, elt: dict) -> dict:
        out: dict = {}
        for w, p in elt.items():
            pb = p.subs(v, 1 / v)
            for u, q in self.bar_standard(w).items():
                out[u] = out.get(u, 0) + q * pb
        return {w: sympy.expand(p) for w, p in out.items() if sympy.expand(p) != 0}

    def kl_by_linear_solve(self, w) -> dict:
        """Solve bar(C) = C for C = H_w + sum_{y < w} h_y H_y with h_y in v Z[v]."""
        lw = w[1]
        unknowns, elt = [], {w: sympy.Integer(1)}
        for y in self.elements:
            if y[1] < lw:
                cs = sympy.symbols(f"a_{y[0]}_{y[1]}_1:{lw - y[1] + 1}")
                unknowns.extend(cs)
                elt[y] = sum(c * v ** (j + 1) for j, c in enumerate(cs))
        if not unknowns:
            return elt
        diff = self.bar(elt)
        eqs = []
        for y in self.elements:
            expr = sympy.expand((diff.get(y, 0) - elt.get(y, 0)) * v ** (2 * self.m + 2))
            eqs.extend(sympy.Poly(expr, v).coeffs())
        sols = sympy.linsolve(eqs, unknowns)
        (sol,) = sols
        assert not any(s.free_symbols for s in sol), "solution is not unique"
        sub = dict(zip(unknowns, sol))
        return {y: sympy.expand(p.subs(sub)) for y, p in elt.items() if sympy.expand(p.subs(sub)) != 0}


def to_laurent(expr) -> LaurentPoly:
    expr = sympy.expand(expr)
    out = {}
    for term in sympy.Add.make_args(expr):
        c, e = term.as_coeff_exponent(v)
        out[int(e)] = out.get(int(e), 0) + int(c)
    return LaurentPoly(out)


# -- signature against an eigenvalue count ---------------------------------------------
#
# A real symmetric matrix has only real eigenvalues, so Descartes' rule of signs is
# exact on its characteristic polynomial: sign changes of p(x) count the positive
# eigenvalues, sign changes of p(-x) the negative ones.

SQ5 = sympy.sqrt(5)


def _to_sym(x):
    if isinstance(x, QuadraticElement):
        return sympy.Rational(int(x.a.numerator), int(x.a.denominator)) + sympy.Rational(
            int(x.b.numerator), int(x.b.denominator)
        ) * sympy.sqrt(x.d)
    x = mpq(x)
    return sympy.Rational(int(x.numerator), int(x.denominator))


def _sign_sym(c) -> int:
    c = sympy.expand(c)
    if c == 0:
        return 0
    b = sympy.Rational(c.coeff(SQ5))
    a = sympy.Rational(sympy.expand(c - b * SQ5))
    return sign(QuadraticField(5)(mpq(int(a.p), int(a.q)), mpq(int(b.p), int(b.q))))


def _changes(signs) -> int:
    s = [x for x in signs if x]
    return sum(1 for a, b in zip(s, s[1:]) if a != b)


def eigenvalue_count(rows) -> tuple[int, int, int]:
    n = len(rows)
    if n == 0:
        return (0, 0, 0)
    K = sympy.QQ.algebraic_field(SQ5)
    M = DomainMatrix([[K.from_sympy(_to_sym(c)) for c in r] for r in rows], (n, n), K)
    coeffs = [K.to_sympy(c) for c in M.charpoly()][::-1]  # constant term first
    zero = next(i for i, c in enumerate(coeffs) if sympy.expand(c) != 0)
    pos = _changes([_sign_sym(c) for c in coeffs])
    neg = _changes([_sign_sym(c * (-1) ** i) for i, c in enumerate(coeffs)])
    return (pos, neg, zero)


def random_symmetric(rng: random.Random, n: int, field5: bool):
    K = QuadraticField(5) if field5 else QuadraticField(1)
    zero_diag = rng.random() < 0.4
    rank_cap = rng.randint(0, n)
    # low-rank part B D B^T plus sparse noise keeps zero eigenvalues common
    B = [[K(rng.randint(-2, 2), rng.randint(-1, 1) if field5 else 0) for _ in range(rank_cap)] for _ in range(n)]
    D = [rng.choice([-1, 1, 2]) for _ in range(rank_cap)]
    A = [[sum((B[i][k] * D[k] * B[j][k] for k in range(rank_cap)), mpq(0)) for j in range(n)] for i in range(n)]
    if zero_diag:
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    c = K(rng.randint(-3, 3))
                    A[i][j] = A[i][j] + c
                    A[j][i] = A[j][i] + c
            A[i][i] = mpq(0)
    return A


# -- a model of R (x)_{R^s} R -----------------------------------------------
#
# Every element is a sum of pure tensors l (x) r.  Writing l = e + alpha_s o with e, o
# s-invariant (e = (l + s l)/2, o = (l - s l)/(2 alpha_s)) moves the invariant parts to
# the right, so l (x) r = 1 (x) e r + alpha_s (x) o r and the pair (e r, o r) is a normal
# form, because R is free over R^s on {1, alpha_s}.


def normal_form(R: PolynomialRing, s: int, tensors) -> tuple:
    a = R.root(s)
    one_part, alpha_part = R.zero(), R.zero()
    for left, right in tensors:
        sl = R.act_gen(s, left)
        even = (left + sl) * mpq(1, 2)
        odd = (left - sl).divide_exact(a) * mpq(1, 2) if left != sl else R.zero()
        assert R.act_gen(s, even) == even and R.act_gen(s, odd) == odd
        one_part = one_part + even * right
        alpha_part = alpha_part + odd * right
    return one_part, alpha_part


def c_s(R, s):
    half = mpq(1, 2)
    return [(R.root(s) * half, R.one()), (R.one(), R.root(s) * half)]


def times_left(f, tensors):
    return [(f * l, r) for l, r in tensors]


def times_right(tensors, f):
    return [(l, r * f) for l, r in tensors]
