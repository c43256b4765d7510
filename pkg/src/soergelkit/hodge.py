"""Hard Lefschetz and Hodge-Riemann checks on graded spaces with a form.

A :class:`LefschetzDatum` is a graded space, a degree-2 operator ``L`` and a
graded symmetric form pairing degrees ``-i`` and ``i``.  Everything is exact:
ranks are computed over the field of the realization and definiteness comes
from an exact symmetric elimination.

>>> signature([[0, 1], [1, 0]])
(1, 1, 0)
>>> from soergelkit.coxeter import build_system, preset
>>> from soergelkit.soergel import SoergelCategory
>>> cat = SoergelCategory(build_system(preset("A2")))
>>> V = datum_for(cat, cat.W.from_word((0, 1)))
>>> check_hard_lefschetz(V).passed, check_hodge_riemann(V).passed
(True, True)
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy
from gmpy2 import mpq

from .coxeter import GroupElement
from .field import Scalar, format_scalar, sign
from .fmat import FMat
from .graded import Blocks, GradedMap, GradedModule, hom_space, image_of
from .soergel import (
    SoergelCategory,
    VerificationFailure,
    _from_sym,
    _sym,
    linear_combination,
    minimal_polynomial,
    _poly_eval,
    corner_algebra,
    prepend,
    trace_form_rank,
)

DEFAULT_GRID = (
    Fraction(0),
    Fraction(1, 4),
    Fraction(1, 2),
    Fraction(1),
    Fraction(2),
    Fraction(4),
    Fraction(8),
    Fraction(2**10),
)


@dataclass
class LefschetzDatum:
    d: int
    dims: dict[int, int]
    L: Blocks
    form: Blocks

    def __post_init__(self) -> None:
        self.dims = {k: v for k, v in sorted(self.dims.items()) if v}

    @classmethod
    def from_module(cls, M: GradedModule, xi: Sequence[Scalar]) -> LefschetzDatum:
        if M.form is None:
            raise ValueError("module carries no form")
        return cls(M.d, dict(M.dims), M.linear_blocks(xi), {k: M.form_block(k) for k in M.dims if -k in M.dims})

    def op(self, k: int) -> FMat:
        got = self.L.get(k)
        if got is not None:
            return got
        return FMat.zeros(self.dims.get(k + 2, 0), self.dims.get(k, 0), self.d)

    def power(self, k: int, n: int) -> FMat:
        """L^n from degree k to degree k + 2n."""
        out = FMat.identity(self.dims.get(k, 0), self.d)
        for j in range(n):
            out = self.op(k + 2 * j) @ out
        return out

    def gram(self, k: int) -> FMat:
        got = self.form.get(k)
        if got is not None:
            return got
        return FMat.zeros(self.dims.get(k, 0), self.dims.get(-k, 0), self.d)

    def scaled(self, c: Scalar) -> LefschetzDatum:
        return LefschetzDatum(self.d, dict(self.dims), dict(self.L), {k: g.scale(c) for k, g in self.form.items()})

    def lowest(self) -> int | None:
        return min(self.dims) if self.dims else None

    def is_parity_pure(self) -> bool:
        return len({k % 2 for k in self.dims}) <= 1

    def is_self_adjoint(self) -> bool:
        """<Lx, y> == <x, Ly> for x in degree k and y in degree -k-2."""
        for k in self.dims:
            if -k - 2 not in self.dims:
                continue
            lhs = self.op(k).T() @ self.gram(k + 2)
            rhs = self.gram(k) @ self.op(-k - 2)
            if not lhs == rhs:
                return False
        return True

    def is_symmetric(self) -> bool:
        return all(self.gram(k) == self.gram(-k).T() for k in self.dims)


# -- signatures -----------------------------------------------------------------


def signature(mat: Sequence[Sequence[Scalar]] | FMat) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a symmetric matrix, by symmetric
    elimination with 1x1 pivots and, when the diagonal vanishes, 2x2 pivots."""
    rows = mat.to_rows() if isinstance(mat, FMat) else [[x if not isinstance(x, int) else mpq(x) for x in r] for r in mat]
    A = [list(r) for r in rows]
    active = list(range(len(A)))
    pos = neg = 0
    while active:
        i = next((t for t in active if A[t][t] != 0), None)
        if i is not None:
            p = A[i][i]
            if sign(p) > 0:
                pos += 1
            else:
                neg += 1
            active.remove(i)
            for k in active:
                if A[k][i] == 0:
                    continue
                c = A[k][i] / p
                for l in active:
                    if A[i][l] != 0:
                        A[k][l] = A[k][l] - c * A[i][l]
            continue
        pair = next(((a, b) for a in active for b in active if a < b and A[a][b] != 0), None)
        if pair is None:
            break
        i, j = pair
        bval = A[i][j]
        pos += 1
        neg += 1
        active.remove(i)
        active.remove(j)
        for k in active:
            ki, kj = A[k][i], A[k][j]
            if ki == 0 and kj == 0:
                continue
            for l in active:
                il, jl = A[i][l], A[j][l]
                t = 0
                if ki != 0 and jl != 0:
                    t = t + ki * jl
                if kj != 0 and il != 0:
                    t = t + kj * il
                if t != 0:
                    A[k][l] = A[k][l] - t / bval
    return pos, neg, len(active)


# -- reports --------------------------------------------------------------------


@dataclass
class LefschetzReport:
    passed: bool
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"passed": self.passed, "failures": self.failures}


@dataclass
class HodgeRiemannReport:
    passed: bool
    signatures: dict[int, tuple[int, int, int]] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "signatures": {str(k): list(v) for k, v in self.signatures.items()},
            "failures": self.failures,
        }


def check_hard_lefschetz(V: LefschetzDatum) -> LefschetzReport:
    """L^i : V^-i -> V^i is an isomorphism for every i >= 0."""
    rep = LefschetzReport(True)
    top = max((abs(k) for k in V.dims), default=-1)
    for i in range(0, top + 1):
        lo, hi = V.dims.get(-i, 0), V.dims.get(i, 0)
        if lo == 0 and hi == 0:
            continue
        r = V.power(-i, i).rank() if lo and hi else 0
        if not (lo == hi == r):
            rep.passed = False
            rep.failures.append({"i": i, "rank": r, "dim_minus": lo, "dim_plus": hi})
    return rep


def primitives(V: LefschetzDatum, i: int) -> FMat:
    """Columns spanning P^-i = ker(L^{i+1}) on degree -i."""
    n = V.dims.get(-i, 0)
    if n == 0:
        return FMat.zeros(0, 0, V.d)
    P = V.power(-i, i + 1)
    if P.rows == 0:
        return FMat.identity(n, V.d)
    return P.nullspace()


def lefschetz_form(V: LefschetzDatum, i: int) -> FMat:
    """(x, y) -> <x, L^i y> on the whole degree -i piece."""
    return V.gram(-i) @ V.power(-i, i)


def check_hodge_riemann(V: LefschetzDatum) -> HodgeRiemannReport:
    """The Lefschetz form on P^{min+i} is (-1)^{i/2}-definite for even i >= 0 with min + i <= 0."""
    rep = HodgeRiemannReport(True)
    lo = V.lowest()
    if lo is None:
        return rep
    i = 0
    while lo + i <= 0:
        deg = lo + i
        j = -deg
        P = primitives(V, j)
        if P.cols:
            form = P.T() @ lefschetz_form(V, j) @ P
            sig = signature(form)
            rep.signatures[deg] = sig
            want = (P.cols, 0, 0) if (i // 2) % 2 == 0 else (0, P.cols, 0)
            if sig != want:
                rep.passed = False
                rep.failures.append({"degree": deg, "signature": list(sig), "expected": list(want)})
        i += 2
    return rep


@dataclass
class Normalization:
    datum: LefschetzDatum
    value: Scalar
    flipped: bool


def normalize_form(V: LefschetzDatum) -> Normalization:
    """Scale the form by -1 if <c, L^l c> < 0 on the one-dimensional lowest piece."""
    lo = V.lowest()
    if lo is None:
        return Normalization(V, mpq(1), False)
    if V.dims[lo] != 1:
        raise ValueError("lowest degree piece is not one-dimensional")
    val = lefschetz_form(V, -lo).entry(0, 0)
    if val == 0:
        raise VerificationFailure("degenerate normalization value", {"degree": lo})
    if sign(val) < 0:
        return Normalization(V.scaled(mpq(-1)), val, True)
    return Normalization(V, val, False)


# -- data attached to Soergel modules ----------------------------------------------


def datum_for(cat: SoergelCategory, w: GroupElement, xi: Sequence[Scalar] | None = None) -> LefschetzDatum:
    """(B_w, rho . (-), restricted form), normalized."""
    M = cat.extract(w).module
    xi = list(cat.W.realization.rho) if xi is None else list(xi)
    return normalize_form(LefschetzDatum.from_module(M, xi)).datum


@dataclass
class DeformationFamily:
    """B_w B_s inside BS(word of w, s) with the left action and the last-slot action."""

    w: GroupElement
    s: int
    module: GradedModule
    ascent: bool
    rho: list[Scalar]
    flipped: bool = False

    def datum(self, zeta: Scalar) -> LefschetzDatum:
        M = self.module
        blocks = {}
        z = _field_scalar(zeta)
        for k in M.dims:
            if k + 2 in M.dims:
                blocks[k] = M.linear_op(self.rho, k)
                if z:
                    blocks[k] = blocks[k] + M.linear_op(self.rho, k, M.extra["last"]).scale(z)
        form = {k: M.form_block(k) for k in M.dims if -k in M.dims}
        V = LefschetzDatum(M.d, dict(M.dims), blocks, form)
        return V.scaled(mpq(-1)) if self.flipped else V


def _field_scalar(z) -> Scalar:
    if isinstance(z, Fraction):
        return mpq(z.numerator, z.denominator)
    if isinstance(z, int):
        return mpq(z)
    return z


_family_lock = threading.Lock()


def deformation_family(cat: SoergelCategory, w: GroupElement, s: int, allow_descent: bool = False) -> DeformationFamily:
    W = cat.W
    ws = W.rmul(w, s)
    ascent = W.length(ws) > W.length(w)
    if not ascent and not allow_descent:
        raise ValueError("the deformed operator needs ws > w")
    store = cat.__dict__.setdefault("_families", {})
    with _family_lock:
        got = store.get((w, s))
        if got is not None:
            return got
    word = W.reduced_word(w)
    base = prepend(W, s, cat.bs(()))
    base.extra["last"] = [dict(t) for t in base.ops]
    N = base
    for t in reversed(word):
        N = prepend(W, t, N)
    e = _idempotent_containing_lowest(N, cat)
    sub = image_of(e).module
    fam = DeformationFamily(w, s, sub, ascent, list(W.realization.rho))
    expected = {}
    for k, v in cat.extract(w).module.dims.items():
        for t in (-1, 1):
            expected[k + t] = expected.get(k + t, 0) + v
    if sub.graded_dims() != {k: v for k, v in sorted(expected.items()) if v}:
        raise VerificationFailure(
            "commutant summand through the lowest vector is not B_w B_s",
            {"w": W.word_label(w), "s": s + 1, "dims": sub.graded_dims()},
        )
    if ascent:
        fam.flipped = normalize_form(fam.datum(0)).flipped
    with _family_lock:
        return store.setdefault((w, s), fam)


def _idempotent_containing_lowest(M: GradedModule, cat: SoergelCategory) -> GradedMap:
    """The primitive idempotent of the commutant of all operator tables of M which
    does not kill the (one-dimensional) lowest degree piece."""
    rng = random.Random(cat.seed)
    basis = hom_space(M, M, 0)
    lo = M.lowest_degree()
    f = GradedMap.identity(M)
    d = M.d
    for _ in range(200):
        alg = corner_algebra(f, basis)
        if trace_form_rank(alg) <= 1:
            return f
        for _attempt in range(cat.retry_budget):
            a = linear_combination(alg, [mpq(rng.randint(-5, 5)) for _ in alg])
            lam = a.block(lo).entry(0, 0)
            mu = minimal_polynomial(a, f)
            x = sympy.Symbol("x")
            kw = {"extension": sympy.sqrt(d)} if d != 1 else {}
            P = sympy.Poly(sum(_sym(c, d) * x**i for i, c in enumerate(mu)), x, **kw)
            root = sympy.Poly(x - _sym(lam, d), x, **kw)
            pe = sympy.Poly(1, x, **kw)
            q = P
            while True:
                qq, r = sympy.div(q, root)
                if not r.is_zero:
                    break
                q, pe = qq, pe * root
            if q.degree() == 0:
                continue
            u, _, g = sympy.gcdex(q, pe)
            uq = sympy.Poly(sympy.expand((u * q).as_expr() / g.as_expr()), x, **kw)
            coeffs = [_from_sym(c, d) for c in reversed(uq.all_coeffs())]
            f = _poly_eval(coeffs, a, f)
            break
        else:
            raise VerificationFailure("could not isolate the summand through the lowest vector")
    raise VerificationFailure("idempotent refinement did not terminate")


def deformed_operator(cat: SoergelCategory, w: GroupElement, s: int, zeta: Scalar) -> LefschetzDatum:
    """(B_w B_s, rho . (-) + zeta * (rho acting through the last factor), form)."""
    return deformation_family(cat, w, s).datum(zeta)


@dataclass
class SweepReport:
    w: str
    s: int
    ascent: bool
    points: list[dict]
    signatures_stable: bool
    smallest_passing: str | None
    passed: bool
    flipped: bool

    def to_json(self) -> dict:
        return {
            "w": self.w,
            "s": self.s,
            "ascent": self.ascent,
            "points": self.points,
            "signatures_stable": self.signatures_stable,
            "smallest_passing_zeta": self.smallest_passing,
            "normalization_flipped": self.flipped,
            "passed": self.passed,
        }


def full_signatures(V: LefschetzDatum) -> dict[int, tuple[int, int, int]]:
    """Signature of (x, y) -> <x, L^i y> on all of V^-i, for i >= 0."""
    out = {}
    for k in V.dims:
        if k <= 0:
            out[k] = signature(lefschetz_form(V, -k))
    return out


def zeta_sweep(cat: SoergelCategory, w: GroupElement, s: int, grid: Sequence = DEFAULT_GRID) -> SweepReport:
    """HL and HR of (B_w B_s, L_zeta) over a grid of zeta.  For ws < w only hard
    Lefschetz at zeta > 0 is checked."""
    fam = deformation_family(cat, w, s, allow_descent=True)
    points = []
    sigs_seen = []
    smallest = None
    ok = True
    for z in grid:
        zz = _field_scalar(z)
        V = fam.datum(zz)
        hl = check_hard_lefschetz(V)
        entry = {"zeta": format_scalar(zz), "hl": hl.passed}
        if fam.ascent:
            hr = check_hodge_riemann(V)
            entry["hr"] = hr.passed
            sig = full_signatures(V)
            entry["signatures"] = {str(k): list(v) for k, v in sig.items()}
            if hl.passed:
                sigs_seen.append(sig)
            if hr.passed and smallest is None:
                smallest = format_scalar(zz)
            ok = ok and hl.passed and hr.passed
            if not hr.passed:
                entry["hr_failures"] = hr.failures
        else:
            if zz != 0:
                ok = ok and hl.passed
                if hl.passed and smallest is None:
                    smallest = format_scalar(zz)
            entry["checked"] = zz != 0
        if not hl.passed:
            entry["hl_failures"] = hl.failures
        points.append(entry)
    stable = all(sg == sigs_seen[0] for sg in sigs_seen)
    W = cat.W
    return SweepReport(W.word_label(w), s + 1, fam.ascent, points, stable, smallest, ok and stable, fam.flipped)


# -- the recurrence lemma as a diagnostic -------------------------------------------------


@dataclass
class ProbeReport:
    hypotheses_hold: bool
    conclusion_holds: bool
    violations: list[str] = field(default_factory=list)


def weak_lefschetz_probe(V: LefschetzDatum, Vp: LefschetzDatum, phi: Blocks) -> ProbeReport:
    """Check the hypotheses of the recurrence lemma for phi : V' -> V (raising the
    degree by one), then whether L'^i : V'^-i -> V'^i is injective for all i >= 0."""
    rep = ProbeReport(True, True)

    def ph(k: int) -> FMat:
        got = phi.get(k)
        if got is not None:
            return got
        return FMat.zeros(V.dims.get(k + 1, 0), Vp.dims.get(k, 0), V.d)

    if not check_hodge_riemann(V).passed:
        rep.hypotheses_hold = False
        rep.violations.append("target fails Hodge-Riemann")
    for k in Vp.dims:
        if k <= -1 and ph(k).rank() != Vp.dims[k]:
            rep.hypotheses_hold = False
            rep.violations.append(f"not injective in degree {k}")
        if not ph(k + 2) @ Vp.op(k) == V.op(k + 1) @ ph(k):
            rep.hypotheses_hold = False
            rep.violations.append(f"does not intertwine in degree {k}")
        if -k - 2 in Vp.dims or -k in Vp.dims:
            lhs = ph(k).T() @ V.gram(k + 1) @ ph(-k - 2)
            rhs = Vp.gram(k) @ Vp.op(-k - 2)
            if not lhs == rhs:
                rep.hypotheses_hold = False
                rep.violations.append(f"form identity fails in degree {k}")
    top = max((abs(k) for k in Vp.dims), default=-1)
    for i in range(0, top + 1):
        n = Vp.dims.get(-i, 0)
        if n and Vp.power(-i, i).rank() != n:
            rep.conclusion_holds = False
    return rep
