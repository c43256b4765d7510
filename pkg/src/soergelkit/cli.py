"""Command line driver.

Words are comma-separated generator indices starting at 1 (``1,2,1``); the
empty word is ``e`` or the empty string.  Exit codes: 0 when every check
passes, 1 when a counterexample is found, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .coxeter import (
    CoxeterError,
    CoxeterMatrix,
    CoxeterSystem,
    build_system,
    check_reflection_faithful,
    default_system,
    preset,
)
from .field import QuadraticField
from .hecke import HeckeAlgebra, LaurentPoly, decompose_quantum

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
ALL_CHECKS = ("coxeter", "hecke", "soergel", "hodge", "sweep", "rouquier")
MODULE_CHECKS = ("soergel", "hodge", "sweep", "rouquier")
H3_MODULE_CAP = 8
SWEEP_CAP = 5
ROUQUIER_CAP = 6
INFINITE_DEFAULT_LENGTH = 8


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------------


@dataclass
class CampaignConfig:
    preset: str | None = None
    matrix_file: str | None = None
    max_length: int | None = None
    zeta_grid: list[Fraction] = field(default_factory=list)
    seed: int = 0
    checks: tuple[str, ...] = ALL_CHECKS
    out: str | None = None
    format: str | None = None

    def describe(self) -> dict:
        d = asdict(self)
        d["zeta_grid"] = [str(z) for z in self.zeta_grid]
        d["checks"] = list(self.checks)
        d.pop("out")
        return d


def load_system(cfg: CampaignConfig) -> tuple[CoxeterSystem, str]:
    """Build the Coxeter system named by a preset or described by a JSON file with keys
    rank, entries, mode, field, and optionally cartan, alpha, alphavee, rho."""
    try:
        if cfg.matrix_file:
            data = json.loads(Path(cfg.matrix_file).read_text())
            entries = data["entries"]
            if "rank" in data and int(data["rank"]) != len(entries):
                raise ConfigError("rank does not match the number of rows")
            M = CoxeterMatrix.from_rows(entries, data.get("name", Path(cfg.matrix_file).stem))
            fld = data.get("field")
            fld = QuadraticField(int(fld)) if fld not in (None, "Q", "QQ", 1) else None
            W = build_system(
                M,
                data.get("mode", "geometric"),
                cartan=data.get("cartan"),
                alpha=data.get("alpha"),
                alphavee=data.get("alphavee"),
                rho=data.get("rho"),
                field=fld,
            )
            return W, M.name
        if cfg.preset:
            M = preset(cfg.preset)
            return default_system(M), M.name
    except (CoxeterError, KeyError, TypeError, ValueError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid group configuration: {exc}") from exc
    raise ConfigError("give --preset or --matrix-file")


def parse_word(text: str, W: CoxeterSystem) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "e"):
        return ()
    try:
        word = tuple(int(t) - 1 for t in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad word {text!r}: use comma-separated indices such as 1,2,1") from exc
    if any(s < 0 or s >= W.rank for s in word):
        raise ConfigError(f"word {text!r} uses a generator outside 1..{W.rank}")
    return word


def parse_grid(text: str | None) -> list[Fraction]:
    from .hodge import DEFAULT_GRID

    if not text:
        return list(DEFAULT_GRID)
    try:
        grid = [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad zeta grid {text!r}") from exc
    if any(z < 0 for z in grid):
        raise ConfigError("zeta grid entries must be >= 0")
    return grid


def _elements(W: CoxeterSystem, max_length: int | None):
    if not W.is_finite() and max_length is None:
        raise ConfigError("an infinite group needs --max-length")
    return W.enumerate(max_length)


# -- output ---------------------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _tsv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["\t".join(header)] + ["\t".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def _poly(p: LaurentPoly) -> str:
    return p.to_sparse()


# -- Hecke subcommands ------------------------------------------------------------------


def _hecke_table(args, W: CoxeterSystem, header, rows, fmt_default="tsv") -> int:
    fmt = args.format or fmt_default
    if fmt == "json":
        _emit(_json([dict(zip(header, r)) for r in rows]), args.out)
    else:
        _emit(_tsv(header, rows), args.out)
    return EXIT_PASS


def cmd_kl(args, W: CoxeterSystem) -> int:
    H = HeckeAlgebra(W)
    rows = []
    for w in _elements(W, args.max_length):
        for y in H.ideal_below(w):
            rows.append((W.word_label(y), W.word_label(w), _poly(H.kl_poly(y, w))))
    return _hecke_table(args, W, ("y", "w", "polynomial"), rows)


def cmd_inverse_kl(args, W: CoxeterSystem) -> int:
    H = HeckeAlgebra(W)
    rows = []
    for w in _elements(W, args.max_length):
        g = H.inverse_kl(w)
        for y in sorted(g, key=lambda u: (W.length(u), W.reduced_word(u))):
            rows.append((W.word_label(y), W.word_label(w), _poly(g[y])))
    return _hecke_table(args, W, ("y", "w", "polynomial"), rows)


def _mu_entries(args, W: CoxeterSystem, H: HeckeAlgebra):
    """(x, y, z, mu) for every nonzero structure constant requested, in element order."""
    els = _elements(W, args.max_length)
    xs = [W.from_word(parse_word(args.x, W))] if args.x is not None else els
    ys = [W.from_word(parse_word(args.y, W))] if args.y is not None else els
    for blk in H.structure_constants(xs, ys):
        for yi, zi in blk.nonzero():
            yield blk.x, blk.ys[yi], blk.zs[zi], blk.poly(yi, zi)


def cmd_mu(args, W: CoxeterSystem) -> int:
    H = HeckeAlgebra(W)
    rows = [tuple(W.word_label(u) for u in (x, y, z)) + (_poly(p),) for x, y, z, p in _mu_entries(args, W, H)]
    return _hecke_table(args, W, ("x", "y", "z", "polynomial"), rows)


def cmd_unimodality(args, W: CoxeterSystem) -> int:
    H = HeckeAlgebra(W)
    rows = []
    ok = True
    for x, y, z, p in _mu_entries(args, W, H):
        dec = decompose_quantum(p)
        ok = ok and dec is not None
        text = "FAIL" if dec is None else ",".join(f"[{k}]x{v}" for k, v in sorted(dec.items()))
        rows.append(tuple(W.word_label(u) for u in (x, y, z)) + (_poly(p), text))
    _hecke_table(args, W, ("x", "y", "z", "polynomial", "quantum_decomposition"), rows)
    return EXIT_PASS if ok else EXIT_FAIL


# -- module subcommands ------------------------------------------------------------------


def _category(W: CoxeterSystem, seed: int):
    from .soergel import SoergelCategory

    if not W.is_finite():
        raise ConfigError("module-level computations need a finite group")
    return SoergelCategory(W, seed=seed)


def cmd_decompose(args, W: CoxeterSystem) -> int:
    cat = _category(W, args.seed)
    word = parse_word(args.word, W)
    rep = cat.decomposition_report(word).to_json()
    rep["word"] = ",".join(str(s + 1) for s in word)
    _emit(_json(rep), args.out)
    return EXIT_PASS if rep["match"] else EXIT_FAIL


def _module_elements(args, W: CoxeterSystem, name: str):
    cap = args.max_length
    if cap is None and name.upper() == "H3":
        cap = H3_MODULE_CAP
    return [w for w in W.enumerate() if cap is None or W.length(w) <= cap]


def _element_report(cat, w, which: str) -> dict:
    from .hodge import LefschetzDatum, check_hard_lefschetz, check_hodge_riemann, full_signatures, normalize_form

    W = cat.W
    M = cat.extract(w).module
    norm = normalize_form(LefschetzDatum.from_module(M, W.realization.rho))
    V = norm.datum
    out: dict = {"w": W.word_label(w), "degrees": {str(k): v for k, v in V.dims.items()}, "verdicts": {}}
    witness = {}
    if which in ("hl", "all"):
        hl = check_hard_lefschetz(V)
        out["verdicts"]["hard_lefschetz"] = hl.passed
        if not hl.passed:
            witness["hard_lefschetz"] = hl.failures
    if which in ("hr", "all"):
        hr = check_hodge_riemann(V)
        out["verdicts"]["hodge_riemann"] = hr.passed
        out["signatures"] = {str(k): list(v) for k, v in hr.signatures.items()}
        if not hr.passed:
            witness["hodge_riemann"] = hr.failures
    out["lefschetz_form_signatures"] = {str(k): list(v) for k, v in full_signatures(V).items()}
    out["normalization_flipped"] = norm.flipped
    if witness:
        out["failure_witness"] = witness
    return out


def cmd_verify(args, W: CoxeterSystem, name: str) -> int:
    from .hodge import zeta_sweep

    cat = _category(W, args.seed)
    if args.element is not None:
        elems = [W.from_word(parse_word(args.element, W))]
    else:
        elems = _module_elements(args, W, name)
    reports = []
    ok = True
    if args.what in ("hl", "hr"):
        for w in elems:
            r = _element_report(cat, w, args.what)
            ok = ok and all(r["verdicts"].values())
            reports.append(r)
    else:
        grid = parse_grid(args.zeta_grid)
        cap = args.max_length if args.max_length is not None else SWEEP_CAP
        for w in elems:
            for s in range(W.rank):
                ws = W.rmul(w, s)
                if args.element is None and max(W.length(ws), W.length(w)) > cap:
                    continue
                r = zeta_sweep(cat, w, s, grid).to_json()
                ok = ok and r["passed"]
                reports.append(r)
    _emit(_json(reports), args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_rouquier(args, W: CoxeterSystem) -> int:
    from .rouquier import concentration_check

    word = parse_word(args.word, W)
    rep = concentration_check(W, word).to_json()
    rep["word"] = ",".join(str(s + 1) for s in word)
    rep["expected"] = {"0": {str(len(word)): 1}} if rep["reduced"] else None
    _emit(_json(rep), args.out)
    good = rep["d_squared_zero"] and rep["commutes"] and rep["euler_characteristic_ok"] and rep["concentrated"] is not False
    return EXIT_PASS if good else EXIT_FAIL


# -- campaign --------------------------------------------------------------------------------


@dataclass
class CheckResult:
    status: str  # pass | fail | skipped
    count: int = 0
    failures: list = field(default_factory=list)
    reason: str | None = None
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"status": self.status, "count": self.count}
        if self.reason:
            out["reason"] = self.reason
        if self.failures:
            out["failures"] = self.failures[:50]
            out["failure_count"] = len(self.failures)
        if self.data:
            out["data"] = self.data
        return out


def _finish(res: CheckResult) -> CheckResult:
    res.status = "fail" if res.failures else "pass"
    return res


def campaign_coxeter(W: CoxeterSystem, elems) -> CheckResult:
    res = CheckResult("pass")
    L = max(W.length(w) for w in elems)
    rep = check_reflection_faithful(W, None if W.is_finite() else L)
    res.failures.extend(rep.violations)
    res.data["elements"] = rep.elements
    res.data["reflections"] = rep.reflections
    real = W.realization
    from .field import sign

    for w in elems:
        res.count += 1
        words = W.reduced_words(w) if W.length(w) <= 10 else [W.reduced_word(w)]
        if any(W.from_word(u) != w for u in words):
            res.failures.append({"element": W.word_label(w), "reason": "reduced words disagree"})
        rho_w = W.rho_image(w)
        for s in range(W.rank):
            up = W.length(W.lmul(s, w)) > W.length(w)
            if (sign(real.pairing(rho_w, real.coroots[s])) > 0) != up:
                res.failures.append({"element": W.word_label(w), "s": s + 1, "reason": "rho sign"})
    if len(elems) <= 48 and W.is_finite():
        from itertools import combinations

        for y in elems:
            wy = W.reduced_word(y)
            subs = set()
            for k in range(len(wy) + 1):
                for pos in combinations(range(len(wy)), k):
                    subs.add(W.from_word([wy[p] for p in pos]))
            for x in elems:
                if (x in subs) != W.bruhat_leq(x, y):
                    res.failures.append({"x": W.word_label(x), "y": W.word_label(y), "reason": "bruhat"})
    return _finish(res)


def campaign_hecke(W: CoxeterSystem, elems) -> CheckResult:
    H = HeckeAlgebra(W)
    res = CheckResult("pass")
    finite = W.is_finite()
    for w in elems:
        kl = H.kl(w)
        if H.bar(kl) != kl:
            res.failures.append({"w": W.word_label(w), "reason": "not bar invariant"})
        for y, p in kl.terms.items():
            res.count += 1
            if y == w:
                if p != LaurentPoly.const(1):
                    res.failures.append({"w": W.word_label(w), "reason": "h_ww != 1"})
                continue
            if not p.is_nonnegative() or (p.min_degree() or 0) < 1:
                res.failures.append({"y": W.word_label(y), "w": W.word_label(w), "h": p.to_sparse()})
            if finite and not W.bruhat_leq(y, w):
                res.failures.append({"y": W.word_label(y), "w": W.word_label(w), "reason": "support"})
        for y, g in H.inverse_kl(w).items():
            sgn = (-1) ** (W.length(w) - W.length(y))
            if not (g * sgn).is_nonnegative():
                res.failures.append({"y": W.word_label(y), "w": W.word_label(w), "g": g.to_sparse()})
    mu_count = 0
    unimodal_fail = 0
    for blk in H.structure_constants(elems, elems):
        mu_count += len(blk.nonzero())
        x = W.word_label(blk.x)
        for yi, zi in blk.negative():
            y, z = W.word_label(blk.ys[yi]), W.word_label(blk.zs[zi])
            res.failures.append({"x": x, "y": y, "z": z, "mu": blk.poly(yi, zi).to_sparse()})
        for yi, zi in blk.not_unimodal():
            unimodal_fail += 1
            y, z = W.word_label(blk.ys[yi]), W.word_label(blk.zs[zi])
            res.failures.append({"x": x, "y": y, "z": z, "reason": "not a sum of quantum integers"})
    res.data["structure_constants"] = mu_count
    res.data["unimodality_failures"] = unimodal_fail
    return _finish(res)


def campaign_soergel(cat, elems) -> CheckResult:
    W = cat.W
    res = CheckResult("pass")
    for w in elems:
        res.count += 1
        rep = cat.decomposition_report(W.reduced_word(w))
        if not rep.match:
            res.failures.append({"w": W.word_label(w), **rep.witness})
        M = cat.extract(w).module
        dims = M.graded_dims()
        if dims != cat.predicted_dims(w) or any(dims.get(-k) != v for k, v in dims.items()):
            res.failures.append({"w": W.word_label(w), "reason": "graded dimension", "dims": dims})
        for k, n in M.dims.items():
            if -k in M.dims and M.form_block(k).rank() != n:
                res.failures.append({"w": W.word_label(w), "reason": "degenerate restricted form", "degree": k})
    return _finish(res)


def campaign_hodge(cat, elems) -> CheckResult:
    res = CheckResult("pass")
    for w in elems:
        res.count += 1
        r = _element_report(cat, w, "all")
        if not all(r["verdicts"].values()):
            res.failures.append(r)
    return _finish(res)


def campaign_sweep(cat, elems, grid, cap) -> CheckResult:
    from .hodge import zeta_sweep

    W = cat.W
    res = CheckResult("pass")
    smallest: dict[str, int] = {}
    for w in elems:
        for s in range(W.rank):
            if max(W.length(W.rmul(w, s)), W.length(w)) > cap:
                continue
            r = zeta_sweep(cat, w, s, grid)
            res.count += 1
            if r.ascent:
                key = str(r.smallest_passing)
                smallest[key] = smallest.get(key, 0) + 1
            if not r.passed:
                res.failures.append(r.to_json())
    res.data["smallest_passing_zeta"] = smallest
    res.data["max_length"] = cap
    return _finish(res)


def campaign_rouquier(W: CoxeterSystem, elems, cap) -> CheckResult:
    from .rouquier import concentration_check

    H = HeckeAlgebra(W)
    res = CheckResult("pass")
    for w in elems:
        if W.length(w) > cap:
            continue
        homs = []
        for word in W.reduced_words(w):
            res.count += 1
            rep = concentration_check(W, word, H)
            homs.append(rep.homology)
            if not (rep.passed and rep.d_squared_zero and rep.commutes and rep.euler_ok):
                res.failures.append(rep.to_json())
        if any(h != homs[0] for h in homs):
            res.failures.append({"w": W.word_label(w), "reason": "homology differs between reduced words"})
    res.data["max_length"] = cap
    return _finish(res)


def run_campaign(cfg: CampaignConfig) -> tuple[dict, int]:
    W, name = load_system(cfg)
    finite = W.is_finite()
    hecke_len = cfg.max_length if (cfg.max_length is not None or finite) else INFINITE_DEFAULT_LENGTH
    elems = W.enumerate(hecke_len)
    module_cap = cfg.max_length if cfg.max_length is not None else (H3_MODULE_CAP if name.upper() == "H3" else None)
    module_elems = [w for w in elems if module_cap is None or W.length(w) <= module_cap] if finite else []
    grid = cfg.zeta_grid or parse_grid(None)
    checks: dict[str, dict] = {}
    cat = None

    def skipped(reason: str) -> dict:
        return CheckResult("skipped", reason=reason).to_json()

    runners: dict[str, Callable[[], CheckResult]] = {
        "coxeter": lambda: campaign_coxeter(W, elems),
        "hecke": lambda: campaign_hecke(W, elems),
    }
    for check in ALL_CHECKS:
        if check in MODULE_CHECKS and not finite:
            checks[check] = skipped("infinite group")
            continue
        if check not in cfg.checks:
            checks[check] = skipped("not selected")
            continue
        if check in MODULE_CHECKS and cat is None:
            cat = _category(W, cfg.seed)
        if check in runners:
            res = runners[check]()
        elif check == "soergel":
            res = campaign_soergel(cat, module_elems)
        elif check == "hodge":
            res = campaign_hodge(cat, module_elems)
        elif check == "sweep":
            cap = min(module_cap, SWEEP_CAP) if module_cap is not None else SWEEP_CAP
            res = campaign_sweep(cat, module_elems, grid, cap)
        else:
            cap = min(module_cap, ROUQUIER_CAP) if module_cap is not None else ROUQUIER_CAP
            res = campaign_rouquier(W, module_elems, cap)
        checks[check] = res.to_json()
    passed = all(c["status"] != "fail" for c in checks.values())
    report = {
        "group": {
            "name": name,
            "rank": W.rank,
            "field": repr(W.field),
            "finite": finite,
            "elements": len(elems),
            "hecke_max_length": hecke_len,
            "module_max_length": module_cap,
        },
        "config": cfg.describe(),
        "checks": checks,
        "passed": passed,
    }
    return report, EXIT_PASS if passed else EXIT_FAIL


def _campaign_tsv(report: dict) -> str:
    rows = []
    for name, c in report["checks"].items():
        rows.append((name, c["status"], str(c.get("count", 0)), c.get("reason", "") or ""))
    return _tsv(("check", "status", "count", "reason"), rows)


def cmd_campaign(args) -> int:
    checks = tuple(ALL_CHECKS)
    if args.checks:
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
        unknown = [c for c in checks if c not in ALL_CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; choose from {list(ALL_CHECKS)}")
    if args.max_length is not None and args.max_length < 0:
        raise ConfigError("--max-length must be >= 0")
    cfg = CampaignConfig(
        preset=args.preset,
        matrix_file=args.matrix_file,
        max_length=args.max_length,
        zeta_grid=parse_grid(args.zeta_grid),
        seed=args.seed,
        checks=checks,
        out=args.out,
        format=args.format,
    )
    report, code = run_campaign(cfg)
    _emit(_campaign_tsv(report) if args.format == "tsv" else _json(report), args.out)
    return code


# -- argument parsing -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="named group: A1-A4, B2, B3, I2(m), H3, Atilde1, ...")
    common.add_argument("--matrix-file", help="JSON file with rank, entries, mode, field, alpha, alphavee, rho")
    common.add_argument("--max-length", type=int, default=None, help="largest element length considered")
    common.add_argument("--zeta-grid", default=None, help="comma-separated nonnegative rationals")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--checks", default=None, help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
    common.add_argument("--out", default=None, help="write the report to this file")
    common.add_argument("--format", choices=("json", "tsv"), default=None)

    p = argparse.ArgumentParser(prog="soergelkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("kl", parents=[common], help="Kazhdan-Lusztig polynomials h_{y,w}")
    sub.add_parser("inverse-kl", parents=[common], help="inverse Kazhdan-Lusztig coefficients g_{y,w}")
    for name, text in (("mu", "structure constants of the KL basis"), ("unimodality", "quantum integer decomposition of mu")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--x", default=None, help="restrict to one left factor (a word)")
        sp.add_argument("--y", default=None, help="restrict to one right factor (a word)")
    sp = sub.add_parser("decompose", parents=[common], help="decompose BS(word) into indecomposables")
    sp.add_argument("word")
    sp = sub.add_parser("verify", parents=[common], help="hard Lefschetz, Hodge-Riemann or zeta sweep")
    sp.add_argument("what", choices=("hl", "hr", "sweep"))
    sp.add_argument("--element", default=None, help="only this element (a word)")
    sp = sub.add_parser("rouquier", parents=[common], help="homology of the Rouquier complex of a word")
    sp.add_argument("word")
    sub.add_parser("campaign", parents=[common], help="run every selected check")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        if args.command == "campaign":
            return cmd_campaign(args)
        W, name = load_system(
            CampaignConfig(preset=args.preset, matrix_file=args.matrix_file, max_length=args.max_length)
        )
        if args.command == "kl":
            return cmd_kl(args, W)
        if args.command == "inverse-kl":
            return cmd_inverse_kl(args, W)
        if args.command == "mu":
            return cmd_mu(args, W)
        if args.command == "unimodality":
            return cmd_unimodality(args, W)
        if args.command == "decompose":
            return cmd_decompose(args, W)
        if args.command == "verify":
            return cmd_verify(args, W, name)
        return cmd_rouquier(args, W)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
