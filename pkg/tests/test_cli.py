from __future__ import annotations

import json

import pytest

from soergelkit.cli import ALL_CHECKS, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main


def run(tmp_path, *argv, name="out.txt"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def tsv_rows(text):
    header, *rows = text.strip().split("\n")
    keys = header.split("\t")
    return [dict(zip(keys, r.split("\t"))) for r in rows]


# -- Hecke subcommands ------------------------------------------------------------------


def test_kl_table(tmp_path):
    code, text = run(tmp_path, "kl", "--preset", "A2")
    assert code == EXIT_PASS
    rows = tsv_rows(text)
    assert len(rows) == 19  # sum over w of |{y <= w}| = 1 + 2 + 2 + 4 + 4 + 6
    table = {(r["y"], r["w"]): r["polynomial"] for r in rows}
    assert table[("e", "s1s2s1")] == "3:1"
    assert table[("s1s2", "s1s2s1")] == "1:1"


def test_kl_json(tmp_path):
    code, text = run(tmp_path, "kl", "--preset", "B2", "--format", "json")
    data = json.loads(text)
    assert code == EXIT_PASS and {"y", "w", "polynomial"} <= set(data[0])


def test_mu_single_pair(tmp_path):
    code, text = run(tmp_path, "mu", "--preset", "A2", "--x", "1", "--y", "1", "--format", "json")
    assert code == EXIT_PASS
    assert json.loads(text) == [{"x": "s1", "y": "s1", "z": "s1", "polynomial": "-1:1,1:1"}]


def test_unimodality_on_B2(tmp_path):
    code, text = run(tmp_path, "unimodality", "--preset", "B2")
    assert code == EXIT_PASS
    rows = tsv_rows(text)
    assert rows and all(r["quantum_decomposition"] != "FAIL" for r in rows)


def test_inverse_kl(tmp_path):
    code, text = run(tmp_path, "inverse-kl", "--preset", "A2")
    table = {(r["y"], r["w"]): r["polynomial"] for r in tsv_rows(text)}
    assert code == EXIT_PASS
    assert table[("s1", "s1")] == "0:1"
    assert table[("e", "s1")] == "1:-1"


def test_infinite_group_needs_a_length_bound(tmp_path):
    assert main(["kl", "--preset", "Atilde1"]) == EXIT_CONFIG
    code, text = run(tmp_path, "kl", "--preset", "Atilde1", "--max-length", "3")
    assert code == EXIT_PASS and len(tsv_rows(text)) > 0


# -- module subcommands ------------------------------------------------------------------


def test_decompose(tmp_path):
    code, text = run(tmp_path, "decompose", "--preset", "A2", "1,1")
    rep = json.loads(text)
    assert code == EXIT_PASS and rep["match"]
    assert rep["found"] == {"s1": {"-1": 1, "1": 1}}


def test_rouquier(tmp_path):
    code, text = run(tmp_path, "rouquier", "--preset", "A2", "1,2,1")
    rep = json.loads(text)
    assert code == EXIT_PASS
    assert rep["homology"] == {"0": {"3": 1}} == rep["expected"]


def test_rouquier_non_reduced(tmp_path):
    code, text = run(tmp_path, "rouquier", "--preset", "A2", "1,1")
    rep = json.loads(text)
    assert code == EXIT_PASS and rep["expected"] is None


@pytest.mark.parametrize("what", ["hl", "hr", "sweep"])
def test_verify(tmp_path, what):
    code, text = run(tmp_path, "verify", what, "--preset", "A2", "--element", "1,2")
    assert code == EXIT_PASS
    reports = json.loads(text)
    assert reports and all(r.get("passed", True) for r in reports)


def test_verify_reports_signatures(tmp_path):
    _, text = run(tmp_path, "verify", "hr", "--preset", "B2")
    reports = json.loads(text)
    assert len(reports) == 8
    assert all(r["verdicts"]["hodge_riemann"] for r in reports)


# -- configuration errors -------------------------------------------------------------------


def test_bad_matrix_exits_with_config_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rank": 2, "entries": [[3, 3], [3, 1]]}))
    assert main(["campaign", "--matrix-file", str(bad)]) == EXIT_CONFIG


def test_matrix_file_round_trip(tmp_path):
    good = tmp_path / "a2.json"
    good.write_text(json.dumps({"rank": 2, "entries": [[1, 3], [3, 1]], "mode": "geometric"}))
    code, text = run(tmp_path, "campaign", "--matrix-file", str(good), "--checks", "coxeter,hecke")
    assert code == EXIT_PASS and json.loads(text)["group"]["elements"] == 6


@pytest.mark.parametrize(
    "argv",
    [
        ["campaign", "--preset", "A2", "--checks", "nonsense"],
        ["campaign", "--preset", "A2", "--zeta-grid", "-1"],
        ["campaign", "--preset", "A2", "--max-length", "-2"],
        ["campaign", "--preset", "Z9"],
        ["campaign"],
        ["decompose", "--preset", "A2", "1,7"],
        ["decompose", "--preset", "Atilde1", "1,2"],
        ["nosuchcommand"],
    ],
)
def test_configuration_errors(argv):
    assert main(argv) == EXIT_CONFIG


# -- campaigns ----------------------------------------------------------------------------------


def test_campaign_A2_passes(tmp_path):
    code, text = run(tmp_path, "campaign", "--preset", "A2")
    rep = json.loads(text)
    assert code == EXIT_PASS and rep["passed"]
    assert set(rep["checks"]) == set(ALL_CHECKS)
    assert all(c["status"] == "pass" for c in rep["checks"].values())


def test_campaign_infinite_group_skips_module_checks(tmp_path):
    code, text = run(tmp_path, "campaign", "--preset", "Atilde1", "--max-length", "8", "--checks", "hecke")
    rep = json.loads(text)
    assert code == EXIT_PASS
    assert rep["checks"]["hecke"]["status"] == "pass"
    for check in ("soergel", "hodge", "sweep", "rouquier"):
        assert rep["checks"][check] == {"status": "skipped", "count": 0, "reason": "infinite group"}
    assert rep["checks"]["coxeter"]["reason"] == "not selected"


def test_every_skip_has_a_reason(tmp_path):
    _, text = run(tmp_path, "campaign", "--preset", "B2", "--checks", "coxeter,rouquier")
    for c in json.loads(text)["checks"].values():
        if c["status"] == "skipped":
            assert c["reason"]


def test_campaign_is_deterministic(tmp_path):
    argv = ["campaign", "--preset", "B2", "--seed", "7", "--zeta-grid", "0,1/2,4"]
    run(tmp_path, *argv, name="a.json")
    run(tmp_path, *argv, name="b.json")
    a, b = (tmp_path / "a.json").read_bytes(), (tmp_path / "b.json").read_bytes()
    assert a == b
    assert json.loads(a)["config"]["zeta_grid"] == ["0", "1/2", "4"]


def test_campaign_tsv(tmp_path):
    code, text = run(tmp_path, "campaign", "--preset", "A2", "--checks", "hecke", "--format", "tsv")
    rows = {r["check"]: r for r in tsv_rows(text)}
    assert code == EXIT_PASS
    assert rows["hecke"]["status"] == "pass"
    assert rows["soergel"]["reason"] == "not selected"


def test_failing_campaign_exit_code(monkeypatch, tmp_path):
    import soergelkit.cli as cli

    monkeypatch.setattr(cli, "campaign_hecke", lambda W, elems: cli.CheckResult("fail", failures=[{"x": 1}]))
    code, text = run(tmp_path, "campaign", "--preset", "A2", "--checks", "hecke")
    assert code == EXIT_FAIL and not json.loads(text)["passed"]
