import json
from fractions import Fraction

import pytest

from glgamma import cli
from glgamma.scalars import cyclo_field
from glgamma.suites import Row, RunConfig, SuiteReport, jsonable, run_suite


def test_run_config_validation():
    RunConfig(p=3, case="levi").validate()
    for bad in [dict(p=3, m=1, case="galois"), dict(p=2, case="levi"), dict(p=3, ells=((3, None),)),
                dict(p=3, m=2, case="galois", k0_degree=2), dict(convention="other")]:
        with pytest.raises(ValueError):
            RunConfig(**bad).validate()


def test_jsonable_is_exact():
    x = cyclo_field(12).zeta(1) * Fraction(1, 3)
    assert jsonable({"x": x, "f": Fraction(1, 2), "b": True}) == {"x": x.to_json(), "f": "1/2", "b": True}
    with pytest.raises(TypeError):
        jsonable({"x": 0.5})


def test_nongating_rows_do_not_fail_a_report():
    rep = SuiteReport("s", [Row("a", "x", True), Row("b", "y", False, gating=False)])
    assert rep.ok()
    assert rep.as_dict()["rows"][1]["status"] == "fail-nongating"
    assert not SuiteReport("s", [Row("a", "x", False)]).ok()


def test_verify_is_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        code = cli.main(["verify", "congruence", "--out", str(tmp_path / f"r{i}")])
        assert code == 0
        outs.append((tmp_path / f"r{i}.json").read_bytes())
    assert outs[0] == outs[1]
    tsv = (tmp_path / "r0.tsv").read_text().splitlines()
    assert tsv[0] == "check\tanchor\tstatus"
    assert all(line.split("\t")[1] for line in tsv[1:])
    d = json.loads(outs[0])
    assert d["ok"] and d["rows"]


def test_parallel_rows_match_serial():
    a = run_suite("congruence", RunConfig())
    b = run_suite("congruence", RunConfig(jobs=2))
    assert [r.as_dict() for r in a.rows] == [r.as_dict() for r in b.rows]


def test_unknown_suite_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nope"])
    assert exc.value.code == 2


def test_inconsistent_config_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["table", "--p", "2", "--case", "levi"])
    assert exc.value.code == 2


def test_table_command(tmp_path, capsys):
    assert cli.main(["table", "--p", "3", "--n", "2", "--cache-dir", str(tmp_path)]) == 0
    first = json.loads(capsys.readouterr().out)
    assert first["summary"]["irreducibles"] == 8
    assert first["summary"]["cuspidal"] == 3
    assert (tmp_path / first["cache_file"].split("/")[-1]).exists()
    assert cli.main(["table", "--p", "3", "--n", "2", "--cache-dir", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["checksum"] == first["summary"]["checksum"]


def test_gl1_f9_table(capsys):
    assert cli.main(["table", "--p", "3", "--m", "2", "--n", "1", "--case", "galois"]) == 0
    s = json.loads(capsys.readouterr().out)["summary"]
    assert s["irreducibles"] == 8
    assert s["distinguished"] == 4


def test_budget_error_names_the_bound(capsys):
    assert cli.main(["table", "--p", "7", "--n", "3", "--budget-elems", "1000"]) == 3
    err = capsys.readouterr().err
    assert "1000" in err and "33784128" in err


def test_environment_overrides(monkeypatch, capsys):
    monkeypatch.setenv("GLGAMMA_P", "2")
    monkeypatch.setenv("GLGAMMA_N", "3")
    assert cli.main(["table"]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["irreducibles"] == 6


def test_gamma_rows_cross_check(tmp_path, capsys):
    out = str(tmp_path / "g")
    assert cli.main(["gamma", "--p", "3", "--n", "2", "--case", "levi", "--ell", "2", "--out", out]) == 0
    d = json.loads((tmp_path / "g.json").read_text())
    assert len(d["rows"]) == 3 * 2
    for row in d["rows"]:
        w = row["witness"]
        assert w["cross_check"]["agrees"]
        assert w["psi_covariance"]["failing_a"] == []
        assert "l2:s0" in w["reductions"]


def test_gamma_of_distinguished_levi_cuspidal_is_a_sign():
    from glgamma.chartable import character_table
    from glgamma.groups import GroupContext

    T = character_table(GroupContext(3, 1, 2, "levi"))
    dist = [i for i in range(T.count) if T.cuspidal[i] and T.hom_H_dim(i)]
    assert dist
    cfg = RunConfig(p=3, n=2, case="levi")
    cfg.mm = 1
    rep = cli.cmd_gamma(cfg, dist, ["0"])
    assert rep.ok() and len(rep.rows) == len(dist)
    for row in rep.rows:
        assert row.witness["value"] in (1, -1)


def test_gamma_higher_rank_partner(capsys):
    assert cli.main(["gamma", "--p", "2", "--n", "3", "--mm", "2", "--partner", "ones"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(line.endswith("pass") for line in lines[1:])


def test_gamma_invalid_pair(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["gamma", "--p", "3", "--n", "2", "--mm", "2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["gamma", "--p", "3", "--n", "2", "--pi", "0"])
