import json

import pytest

from cuntzkit import cli
from cuntzkit import config as cfg
from cuntzkit import pipeline


def records(path):
    return {r["name"]: r for r in json.loads(path.read_text())}


def test_run_shift2(tmp_path, capsys):
    assert cli.main(["run", "shift2", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["ok"] and summary["config"] == "shift2"
    rec = records(tmp_path / "build-sections-4.json")["cuntz.isometry"]
    assert rec["defect"] == 0.0 and rec["exact"] and rec["pass"]
    assert "reports:" in capsys.readouterr().out


def test_run_product_expected_fail(tmp_path):
    assert cli.main(["run", "product-counterexample", "--out", str(tmp_path)]) == 0
    gen = records(tmp_path / "decompose-3.json")["generation.defect"]
    assert abs(gen["defect"] - 0.5) <= 1e-9
    assert gen["expected"] == "fail" and gen["label"] == "expected-fail-of-condition-4" and not gen["pass"]


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "shift2", "--seed", "11", "--out", str(a)]) == 0
    assert cli.main(["run", "shift2", "--seed", "11", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.glob("*.json"))
    assert names == sorted(p.name for p in b.glob("*.json"))
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_seed_is_recorded(tmp_path):
    cli.main(["run", "shift2", "--seed", "11", "--out", str(tmp_path)])
    assert json.loads((tmp_path / "summary.json").read_text())["seed"] == 11


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    text = cfg.shipped_configs()["shift2.cfg"].read_text().replace("sizes = [3, 4]", "sizes = [4, 3]")
    bad.write_text(text)
    assert cli.main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "truncation.sizes" in err and "line" in err
    assert cli.main(["run", "no-such-config"]) == 2


def test_tolerance_scale_can_fail_a_run(tmp_path):
    # scaling a 1e-8 tolerance to 1e-30 makes floating checks fail
    assert cli.main(["run", "circle2", "--tolerance-scale", "1e-22", "--out", str(tmp_path)]) == 1


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CUNTZKIT_OUT", str(tmp_path))
    assert cli.main(["run", "shift2"]) == 0
    assert (tmp_path / "shift2" / "summary.json").exists()


def test_symbolic_verb(tmp_path, capsys):
    f = tmp_path / "rel.txt"
    f.write_text("# relations\ns*[1] s[1] == 1\ns[1] s*[1] + s[2] s*[2] == 1\ns*[1] s[2]\n")
    assert cli.main(["symbolic", str(f), "--out", str(tmp_path)]) == 0
    recs = json.loads((tmp_path / "symbolic-rel.json").read_text())
    assert [r["line"] for r in recs] == [2, 3, 4]
    assert recs[2]["normal_form"] == "0"
    f.write_text("s[1] s*[1] == 1\n")
    assert cli.main(["symbolic", str(f)]) == 1
    f.write_text("s[1] + (\n")
    assert cli.main(["symbolic", str(f)]) == 2
    capsys.readouterr()


def test_study_verb(tmp_path):
    assert cli.main(["study", "shift2", "--check", "check_cuntz", "--values", "2,3,4", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "study-check_cuntz-size.json").read_text())
    assert [r["defect"] for r in data["rows"]] == [0.0, 0.0, 0.0]


# -- convergence studies -----------------------------------------------------------


def shipped(name):
    return cfg.load(cfg.shipped_configs()[name])


def test_study_exact_is_zero():
    st = pipeline.convergence_study(shipped("shift2.cfg"), "check_implements", values=[2, 3, 4, 5])
    assert st.defects == [0.0] * 4 and st.nonincreasing()


def test_study_circle_nonincreasing():
    st = pipeline.convergence_study(shipped("circle2.cfg"), "check_implements", values=[8, 16, 32])
    assert st.nonincreasing()
    assert max(st.defects) <= 1e-8


def test_study_blaschke_nodes():
    st = pipeline.convergence_study(shipped("blaschke.cfg"), "check_cuntz", parameter="nodes", values=[1024, 4096])
    assert st.defects[1] <= st.defects[0] <= 1e-6


def test_study_unknown_check():
    with pytest.raises((KeyError, ValueError)):
        pipeline.convergence_study(shipped("shift2.cfg"), "check_nothing", values=[2, 3])
