import json
import subprocess
import sys

import pytest

from nadyn.cli import main
from nadyn.scenario import CHECKS, ConfigError, parse_config, run_scenario, write_report
from nadyn.zoo import zoo_names

ALL_CHECKS = [
    "expansive", "generator", "limits", "converging", "aperiodicity", "nonwandering",
    "transitive", "shadowing", "persistence", "stability", "walters",
    "conjugacy-invariance", "inverse-invariance", "power-invariance", "thm510",
]


def base(**overrides):
    cfg = {
        "schema_version": 1,
        "system": {"zoo": "cat", "params": {"q": 5}},
        "N": 4,
        "eps": "2/5",
        "delta": "1/5",
        "trials": 4,
        "seed": 0,
        "checks": [],
    }
    cfg.update(overrides)
    return cfg


def write(tmp_path, cfg, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_check_names_are_complete():
    assert sorted(CHECKS) == sorted(ALL_CHECKS)


def test_empty_checks_give_empty_body():
    run = run_scenario(base())
    assert run.report["checks"] == [] and run.exit_code == 0
    assert run.report["echo"]["resolved"]["space"] == "torus2d(5)"


def test_cat_walters_passes(tmp_path, capsys):
    path = write(tmp_path, base(checks=[{"name": "walters", "expect": "must-pass"}]))
    assert main(["run", path]) == 0
    report = json.loads(capsys.readouterr().out)
    check = report["checks"][0]
    assert check["verdict"] is True and check["expectation_met"] is True
    assert check["result"]["e"] == "1/5"


def test_rotation_expansive_reports_ball_inside_dynamical_ball():
    cfg = base(system={"zoo": "rotation", "params": {"q": 5}}, checks=["expansive"])
    check = run_scenario(cfg).report["checks"][0]
    assert check["verdict"] is False
    assert check["result"]["ball_inside_dynamical_ball"]
    assert all(check["result"]["ball_inside_dynamical_ball"].values())


def test_must_pass_failure_exits_1(tmp_path):
    cfg = base(checks=[{"name": "aperiodicity", "expect": "must-pass"}])
    assert main(["run", write(tmp_path, cfg)]) == 1
    ok = base(checks=[{"name": "aperiodicity", "expect": "must-fail"}])
    assert main(["run", write(tmp_path, ok, "ok.json")]) == 0
    plain = base(checks=["aperiodicity"])
    assert main(["run", write(tmp_path, plain, "plain.json")]) == 0


@pytest.mark.parametrize(
    "cfg,path",
    [
        (base(schema_version=2), "schema_version"),
        (base(eps=0.4), "eps"),
        (base(checks=["nope"]), "checks[0].name"),
        (base(checks=[{"name": "shadowing", "expect": "maybe"}]), "checks[0].expect"),
        (base(bogus=1), "bogus"),
        (base(system={"zoo": "cat", "params": {}}), "system"),
        (base(N=0), "N"),
        (base(measure={"kind": "dirac"}), "measure"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, cfg, path):
    with pytest.raises(ConfigError) as info:
        parse_config(cfg)
    assert any(p.startswith(path) for p, _ in info.value.problems)
    assert main(["run", write(tmp_path, cfg)]) == 2
    assert f"config error at {path}" in capsys.readouterr().err


def test_sampled_check_needs_seed():
    cfg = base(checks=["persistence"])
    del cfg["seed"]
    with pytest.raises(ConfigError, match="needs a seed"):
        parse_config(cfg)
    cfg["checks"] = [{"name": "persistence", "params": {"seed": 3}}]
    parse_config(cfg)


def test_missing_and_malformed_files(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2


def test_replay_is_byte_identical(tmp_path):
    cfg = base(checks=ALL_CHECKS)
    a = write_report(run_scenario(cfg), tmp_path / "a")
    b = write_report(run_scenario(json.loads(a.read_text())["echo"]["config"]), tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*.csv"))
    assert files_a == files_b and files_a
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_check_order_does_not_change_verdicts():
    names = ["persistence", "expansive", "shadowing", "stability", "thm510"]
    fwd = run_scenario(base(checks=names)).report["checks"]
    rev = run_scenario(base(checks=names[::-1])).report["checks"]
    by_name = {c["name"]: (c["verdict"], c["result"]) for c in fwd}
    assert by_name == {c["name"]: (c["verdict"], c["result"]) for c in rev}


def test_workers_do_not_change_the_report():
    cfg = base(checks=["shadowing", "persistence", "walters"])
    assert run_scenario(cfg, workers=1).report_json() == run_scenario(cfg, workers=3).report_json()


def test_out_directory_layout(tmp_path, capsys):
    cfg = base(checks=["expansive", "stability"])
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, cfg), "--out", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "timings.json").exists()
    assert (out / "sets" / "00_expansive_witness_ball.csv").read_text().startswith("point,member\n")
    assert (out / "tables" / "00_expansive_masses.csv").read_text().startswith("delta,max_mass")
    assert "timings" not in json.loads((out / "report.json").read_text())


def test_custom_system_config():
    cfg = base(
        space={"kind": "circle", "q": 4},
        system={"prefix": [[1, 2, 3, 0]], "cycle": [[0, 1, 2, 3]]},
        measure={"kind": "weighted", "weights": ["1/2", "1/6", "1/6", "1/6"]},
        tau="1/6",
        checks=["limits", "transitive"],
    )
    run = run_scenario(cfg)
    assert run.report["echo"]["resolved"]["prefix_length"] == 1
    assert [c["name"] for c in run.report["checks"]] == ["limits", "transitive"]


def test_zoo_list(capsys):
    assert main(["zoo", "list"]) == 0
    out = capsys.readouterr().out
    for name in zoo_names():
        assert name in out


def test_zoo_dump(tmp_path, capsys):
    assert main(["zoo", "dump", "rotation", "q=4"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "segment,index,point,image"
    assert rows[1:] == ["cycle,0,0,1", "cycle,0,1,2", "cycle,0,2,3", "cycle,0,3,0"]
    target = tmp_path / "cat.csv"
    assert main(["zoo", "dump", "cat", "q=3", "--out", str(target)]) == 0
    assert len(target.read_text().splitlines()) == 1 + 9
    assert main(["zoo", "dump", "bogus"]) == 2
    assert main(["zoo", "dump", "cat"]) == 2
    assert main(["zoo", "dump", "cat", "q=x"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nadyn", "zoo", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "cat" in proc.stdout
