import json
import os

import pytest

from elliptica import cli


def _load(out):
    with open(os.path.join(out, "report.json")) as fh:
        return json.load(fh)


def test_unknown_experiment_rejected():
    with pytest.raises(ValueError, match="E1, E2"):
        cli.ExperimentConfig("E99")


def test_nonpositive_param_rejected():
    with pytest.raises(ValueError, match="positive"):
        cli.ExperimentConfig("E1", {"n_random": -3})


def test_e1_report_schema(tmp_path):
    out = str(tmp_path / "run1")
    rep = cli.run(cli.ExperimentConfig("E1", {}, out))
    assert rep.all_pass
    doc = _load(out)
    assert doc["schema"] == 1
    assert doc["experiment"] == "E1"
    assert doc["all_pass"] is True
    assert all(c["status"] in ("pass", "fail", "info") for c in doc["checks"])
    assert "seconds" in doc["timing"]
    # declared artifacts exist next to the report
    for art in doc["artifacts"]:
        assert os.path.exists(os.path.join(out, art["path"]))


def test_report_deterministic_modulo_timing(tmp_path):
    docs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        cli.run(cli.ExperimentConfig("E1", {}, out))
        doc = _load(out)
        doc.pop("timing")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_main_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "m")
    code = cli.main(["run", "--experiment", "E1", "--out", out])
    assert code == 0
    printed = capsys.readouterr().out
    assert "[pass] E1" in printed
    assert cli.main(["run", "--experiment", "nope", "--out", out]) == 2


def test_config_file_and_override(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"params": {"n_random": 5}, "seed": 7}))
    cfg = cli.build_config(type("A", (), {
        "experiment": "E1", "config": str(cfgfile),
        "out": str(tmp_path / "o"), "override": ["n_random=9"]})())
    assert cfg.params["n_random"] == 9
    assert cfg.seed == 7


def test_exception_recorded_as_failed_check(tmp_path, monkeypatch):
    out = str(tmp_path / "boom")

    def explode(cfg, report, o):
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(cli._RUNNERS, "E1", explode)
    rep = cli.run(cli.ExperimentConfig("E1", {}, out))
    assert not rep.all_pass
    doc = _load(out)
    names = {c["name"]: c for c in doc["checks"]}
    assert names["exception"]["status"] == "fail"
    assert "synthetic failure" in names["exception"]["message"]
