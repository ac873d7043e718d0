import csv
import io
import json
import subprocess
import sys

import pytest

from cparticle import cli


def _run(argv, tmp_path, name="out"):
    out = tmp_path / name
    rc = cli.main([*argv, "--output", str(out)])
    return rc, out.read_text(encoding="utf-8")


def test_critdim_report(tmp_path):
    rc, text = _run(["critdim"], tmp_path)
    assert rc == 0
    rep = json.loads(text)
    assert rep["schema"] == cli.SCHEMA
    assert rep["summary"]["failed"] == 0
    by_id = {c["id"]: c for c in rep["checks"]}
    assert by_id["critdim.euclid"]["actual"] == [2, 4, 6]
    assert by_id["critdim.minkowski"]["actual"] == [4]


def test_every_check_has_a_reference(tmp_path):
    rc, text = _run(["coords", "--dims", "2,3", "--samples", "5"], tmp_path)
    assert rc == 0
    for c in json.loads(text)["checks"]:
        assert c["paper_ref"] in cli.REFS.values()
        assert set(c) >= {"id", "inputs", "expected", "actual", "residual", "pass", "tolerance"}


def test_deterministic(tmp_path):
    argv = ["lb", "--dims", "3", "--samples", "8", "--seed", "5"]
    assert _run(argv, tmp_path, "a")[1] == _run(argv, tmp_path, "b")[1]


def test_seed_changes_inputs(tmp_path):
    a = _run(["lb", "--dims", "3", "--samples", "8", "--seed", "5"], tmp_path, "a")[1]
    b = _run(["lb", "--dims", "3", "--samples", "8", "--seed", "6"], tmp_path, "b")[1]
    assert a != b


def test_env_seed_overrides_flag():
    _, cfg = cli.config_from_args(["critdim", "--seed", "3"], {"CP_SEED": "17"})
    assert cfg.seed == 17
    _, cfg = cli.config_from_args(["critdim", "--seed", "3"], {})
    assert cfg.seed == 3
    with pytest.raises(cli.ConfigError):
        cli.config_from_args(["critdim"], {"CP_SEED": "x"})


def test_dims_parsing():
    assert cli._dims("2-4") == [2, 3, 4]
    assert cli._dims("2,5..6") == [2, 5, 6]


def test_csv_and_text(tmp_path):
    rc, text = _run(["critdim", "--format", "csv"], tmp_path, "c")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rc == 0 and rows and all(r["pass"] == "1" for r in rows)
    rc, text = _run(["critdim", "--format", "text"], tmp_path, "t")
    assert rc == 0 and "PASS" in text and "FAIL" not in text


@pytest.mark.parametrize("argv", [["critdim", "--dims", "1"], ["critdim", "--ell-max", "-1"],
                                  ["critdim", "--samples", "0"]])
def test_bad_config_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_dims_text_exits_2():
    with pytest.raises(SystemExit) as e:
        cli.main(["critdim", "--dims", "two"])
    assert e.value.code == 2


def test_failing_check_exit_1(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.EXPECTED_CRITICAL, "euclid", [2, 4])
    rc, text = _run(["critdim"], tmp_path)
    assert rc == 1
    assert json.loads(text)["summary"]["failed"] == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cparticle", "critdim", "--format", "text"],
                       capture_output=True, text=True, timeout=60)
    assert r.returncode == 0
    assert "critdim" in r.stdout
