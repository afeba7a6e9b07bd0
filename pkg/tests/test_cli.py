import json

import pytest

from nonlocal_parabolic.cli import fmt, main
from nonlocal_parabolic.config import ConfigError, ExperimentConfig, from_dict, load_config


def write(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return p


def test_defaults_validate():
    cfg = ExperimentConfig().validate()
    assert cfg.criteria == (1, 2, 3, 4, 5, 6, 7, 8, 9)


def test_error_names_field_path():
    with pytest.raises(ConfigError) as exc:
        from_dict({"alphas": [1.5, 2.5]})
    assert exc.value.path == "alphas[1]"
    with pytest.raises(ConfigError) as exc:
        from_dict({"kernel": {"lam": "big"}})
    assert exc.value.path == "kernel.lam"
    with pytest.raises(ConfigError) as exc:
        from_dict({"grid": {"mesh": 0.1}})
    assert exc.value.path == "grid.mesh"


def test_unknown_scenario():
    with pytest.raises(ConfigError, match="scenario"):
        from_dict({"scenario": "everything"})


def test_load_config_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "alphas = [1.5,"))


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(float("inf")) == "inf"
    assert fmt(3) == "3"


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = write(tmp_path, "alphas = [0.1]\n")
    assert main(["run", str(p)]) == 2
    assert "alphas[0]" in capsys.readouterr().err


def test_cli_membership_scenario(tmp_path):
    p = write(tmp_path, 'scenario = "membership"\n[membership]\nalphas = [1.0, 1.5]\ncone_alphas = [1.5]\n')
    out = tmp_path / "out"
    assert main(["run", str(p), "--out", str(out)]) == 0
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "criterion,name,metric,value,threshold,passed"
    assert {line.split(",")[0] for line in summary[1:]} == {"2", "3"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert [c["id"] for c in manifest["criteria"]] == [2, 3]
    assert "alpha_1.5/constants.csv" in manifest["files"]
    assert "time" not in (out / "manifest.json").read_text()


def test_cli_failure_exit_code(tmp_path, capsys):
    # an unattainable threshold makes criterion 3 fail and the CLI report it
    p = write(tmp_path, 'scenario = "membership"\n[membership]\nalphas = [1.0]\ncone_alphas = [1.5]\n[thresholds]\noperator_tol = 1e-6\n')
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 1
    assert "3 (operator consistency)" in capsys.readouterr().err
