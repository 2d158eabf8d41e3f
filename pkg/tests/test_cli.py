import csv
import json

import numpy as np
import pytest

from sfrc import cli, config as config_mod, corranalysis as ca, microgen
from sfrc.errors import ConfigError
from sfrc.manifest import load_manifest, sha256_file

SMALL = """
seed = 3
workers = 1
realizations = 2
windows = [100]

[generation]
domain_um = 300
target_fraction = 0.15

[microgen]
count = 2

[elementsize]
h_um = [10.0, 5.0]
window_um = 100

[influence]
scenarios = ["fixed", "fraction"]

[corr]
windows = [100]
"""


@pytest.fixture
def small_config(tmp_path, monkeypatch):
    monkeypatch.delenv(config_mod.OUT_ENV, raising=False)
    path = tmp_path / "run.toml"
    path.write_text(SMALL)
    return path


def run(args, config, out):
    return cli.main([*args, "--config", str(config), "--out", str(out)])


def check_manifest(out, command):
    m = load_manifest(out / f"manifest-{command}.json")
    assert m["status"] == "complete"
    assert m["outputs"]
    for rel, digest in m["outputs"].items():
        assert sha256_file(out / rel) == digest
    return m


def test_analytic_quick(small_config, tmp_path):
    out = tmp_path / "o"
    assert run(["analytic", "--quick", "--model", "tandon-weng", "--vary", "length"],
               small_config, out) == 0
    files = {p.name for p in (out / "analytic").iterdir()}
    assert {"constants.csv", "matrices_plane_stress.csv", "sweep_tandon_weng_length_plane_stress.csv",
            "sweep_tandon_weng_length_plane_stress.json"} <= files
    rows = list(csv.DictReader(open(out / "analytic" / "constants.csv")))
    assert rows[0]["model"] == "tandon_weng"
    data = np.loadtxt(out / "analytic" / "sweep_tandon_weng_length_plane_stress.csv",
                      delimiter=",", skiprows=1)
    assert data.shape[0] == cli.QUICK_SAMPLES
    check_manifest(out, "analytic")


def test_analytic_seed_replay(small_config, tmp_path):
    args = ["analytic", "--quick", "--vary", "diameter", "--model", "halpin-tsai"]
    assert run(args, small_config, tmp_path / "a") == 0
    assert run(args, small_config, tmp_path / "b") == 0
    ma = load_manifest(tmp_path / "a" / "manifest-analytic.json")["outputs"]
    mb = load_manifest(tmp_path / "b" / "manifest-analytic.json")["outputs"]
    assert ma == mb


def test_microgen(small_config, tmp_path):
    out = tmp_path / "o"
    assert run(["microgen"], small_config, out) == 0
    summary = json.loads((out / "microgen" / "summary.json").read_text())
    assert len(summary) == 2 and summary[0]["seed"] != summary[1]["seed"]
    m = microgen.load(out / "microgen" / summary[0]["file"])
    assert m.width == 300
    assert m.achieved_volume_fraction == pytest.approx(summary[0]["achieved_volume_fraction"])
    assert summary[0]["achieved_volume_fraction"] >= 0.15
    assert not summary[0]["fixed_orientation"]
    check_manifest(out, "microgen")


def test_elementsize(small_config, tmp_path):
    out = tmp_path / "o"
    assert run(["elementsize", "--quick"], small_config, out) == 0
    rows = list(csv.DictReader(open(out / "elementsize" / "elementsize_100.csv")))
    assert [(r["bc_kind"], float(r["h_um"])) for r in rows] == [
        ("kubc", 10.0), ("subc", 10.0), ("kubc", 5.0), ("subc", 5.0)]
    for r in rows:
        assert float(r["C11_GPa"]) > float(r["C22_GPa"])
    assert not list((out / "elementsize").glob("*.partial"))
    check_manifest(out, "elementsize")


def test_influence_and_corr(small_config, tmp_path):
    out = tmp_path / "o"
    assert run(["influence", "--quick"], small_config, out) == 0
    rows = list(csv.DictReader(open(out / "influence" / "influence_plane_stress.csv")))
    assert {r["scenario"] for r in rows} == {"fixed", "fraction"}
    assert len(rows) == 2 * 2 * 9
    check_manifest(out, "influence")

    assert run(["corr", "--quick"], small_config, out) == 0
    table = ca.CoefficientTable.from_csv(out / "corr" / "plane_stress_100_table.csv")
    assert table.values.shape == (2, 33, 2, 3, 3)
    red = json.loads((out / "corr" / "plane_stress_100_reduction.json").read_text())
    assert "max_swap_deviation" in red
    m = check_manifest(out, "corr")
    assert len(m["seeds"]["corr_100"]) == 2


def test_env_overrides_out(small_config, tmp_path, monkeypatch):
    env_out = tmp_path / "from_env"
    monkeypatch.setenv(config_mod.OUT_ENV, str(env_out))
    assert run(["analytic", "--quick", "--vary", "length", "--model", "tandon-weng"],
               small_config, tmp_path / "flag") == 0
    assert (env_out / "manifest-analytic.json").exists()
    assert not (tmp_path / "flag").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("unknown_key = 1\n")
    assert cli.main(["analytic", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_domain_error_exit_code(tmp_path, monkeypatch):
    monkeypatch.delenv(config_mod.OUT_ENV, raising=False)
    cfg = tmp_path / "c.toml"
    cfg.write_text("[generation]\ndomain_um = 200\n[corr]\nwindows = [100]\n")
    code = cli.main(["corr", "--quick", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert load_manifest(tmp_path / "o" / "manifest-corr.json")["status"] == "failed"


def test_jamming_exit_code(tmp_path, monkeypatch):
    monkeypatch.delenv(config_mod.OUT_ENV, raising=False)
    cfg = tmp_path / "c.toml"
    cfg.write_text("[generation]\ndomain_um = 100\ntarget_fraction = 0.35\nmax_rejections = 50\n"
                   "[microgen]\nlength_um = 135.0\ndiameter_um = 5.0\norientation_deg = 45.0\n")
    assert cli.main(["microgen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_usage_error_from_argparse():
    with pytest.raises(SystemExit) as exc:
        cli.main(["analytic", "--state", "3d"])
    assert exc.value.code == 2


def test_load_config_layers(tmp_path, monkeypatch):
    monkeypatch.delenv(config_mod.OUT_ENV, raising=False)
    path = tmp_path / "c.toml"
    path.write_text('seed = 5\nstate = "plane-strain"\n[phases.fiber]\nyoung_modulus = 70.0\n')
    cfg = config_mod.load_config(path, {"seed": 9, "workers": None})
    assert cfg.seed == 9
    assert cfg.state == "plane_strain"
    assert cfg.fiber_material().young_modulus == 70.0
    assert cfg.fiber_material().poisson_ratio == 0.22
    assert cfg.workers >= 1


@pytest.mark.parametrize("text", ["", "seed = -1\n", "[mesh]\nh = 3\n", 'state = "3d"\n',
                                  "[phases.matrix]\npoisson_ratio = 0.7\n", "seed = [\n",
                                  "[analytic]\nmodels = [\"mori\"]\n"])
def test_invalid_configs(tmp_path, text):
    path = tmp_path / "c.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        config_mod.load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        config_mod.load_config(tmp_path / "nope.toml")
