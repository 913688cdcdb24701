import csv
import json
import subprocess
import sys

import pytest

from vertexfusion import cli


def run_cli(tmp_path, config, name="out", extra=()):
    cfg = tmp_path / f"{name}.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / name
    code = cli.main(["--config", str(cfg), "--out", str(out), *extra])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_algebra_info(tmp_path):
    code, rep, _ = run_cli(tmp_path, {"command": "algebra-info", "algebra": "sl3"})
    assert code == 0 and rep["passed"]
    assert rep["results"]["dimension"] == 8 and rep["results"]["dual_coxeter"] == "3"
    assert rep["provenance"]["normalization"] == "trace form, (theta, theta) = 2"


def test_module_build_csv_matches_json(tmp_path):
    code, rep, out = run_cli(tmp_path, {"command": "module-build", "depth": 3, "weights": [[0], [1]]})
    assert code == 0
    rows = list(csv.DictReader((out / "graded_dims.csv").open()))
    for m, entry in enumerate(rep["results"]["modules"]):
        dims = [int(r["dimension"]) for r in rows if int(r["module"]) == m]
        assert dims == entry["graded_dims"]
    assert rep["results"]["modules"][0]["graded_dims"] == [1, 3, 9, 22]


def test_sugawara_check_and_provenance(tmp_path):
    code, rep, out = run_cli(tmp_path, {"command": "sugawara-check", "depth": 3, "weights": [[1]]})
    assert code == 0
    assert rep["results"]["central_charge"] == "9"
    assert rep["results"]["lowest_conformal_weight"] == "-3/4"
    assert rep["provenance"] == {"algebra": "sl2", "normalization": "trace form, (theta, theta) = 2", "field": "rational",
                                 "kappa": "-1", "level": "-3", "seed": 0}
    assert (out / "spectrum.csv").read_text().splitlines()[0] == "depth,eigenvalue,multiplicity,semisimple"


def test_generic_sugawara(tmp_path):
    code, rep, _ = run_cli(tmp_path, {"command": "sugawara-check", "field": "generic",
                                      "kappa": "generic", "depth": 2})
    assert code == 0
    assert rep["results"]["central_charge"] == "(3*kappa - 6)/kappa"


@pytest.mark.filterwarnings("ignore:kappa")
def test_nonnegative_kappa_warning(tmp_path):
    code, rep, _ = run_cli(tmp_path, {"command": "module-build", "kappa": "2", "depth": 1})
    assert code == 0 and any("Q>=0" in w for w in rep["warnings"])


def test_fusion_compute(tmp_path):
    code, rep, out = run_cli(tmp_path, {"command": "fusion-compute", "depth": 1, "weights": [[0], [1]]})
    assert code == 0
    assert rep["results"]["kl_dims"] == [2, 6]
    rows = list(csv.DictReader((out / "kl_dims.csv").open()))
    assert [int(r["dimension"]) for r in rows] == [2, 6]


def test_fusion_verify_jobs_deterministic(tmp_path):
    conf = {"command": "fusion-verify", "depth": 1, "weights": [[0], [1]]}
    code1, rep1, out1 = run_cli(tmp_path, conf, "a")
    code2, _, out2 = run_cli(tmp_path, conf, "b", ("--jobs", "2"))
    assert code1 == code2 == 0 and rep1["results"]["equal"]
    for name in ("report.json", "fusion_dims.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_compat_check_seed_override(tmp_path):
    conf = {"command": "compat-check", "depth": 1, "weights": [[0], [1]], "samples": 4}
    code, rep, out = run_cli(tmp_path, conf, "a", ("--seed", "5"))
    assert code == 0 and rep["results"]["disagreements"] == 0 and rep["provenance"]["seed"] == 5
    _, _, again = run_cli(tmp_path, conf, "b", ("--seed", "5"))
    assert (out / "report.json").read_bytes() == (again / "report.json").read_bytes()


@pytest.mark.parametrize("conf", [
    {"command": "sugawara-check", "depth": 99},
    {"command": "nope"},
    {"command": "module-build", "depth": -1},
    {"command": "module-build", "z": "0"},
    {"command": "module-build", "kappa": "x/y"},
    {"command": "fusion-compute", "depth": 1, "weights": [[0], [1], [1]]},
    {"command": "fusion-compute", "depth": 1, "modules": [{"lowest": {"type": "generalized"}}]},
    {"command": "algebra-info", "algebra": {"dimension": 1, "brackets": [[0, 0, 0, "1"]], "form": [[0, 0, "1"]]}},
])
def test_config_errors_exit_2(tmp_path, conf):
    code, rep, _ = run_cli(tmp_path, conf)
    assert code == 2 and rep is None


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["--config", str(tmp_path / "missing.json")]) == 2


def test_failed_check_exit_1(tmp_path, monkeypatch):
    def broken(ops, states, modes):
        raise AssertionError("translation identity fails at mode 0")
    monkeypatch.setattr(cli, "check_translation", broken)
    code, rep, _ = run_cli(tmp_path, {"command": "voa-check", "depth": 2, "samples": 3})
    assert code == 1 and not rep["passed"]
    bad = [c for c in rep["checks"] if not c["passed"]]
    assert bad[0]["name"] == "translation[0]" and "mode 0" in bad[0]["detail"]


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "algebra-info"}))
    res = subprocess.run([sys.executable, "-m", "vertexfusion.cli", "--config", str(cfg),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and "algebra-info: passed" in res.stdout
