import json
import subprocess
import sys

import pytest

from shrinkerlab import __version__, cli


def run(tmp_path, *argv):
    return cli.main([*argv, "--output-dir", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_moments(tmp_path, capsys):
    assert run(tmp_path, "moments", "--max-degree", "6") == 0
    doc = load(tmp_path, "moments.json")
    assert doc["version"] == __version__
    assert doc["config"]["max_degree"] == 6
    assert sorted(r["exact"] for r in doc["results"]["table"]) == [1, 2, 4, 8, 12, 24, 120]


def test_al_solve_and_curve_check(tmp_path):
    assert run(tmp_path, "al-solve", "--p", "2", "--q", "3", "--n", "256") == 0
    doc = load(tmp_path, "al_2_3.json")
    assert doc["results"]["rotation_index"] == 2
    assert doc["results"]["B1_spread"] < 1e-6
    assert run(tmp_path, "curve-check", "--input", str(tmp_path / "al_2_3.csv")) == 0
    assert load(tmp_path, "curve_check.json")["results"]["shrinker_residual"] < 1e-10


def test_curve_check_fails_on_non_shrinker(tmp_path):
    from shrinkerlab import curve

    path = tmp_path / "c.csv"
    curve.write_csv(curve.circle(radius=1.5, n=64), path)
    assert run(tmp_path, "curve-check", "--input", str(path)) == 1


def test_spectrum_and_assumptions(tmp_path):
    assert run(tmp_path, "spectrum", "--curve", "circle", "--n", "128", "--count", "5") == 0
    vals = load(tmp_path, "spectrum_jacobi.json")["results"]["eigenvalues"]
    assert vals[0] == pytest.approx(1.0, abs=1e-9)
    assert (tmp_path / "eigenfunctions_jacobi.csv").exists()
    assert run(tmp_path, "verify-assumptions", "--curve", "al", "--n", "256") == 0


def test_obstruction(tmp_path):
    assert run(tmp_path, "obstruction", "--count", "100", "--cross-section", "sphere", "--k", "2") == 0
    assert load(tmp_path, "obstruction.json")["results"]["passed"]


def test_variation_and_usage_error(tmp_path):
    assert run(tmp_path, "variation-check", "--curve", "circle", "--n", "256", "--direction", "mode2") == 0
    assert run(tmp_path, "variation-check", "--curve", "circle", "--n", "256", "--direction", "spin") == 2


def test_lojasiewicz(tmp_path):
    assert run(tmp_path, "lojasiewicz", "--directions", "8", "--amplitudes", "4") == 0
    assert (tmp_path / "lojasiewicz_scatter.csv").exists()


def test_flow(tmp_path):
    assert run(tmp_path, "flow", "--modes", "2", "--amp", "1e-2", "--steps", "3000") == 0
    doc = load(tmp_path, "flow.json")
    assert doc["results"]["rates"]["2"]["fitted"] == pytest.approx(-1.0, abs=0.05)
    assert (tmp_path / "trajectory.csv").read_text().startswith("# {")


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dt": 2e-3, "steps": 50}))
    assert run(tmp_path, "flow", "--config", str(cfg), "--steps", "40") == 0
    doc = load(tmp_path, "flow.json")
    assert doc["config"]["dt"] == 2e-3 and doc["config"]["steps"] == 40
    cfg.write_text(json.dumps({"dt": 2e-3, "warp": 9}))
    assert run(tmp_path, "flow", "--config", str(cfg)) == 2


def test_unknown_flag_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "moments", "--bogus")
    assert info.value.code == 2


def test_inadmissible_curve_exit_2(tmp_path):
    assert run(tmp_path, "al-solve", "--p", "1", "--q", "2") == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["moments"]) == 0
    assert (tmp_path / "env" / "moments.json").exists()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "shrinkerlab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == __version__
