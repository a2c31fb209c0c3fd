import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from composite_fading.cli import Grid, PRESETS, UsageError, main, parse_fixed, parse_grid, parse_values, table_json
from composite_fading.composite import CompositeSpec, composite_envelope_pdf_numeric
from composite_fading.quadrature import ENV_TOL

KMU_ARGS = ["--model", "kmu-gamma", "--kappa", "1", "--mu", "2", "--b", "1.4", "--omega", "1.2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_grid():
    assert parse_grid("0:4:81") == Grid(0.0, 4.0, 81)
    for bad in ("1:1:1", "0:4:0", "0:4:1", "2:1:5", "-1:2:5", "a:b:c", "0:4"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_parse_values_and_fixed():
    assert parse_values("1, 2,4") == [1.0, 2.0, 4.0]
    assert parse_fixed("b=1.4,omega=1.2") == {"b": 1.4, "omega": 1.2}
    for f, text in ((parse_values, ""), (parse_values, "1,x"), (parse_fixed, "b"), (parse_fixed, "b=x")):
        with pytest.raises(UsageError):
            f(text)


def test_pdf_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "pdf", *KMU_ARGS, "--x", "0:3:7")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["x", "pdf_numeric", "pdf_series", "abs_diff"]
    data = np.array(rows[1:], dtype=float)
    assert data.shape == (7, 4)
    spec = CompositeSpec.kappa_mu_gamma(1.0, 2.0, 1.4, 1.2)
    np.testing.assert_array_equal(data[:, 1], composite_envelope_pdf_numeric(data[:, 0], spec).value)
    assert np.all(data[:, 3] < 1e-3)


def test_csv_json_roundtrip_is_bit_exact(capsys, tmp_path):
    csv_path, json_path = tmp_path / "t.csv", tmp_path / "t.json"
    assert main(["pdf", *KMU_ARGS, "--x", "0.05:3:13", "--out", str(csv_path)]) == 0
    assert main(["pdf", *KMU_ARGS, "--x", "0.05:3:13", "--format", "json", "--out", str(json_path)]) == 0
    from_csv = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    from_json = np.array(json.loads(json_path.read_text())["rows"])
    assert from_csv.tobytes() == from_json.tobytes()
    assert b"\r\n" not in csv_path.read_bytes()


def test_mean_square_has_no_series_column(capsys):
    code, out, _ = run(capsys, "pdf", *KMU_ARGS, "--compounding", "ms", "--x", "0.5:1:3")
    assert code == 0
    assert all(line.split(",")[2] == "nan" for line in out.splitlines()[1:])


@pytest.mark.parametrize("argv,msg", [
    (["pdf", "--model", "kmu-gamma", "--kappa", "1", "--mu", "-1", "--b", "1", "--omega", "1"], "mu must be positive"),
    (["pdf", *KMU_ARGS, "--x", "1:1:1"], "x grid"),
    (["pdf", "--model", "kmu-gamma", "--kappa", "1"], "--mu is required"),
    (["pdf", *KMU_ARGS, "--m", "1"], "does not take m"),
    (["sample", "--model", "gamma", "--b", "1", "--omega", "1", "--count", "0"], "count must be positive"),
    (["sweep", "--preset", "fig1", "--mu-values", "1,2"], "sweeps kappa"),
    (["sweep", "--model", "kmu-gamma"], "needs --preset"),
])
def test_usage_errors_exit_2(capsys, argv, msg):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert msg in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["pdf", "--model", "nope"])
    assert exc.value.code == 2


def test_bad_env_tolerance_exits_2(capsys, monkeypatch):
    monkeypatch.setenv(ENV_TOL, "abc")
    code, _, err = run(capsys, "pdf", *KMU_ARGS, "--x", "0:1:3")
    assert code == 2 and ENV_TOL in err


def test_env_tolerance_is_honored(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_TOL, "1e-6")
    assert main(["sweep", "--preset", "fig3", "--x", "0:2:5", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["quad"]["rel_tol"] == 1e-6


def test_sweep_presets(capsys, tmp_path):
    for name, preset in PRESETS.items():
        out = tmp_path / name
        assert main(["sweep", "--preset", name, "--x", "0:3:31", "--out", str(out)]) == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["fixed_params"] == preset["fixed"]
        assert man["swept_param"] == preset["swept"]
        assert man["swept_values"] == preset["values"]
        assert len(man["files"]) == len(preset["values"])
        for entry in man["files"]:
            assert (out / entry["file"]).exists()
    man = json.loads((tmp_path / "fig1" / "manifest.json").read_text())
    peaks = [f["argmax_x"] for f in man["files"]]
    assert peaks == sorted(peaks)


def test_sweep_custom_and_unwritable(capsys, tmp_path):
    out = tmp_path / "custom"
    argv = ["sweep", "--model", "kmu-extreme-gamma", "--fixed", "b=1.2,omega=0.8", "--swept-param", "m",
            "--swept-values", "0.5,1", "--x", "0:2:5", "--format", "json"]
    assert main(argv + ["--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["kmu-extreme-gamma_m=0.5.json", "kmu-extreme-gamma_m=1.json",
                                                      "manifest.json"]
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, *argv, "--out", str(blocker / "sub"))
    assert code == 2 and "cannot create output directory" in err


def test_sample_deterministic_and_pipeline(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    base = ["sample", *KMU_ARGS, "--count", "20000", "--seed", "4"]
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 20000
    code, out, _ = run(capsys, "validate", "--samples", str(a), *KMU_ARGS)
    assert code == 0
    assert json.loads(out)["passed"] is True
    code, out, err = run(capsys, "validate", "--samples", str(a), *KMU_ARGS[:-1], "2.4")
    assert code == 1 and "gof.samples" in err


def test_validate_samples_needs_model(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("1.0\n" * 10)
    assert main(["validate", "--samples", str(path)]) == 2
    code, _, err = run(capsys, "validate", "--samples", str(path), "--model", "gamma", "--b", "1", "--omega", "1")
    assert code == 2 and "at least" in err


@pytest.fixture(scope="module")
def selfcheck_report(tmp_path_factory):
    path = tmp_path_factory.mktemp("sc") / "report.json"
    code = main(["selfcheck", "--out", str(path)])
    return code, json.loads(path.read_text())


def test_selfcheck(selfcheck_report):
    code, report = selfcheck_report
    assert code == 0
    assert len(report["checks"]) >= 30
    assert all(c["passed"] for c in report["checks"] if c["gate"])


def test_injected_fault_fails(capsys, tmp_path):
    code, _, err = run(capsys, "selfcheck", "--inject-fault", "--out", str(tmp_path / "r.json"))
    assert code == 1
    assert "quad.exponential" in err


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "composite_fading", "--version"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert proc.stdout.startswith("composite-fading ")


def test_table_json_layout():
    text = table_json(np.array([[0.0, 1.0, 2.0, 3.0]]), {"a": 1})
    doc = json.loads(text)
    assert doc["columns"] == ["x", "pdf_numeric", "pdf_series", "abs_diff"]
    assert doc["rows"] == [[0.0, 1.0, 2.0, 3.0]]
