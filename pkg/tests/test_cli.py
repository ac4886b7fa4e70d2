import csv
import io
import json
import subprocess
import sys

import pytest

from convexlab import verify
from convexlab.cli import run


def test_prob_exact(capsys):
    assert run(["prob", "--kappa", "3", "--n", "5", "--exact"]) == 0
    assert capsys.readouterr().out.strip() == "11/36"
    assert run(["prob", "--kappa", "4", "--n", "5", "--exact"]) == 0
    assert capsys.readouterr().out.strip() == "49/144"


def test_prob_exact_unavailable(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["prob", "--kappa", "7", "--n", "5", "--exact"])
    assert exc.value.code == 2
    assert "no exact formula for kappa=7" in capsys.readouterr().err


def test_prob_json_and_asymptotic(capsys):
    assert run(["prob", "--kappa", "3", "--n", "10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {"schema", "kappa", "n", "log_asymptotic", "exact", "log_exact"} <= set(doc)
    assert doc["log_exact"] < 0
    assert run(["prob", "--kappa", "9", "--n", "10"]) == 0
    assert "exact" not in json.loads(capsys.readouterr().out)
    assert run(["prob", "--kappa", "3", "--n", "10", "--asymptotic-log"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(doc["log_asymptotic"])


def test_sample_json(capsys):
    assert run(["sample", "--kappa", "5", "--n", "12", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == 1 and doc["n"] == 12 and doc["seed"] == 3
    assert len(doc["points"]) == 12 and len(doc["ell"]) == 5 and len(doc["s"]) == 5
    # same seed, same output
    run(["sample", "--kappa", "5", "--n", "12", "--seed", "3"])
    assert json.loads(capsys.readouterr().out) == doc


def test_sample_svg_flips_y(tmp_path):
    path = tmp_path / "s.svg"
    assert run(["sample", "--kappa", "4", "--n", "20", "--algo", "square",
                "--format", "svg", "--out", str(path)]) == 0
    text = path.read_text()
    assert text.startswith("<svg") and " Q " in text
    cys = [float(part.split('"')[1]) for part in text.split("cy=")[1:]]
    assert len(cys) == 20
    assert all(cy <= 0 for cy in cys)


def test_sample_domain_error_exit_code(capsys):
    # the triangle sampler only works in a triangle
    assert run(["sample", "--kappa", "5", "--n", "8", "--algo", "triangle"]) == 1
    assert "error" in capsys.readouterr().err


def test_sample_plot(tmp_path, capsys):
    png = tmp_path / "sample.png"
    assert run(["sample", "--kappa", "3", "--n", "30", "--algo", "triangle", "--plot", str(png)]) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_shape_csv(capsys):
    assert run(["shape", "--kappa", "6", "--format", "csv", "--points-per-arc", "8"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "x,y"
    assert len(rows) > 6 * 8 - 6


def test_curve_csv(capsys):
    assert run(["curve", "--points", "5"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 5
    mid = next(r for r in rows if float(r["u"]) == 0.5)
    assert float(mid["var_x"]) == pytest.approx(1.1875)
    assert float(rows[0]["var_x"]) == pytest.approx(0.0, abs=1e-12)


def test_verify_writes_outputs(tmp_path, capsys):
    report, table, figs = tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "figs"
    code = run(["verify", "--only", "full_sided_pentagon", "--out", str(report),
                "--csv", str(table), "--figures", str(figs)])
    assert code == 0
    assert "PASS full_sided_pentagon" in capsys.readouterr().out
    doc = json.loads(report.read_text())
    assert [r["test"] for r in doc["results"]] == ["full_sided_pentagon"]
    assert table.read_text().splitlines()[0].startswith("test,estimate")
    assert any(p.suffix == ".png" for p in figs.iterdir())


def test_verify_failing_check_exit_code(monkeypatch, tmp_path, capsys):
    def failing(scale):
        return {"always_fails": lambda r: verify.McSummary(test="", estimate=0.0, stderr=0.0,
                                                           replicas=1, passed=False)}

    monkeypatch.setattr(verify, "_suite_checks", failing)
    assert run(["verify", "--out", str(tmp_path / "r.json")]) == 3
    assert "FAIL always_fails" in capsys.readouterr().out


def test_verify_unknown_only(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["verify", "--only", "nope", "--out", str(tmp_path / "r.json")])
    assert exc.value.code == 2


def test_bench(capsys):
    assert run(["bench", "--algo", "triangle", "--n-list", "50,100", "--repeats", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n"] == [50, 100] and len(doc["seconds"]) == 2
    assert doc["expected_exponent"].startswith("1")


@pytest.mark.parametrize("argv", [
    ["prob", "--kappa", "3", "--n", "zero"],
    ["prob", "--kappa", "2", "--n", "5"],
    ["sample", "--kappa", "3", "--n", "5", "--algo", "fast"],
    ["sample", "--kappa", "6", "--n", "4"],
])
def test_bad_flags_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "convexlab.cli", "prob", "--kappa", "4", "--n", "4", "--exact"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "25/36"
