import csv
import io
import json
import subprocess
import sys

import pytest

from pointmass.cli import InputError, main, parse_points


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_points_forms(tmp_path):
    assert parse_points("1,2,3,...,10") == list(range(1, 11))
    assert parse_points("0.5,1.0,...,2.5") == [0.5, 1.0, 1.5, 2.0, 2.5]
    assert parse_points("0..4") == [0, 1, 2, 3, 4]
    assert parse_points("sparse:i*(i-1)/2", 4) == [1, 3, 6, 10]
    assert parse_points("uniform:0.5", 3) == [0.5, 1.0, 1.5]
    p = tmp_path / "pts.txt"
    p.write_text("1 2\n3, 4\n")
    assert parse_points(f"@{p}") == [1, 2, 3, 4]
    with pytest.raises(InputError):
        parse_points("@" + str(tmp_path / "missing.txt"))
    with pytest.raises(InputError):
        parse_points("sparse:__import__('os')")
    with pytest.raises(InputError):
        parse_points("1,...,5")


def test_membership_min(capsys):
    code, out, _ = run(capsys, "membership", "--kernel", "min", "--points", "1,2,3,...,50", "--target", "1")
    assert code == 0
    row = json.loads(out)[0]
    assert row["verdict"] == "CertifiedBounded" and row["estimate"] == pytest.approx(2.0)
    assert row["steps"][0] == [1, 1.0]


def test_membership_binomial(capsys):
    code, out, _ = run(capsys, "membership", "--kernel", "binomial", "--points", "0..20",
                       "--target", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["verdict"] == "Diverging" and rows[0]["estimate"] == ""


def test_membership_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "membership", "--kernel", "min", "--points", f"@{tmp_path}/none.txt")
    assert code == 2 and "not found" in err


def test_membership_bad_target(capsys):
    code, _, err = run(capsys, "membership", "--kernel", "min", "--points", "1..5", "--target", "9")
    assert code == 2


def test_membership_domain_error(capsys):
    code, _, err = run(capsys, "membership", "--kernel", "min", "--points", "0..5")
    assert code == 2 and "error" in err


def test_membership_trace_files(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "membership", "--kernel", "min", "--points", "sparse:i*(i-1)/2",
                     "--max-n", "20", "--target", "3", "--target", "6", "--trace-dir", str(tmp_path),
                     "--out", str(out))
    assert code == 0
    rows = json.loads(out.read_text())
    assert [r["estimate"] for r in rows] == pytest.approx([5 / 6, 7 / 12])
    for r in rows:
        lines = open(r["trace_file"]).read().splitlines()
        assert lines[0] == "n,zeta,verdict_so_far"


def test_membership_kernel_spec_file(capsys, tmp_path):
    spec = tmp_path / "k.json"
    spec.write_text(json.dumps({"kernel": "matrix", "matrix": [[2, 1], [1, 2]]}))
    code, out, _ = run(capsys, "membership", "--kernel", str(spec), "--window", "2")
    assert code == 0
    # the inverse of [[2, 1], [1, 2]] has 2/3 on the diagonal
    assert [r["estimate"] for r in json.loads(out)] == pytest.approx([2 / 3, 2 / 3])


def test_network(capsys, tmp_path):
    p = tmp_path / "path.txt"
    p.write_text("0 1 1\n1 2 1\n2 3 1\n3 4 1\n")
    code, out, _ = run(capsys, "network", "--edges", str(p), "--base", "0", "--target", "2")
    assert code == 0
    row = json.loads(out)[0]
    assert (row["c"], row["m1"], row["m2"], row["covariance"], row["bound"]) == (2, 2, 6, 2, "pass")


def test_network_star_and_export(capsys, tmp_path):
    p = tmp_path / "star.txt"
    p.write_text("0 1 1\n0 2 1\n0 3 1\n0 4 1\n")
    kfile = tmp_path / "kernel.json"
    code, out, _ = run(capsys, "network", "--edges", str(p), "--base", "1", "--target", "0",
                       "--export-kernel", str(kfile), "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert [float(row[k]) for k in ("c", "m1", "m2", "covariance")] == [4, 4, 20, 4]
    exported = json.loads(kfile.read_text())
    assert exported["kernel"] == "matrix" and len(exported["matrix"]) == 4


def test_network_disconnected(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1 1\n2 3 1\n")
    code, _, err = run(capsys, "network", "--edges", str(p), "--base", "0")
    assert code == 2 and "unreachable" in err


def test_oracle_check_default(capsys):
    code, out, _ = run(capsys, "oracle-check")
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 11 and all(l.startswith("PASS") for l in lines)


def test_oracle_check_perturbed(capsys):
    code, out, _ = run(capsys, "oracle-check", "--only", "min-logdet,binomial-sums", "--perturb", "1e-3")
    assert code == 1 and out.count("FAIL") == 2


def test_oracle_check_empty_filter_runs_all(capsys):
    code, out, _ = run(capsys, "oracle-check", "--only", "", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 11


def test_oracle_check_unknown(capsys):
    code, _, _ = run(capsys, "oracle-check", "--only", "nope")
    assert code == 2


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--kernel", "min", "--points", "1..40", "--target", "1")
    row = json.loads(out)[0]
    assert code == 0
    assert (row["A_m0"], row["A_m1"], row["B_m0"], row["B_m1"], row["B_m2"]) == pytest.approx((1, 2, 1, 1, 2))
    assert row["identity"] == "pass"


def test_interpolate(capsys, tmp_path):
    inp = tmp_path / "in.json"
    inp.write_text(json.dumps({"kernel": {"kernel": "min", "points": [1, 2, 3]},
                               "samples": [0, 1, 2], "pairings": [1, 0.5, -0.25],
                               "grid": [1, 3, 3]}))
    grid = tmp_path / "grid.csv"
    code, out, _ = run(capsys, "interpolate", "--input", str(inp), "--grid-out", str(grid))
    assert code == 0
    rep = json.loads(out)
    assert rep["norm_sq"] == pytest.approx(1.6875)
    vals = [float(r["value"]) for r in csv.DictReader(grid.open())]
    assert vals == pytest.approx([1.25, 1.5, 1.25])


def test_interpolate_missing_input(capsys, tmp_path):
    code, _, _ = run(capsys, "interpolate", "--input", str(tmp_path / "x.json"))
    assert code == 2


def test_deterministic_output(capsys):
    argv = ["membership", "--kernel", "bridge", "--points", "uniform:0.01", "--max-n", "60"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pointmass", "oracle-check", "--only", "pascal-inverse"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("PASS pascal-inverse")
