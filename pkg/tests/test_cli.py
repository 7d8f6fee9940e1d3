import csv
import json
import os

import numpy as np
import pytest

from selberg_levy.cli import complex_arg, main
from selberg_levy.levy import LevyTriplet


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_zeros_small(tmp_path, capsys):
    out = tmp_path / "z.csv"
    assert main(["zeros", "--family", "zeta", "--T", "15", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["gamma", "multiplicity"] and len(rows) == 2
    assert abs(float(rows[1][0]) - 14.134725) < 1e-6
    assert "count minus estimate" in capsys.readouterr().err


def test_zeros_stdout_and_json(capsys):
    assert main(["zeros", "--family", "zeta", "--T", "100"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 30  # header + 29 rows
    assert main(["zeros", "--family", "cusp18", "--T", "30", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["family"] == "cusp18" and all(m == 1 for _, m in d["zeros"])


def test_unknown_family_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["zeros", "--family", "cusp99"])
    assert exc.value.code != 0
    assert "unknown family" in capsys.readouterr().err


def test_height_limit(capsys):
    with pytest.raises(SystemExit):
        main(["zeros", "--T", "5000"])


def test_triplet_json(tmp_path):
    a, b = tmp_path / "z.json", tmp_path / "zz.json"
    assert main(["triplet", "--family", "zeta", "--T", "100", "-o", str(a)]) == 0
    assert main(["triplet", "--family", "zeta2", "--T", "100", "-o", str(b)]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da["a"] == 0 and da["b0"] == 0 and len(da["atoms"]) == 58
    assert da["classification"] == "compound-poisson"
    ta, tb = LevyTriplet.from_dict(da), LevyTriplet.from_dict(db)
    assert np.allclose(tb.masses, 2 * ta.masses, rtol=1e-15)


def test_triplet_cusp18_gaussian(capsys):
    assert main(["triplet", "--family", "cusp18", "--T", "100"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["a"] == 1 and d["classification"] == "gaussian-plus-compound-poisson"


def test_triplet_csv(capsys):
    assert main(["triplet", "--family", "cusp12", "--T", "30", "--format", "csv"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("location,mass\n")
    assert "classification=compound-poisson" in captured.err


def test_zero_table_substitution(tmp_path, capsys):
    table = tmp_path / "t.txt"
    table.write_text("# two zeros\n14.134725141734693\n21.022039638771555\n")
    assert main(["triplet", "--family", "zeta", "--T", "22", "--zero-table", str(table)]) == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["atoms"]) == 4
    table.write_text("21.0\n14.0\n")
    assert main(["triplet", "--family", "zeta", "--T", "23", "--zero-table", str(table)]) == 1


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--family", "cusp18", "--T", "50", "--t-max", "2", "--steps", "300",
            "--paths", "2", "--seed", "17"]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["-o", str(p1)]) == 0
    assert main(args + ["-o", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    rows = read_csv(p1)
    assert rows[0] == ["path_id", "time", "value"] and len(rows) == 1 + 2 * 301
    meta = json.loads((tmp_path / "a.json").read_text())
    assert meta["spec"]["seed"] == 17 and meta["tail_mass"] > 0
    assert meta["triplet"]["a"] == 1


def test_simulate_zeta_piecewise_constant(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["simulate", "--family", "zeta", "--T", "100", "--t-max", "100", "--steps", "1000",
                 "--resolve-jumps", "--seed", "4", "-o", str(out)]) == 0
    v = np.array([float(r[2]) for r in read_csv(out)[1:]])
    d = np.diff(v)
    assert np.count_nonzero(d) < 0.01 * d.size


def test_simulate_plot(tmp_path):
    png = tmp_path / "paths.png"
    assert main(["simulate", "--family", "cusp18", "--T", "50", "--t-max", "1", "--steps", "200",
                 "--paths", "3", "-o", str(tmp_path / "p.csv"), "--plot", str(png)]) == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_charfn(tmp_path):
    out, png = tmp_path / "c.csv", tmp_path / "c.png"
    assert main(["charfn", "--family", "zeta", "--T", "50", "--t-min", "-5", "--t-max", "5",
                 "--points", "11", "-o", str(out), "--plot", str(png)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "re_g", "im_g", "re_cf", "im_cf", "tail_bound"] and len(rows) == 12
    mid = rows[6]
    assert float(mid[0]) == 0 and float(mid[3]) == 1
    assert png.exists()


def test_scan(tmp_path):
    out, png = tmp_path / "s.csv", tmp_path / "s.png"
    assert main(["scan", "--family", "cusp12", "--t-max", "20", "--points", "201", "--T", "20",
                 "-o", str(out), "--plot", str(png)]) == 0
    v = np.array([float(r[1]) for r in read_csv(out)[1:]])
    assert np.count_nonzero(np.diff(np.sign(v))) == 4
    assert png.exists()


def test_verify_gk68(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "gk68", "--sigma", "2", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and {r["name"] for r in rep["reports"]} == {"kernel-self-test", "gk68"}


def test_verify_failure_exit_status(capsys):
    assert main(["verify", "gk68", "--raw"]) == 1
    assert "FAIL gk68" in capsys.readouterr().err


def test_verify_real_zero_scan(capsys):
    assert main(["verify", "real-zero-scan", "--family", "cusp18"]) == 0


def test_verify_integral_identity_precondition(capsys):
    assert main(["verify", "integral-identity", "--family", "zeta", "--z", "0.0+0.4i"]) == 2
    assert "precondition" in capsys.readouterr().err


def test_verify_integral_identity_and_nonpositivity(capsys):
    assert main(["verify", "integral-identity", "lk-nonpositivity", "--family", "zeta", "--T", "100",
                 "--z", "2i", "--z", "1+2i"]) == 0
    rep = json.loads(capsys.readouterr().out)
    names = [r["name"] for r in rep["reports"]]
    assert names == ["kernel-self-test", "integral-identity", "lk-nonpositivity"]


def test_complex_flag_syntax():
    assert complex_arg("1+2i") == 1 + 2j
    assert complex_arg("0.0+0.4i") == 0.4j
    assert complex_arg("3i") == 3j
    assert complex_arg("-1.5-0.25i") == -1.5 - 0.25j


def test_atomic_write_leaves_no_temporaries(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeros", "--T", "20", "-o", str(out)]) == 0
    assert sorted(os.listdir(tmp_path)) == ["z.csv"]
