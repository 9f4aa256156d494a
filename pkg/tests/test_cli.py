import json
import subprocess
import sys

import pytest

from revlin.cli import main


@pytest.fixture
def files(tmp_path):
    (tmp_path / "two.csv").write_text("x,y\n1,3\n2,5\n")
    (tmp_path / "perm2.txt").write_text("0 1\n1 0\n")
    (tmp_path / "sing.txt").write_text("1 2\n2 4\n")
    (tmp_path / "m.txt").write_text("# a comment\n1 2\n3 4\n")
    (tmp_path / "r.txt").write_text("1 2 3\n")
    (tmp_path / "bad.txt").write_text("1 x\n")
    (tmp_path / "dup.csv").write_text("a,b,y\n1,1,2\n2,2,3\n3,3,7\n5,5,8\n")
    (tmp_path / "dec.csv").write_text("x,y\n0.5,1.25\n1.5,3.25\n")
    return tmp_path


def test_regress_exact_fit(files, capsys):
    assert main(["regress", "--bias", str(files / "two.csv")]) == 0
    assert capsys.readouterr().out == "theta = (2)\ntheta0 = 1\n"


def test_regress_decimal_input(files, capsys):
    assert main(["regress", "--bias", str(files / "dec.csv")]) == 0
    assert capsys.readouterr().out == "theta = (2)\ntheta0 = 1/4\n"


def test_regress_metrics(files, capsys):
    out = files / "m.json"
    assert main(["regress", "--bias", "--verify", "--compare", "--metrics", str(out), str(files / "two.csv")]) == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "regress"
    assert doc["dims"] == {"d": 2, "n": 2}
    assert set(doc["resource"]) == {
        "primitive_ops", "peak_live_cells", "persistent_cells", "transient_peak", "garbage_cells", "max_bits",
    }
    assert doc["verified_roundtrip"] is True
    assert doc["oracle"]["matches"] is True
    assert doc["outputs"] == {"theta": ["2"], "theta0": "1"}
    assert "timing" not in doc


def test_verified_roundtrip_absent_without_flag(files, capsys):
    out = files / "m.json"
    main(["regress", "--bias", "--metrics", str(out), str(files / "two.csv")])
    assert "verified_roundtrip" not in json.loads(out.read_text())


def test_singular_gram_hints_ridge(files, capsys):
    assert main(["regress", str(files / "dup.csv")]) == 2
    err = capsys.readouterr().err
    assert "singular" in err and "--ridge" in err
    assert main(["regress", "--ridge", "1/3", str(files / "dup.csv")]) == 0


def test_invert_perm_needs_pivoting(files, capsys):
    assert main(["invert", str(files / "perm2.txt")]) == 2
    err = capsys.readouterr().err
    assert "needs pivoting" in err and "does not exchange rows" in err


def test_invert_singular(files, capsys):
    assert main(["invert", str(files / "sing.txt")]) == 2
    assert "singular" in capsys.readouterr().err


def test_invert_prints(files, capsys):
    assert main(["invert", "--verify", str(files / "m.txt")]) == 0
    assert capsys.readouterr().out == "-2 1\n3/2 -1/2\n"
    main(["invert", "--decimal", "2", str(files / "m.txt")])
    out = capsys.readouterr().out
    assert "approximate" in out and "1.50 -0.50" in out


def test_matmul(files, capsys):
    assert main(["matmul", "--compare", str(files / "m.txt"), str(files / "m.txt")]) == 0
    assert capsys.readouterr().out == "7 10\n15 22\n"


@pytest.mark.parametrize(
    "argv",
    [["invert", "{bad}"], ["invert", "{r}"], ["matmul", "{r}", "{r}"], ["invert", "{missing}"]],
)
def test_input_errors_exit_1(files, capsys, argv):
    paths = {"bad": files / "bad.txt", "r": files / "r.txt", "missing": files / "nope.txt"}
    assert main([a.format(**paths) for a in argv]) == 1
    assert capsys.readouterr().err.startswith("error:")


@pytest.mark.parametrize("argv", [["nonsense"], ["invert"], ["verify", "--op", "matmul"]])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_max_bits_guard(files, capsys, monkeypatch):
    monkeypatch.setenv("REVLIN_MAX_BITS", "2")
    assert main(["invert", str(files / "m.txt")]) == 1
    assert "REVLIN_MAX_BITS" in capsys.readouterr().err


@pytest.mark.parametrize("op", ["matmul", "invert", "ols", "ridge"])
def test_verify_ops(op, capsys):
    assert main(["verify", "--op", op, "--size", "4", "--compare"]) == 0
    assert "round trip exact" in capsys.readouterr().out


def test_bench_metrics(tmp_path, capsys):
    out = tmp_path / "bench.json"
    assert main(["bench", "--op", "matmul", "--max", "16", "--compare", "--metrics", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["dims"]["m"] for r in doc["runs"]] == [4, 8, 16]
    assert all(r["verified_roundtrip"] for r in doc["runs"])
    assert [g["primitive_ops_ratio"] for g in doc["growth"]] == [8.0, 8.0]
    assert all(g["transient_peak_ratio"] == 1.0 for g in doc["growth"])


def test_bench_parallel_matches_serial(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["bench", "--op", "invert", "--max", "8", "--metrics", str(a)])
    main(["bench", "--op", "invert", "--max", "8", "--jobs", "2", "--metrics", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_deterministic_output(files, capsys):
    outs = []
    for _ in range(2):
        m = files / "m.json"
        main(["regress", "--bias", "--verify", "--compare", "--metrics", str(m), str(files / "two.csv")])
        outs.append((capsys.readouterr().out, m.read_bytes()))
    assert outs[0] == outs[1]


def test_entry_point_subprocess(files):
    proc = subprocess.run(
        [sys.executable, "-m", "revlin", "invert", str(files / "perm2.txt")], capture_output=True, text=True
    )
    assert proc.returncode == 2
    assert "needs pivoting" in proc.stderr
